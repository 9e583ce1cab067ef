#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "freespace/contacts.hpp"
#include "freespace/envelope.hpp"

namespace freespace {

// --- errors -----------------------------------------------------------------------

struct DegenerateFace : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UndefinedCover : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IncompatiblePair : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- subtriangles and slices --------------------------------------------------------

// Half of a triangular obstacle face, cut along the horizontal line through
// its middle vertex. v[0] is the apex (alone on its z level); v[1] and v[2]
// span the horizontal side, so the slice at height z runs from the point on
// edge v0-v1 to the point on edge v0-v2 and its direction is constant.
struct SubTri {
  int obstacle = 0;  // position in Scene::obstacles
  int face = 0;      // facet index within that obstacle's body
  std::array<P3, 3> v;
  Rat z_lo, z_hi;
  V3 slice_dir;  // v[2] - v[1]; z component zero
};

namespace detail {

inline SubTri make_subtri(int obstacle, int face, const P3& apex, const P3& b1,
                          const P3& b2) {
  SubTri s;
  s.obstacle = obstacle;
  s.face = face;
  s.v = {apex, b1, b2};
  s.z_lo = std::min(apex.z, b1.z);
  s.z_hi = std::max(apex.z, b1.z);
  s.slice_dir = b2 - b1;
  return s;
}

// Split one triangle at the horizontal line through its middle vertex.
// Returns nothing when two vertices share a z coordinate.
inline std::optional<std::pair<SubTri, SubTri>> split_triangle(int obstacle, int face,
                                                               std::array<P3, 3> p) {
  std::sort(p.begin(), p.end(), [](const P3& a, const P3& b) { return a.z < b.z; });
  if (p[0].z == p[1].z || p[1].z == p[2].z) return std::nullopt;
  Rat t = (p[1].z - p[0].z) / (p[2].z - p[0].z);
  P3 m = p[0] + t * (p[2] - p[0]);  // on the long edge, level with the middle vertex
  return std::make_pair(make_subtri(obstacle, face, p[0], m, p[1]),
                        make_subtri(obstacle, face, p[2], m, p[1]));
}

struct ChartSplit {
  std::vector<SubTri> tris;
  std::vector<std::pair<int, int>> skipped;  // (obstacle, face) left unsplit
};

// Split every triangular obstacle face in chart coordinates. Faces that
// cannot be split (a level edge in this chart, or a non-triangular facet)
// are recorded so the pipeline can route their contact pairs directly.
inline ChartSplit split_faces_chart(const Scene& scene, const ChartTransform& chart) {
  ChartSplit out;
  for (int o = 0; o < scene.k(); ++o) {
    const ConvexBody& b = scene.obstacles[o].body;
    for (int f = 0; f < static_cast<int>(b.facets.size()); ++f) {
      if (b.facets[f].size() != 3) {
        out.skipped.push_back({o, f});
        continue;
      }
      std::array<P3, 3> p;
      for (int i = 0; i < 3; ++i) p[i] = chart.point(b.verts[b.facets[f][i]]);
      auto s = split_triangle(o, f, p);
      if (!s) {
        out.skipped.push_back({o, f});
        continue;
      }
      out.tris.push_back(s->first);
      out.tris.push_back(s->second);
    }
  }
  return out;
}

}  // namespace detail

// Split all obstacle faces along the horizontal line through each face's
// middle-z vertex, in workspace coordinates.
inline std::vector<SubTri> split_faces(const Scene& scene) {
  for (int o = 0; o < scene.k(); ++o) {
    const ConvexBody& b = scene.obstacles[o].body;
    for (auto& f : b.facets)
      if (f.size() != 3) throw DegenerateFace("obstacle face is not a triangle");
  }
  detail::ChartSplit s = detail::split_faces_chart(scene, ChartTransform{});
  if (!s.skipped.empty())
    throw DegenerateFace("two face vertices share a z coordinate");
  return s.tris;
}

// Horizontal slice of a subtriangle at height z, as (x, y) coordinates. At
// the apex level the segment degenerates to the apex point; at the base
// level it is the full horizontal side.
inline std::optional<Seg2> slice(const SubTri& s, const Rat& z) {
  if (z < s.z_lo || z > s.z_hi) return std::nullopt;
  Rat den = s.v[1].z - s.v[0].z;
  Rat t = den == 0 ? Rat(0) : Rat((z - s.v[0].z) / den);
  P3 e1 = s.v[0] + t * (s.v[1] - s.v[0]);
  P3 e2 = s.v[0] + t * (s.v[2] - s.v[0]);
  return Seg2{{e1.x, e1.y}, {e2.x, e2.y}};
}

// --- the cover relation ------------------------------------------------------------

enum class CoverSide { None, Left, Right };

// A vertex contact pinned to one subtriangle.
struct VContact {
  int vertex = 0;  // robot vertex index
  SubTri tri;
};

struct CoverInterval {
  ContactSpec o1, o2;  // parent-face contact specs
  CoverSide side = CoverSide::None;
  Rat lo, hi;
};

namespace detail {

inline P2 xy(const P3& p) { return {p.x, p.y}; }

inline ContactSpec parent_spec(int vertex, const SubTri& t) {
  return {{0, vertex}, t.obstacle, {2, t.face}};
}

// Pointwise cover of O1=(p1,t1) by O2=(p2,t2) at height z, in chart
// coordinates. nullopt: the construction is undefined here (level or
// parallel slice lines, or the line crossing lands on f1's slice).
inline std::optional<CoverSide> cover_at_chart(const P3& p1, const P3& p2,
                                               const SubTri& t1, const SubTri& t2,
                                               const Rat& z) {
  auto s1 = slice(t1, z), s2 = slice(t2, z);
  if (!s1 || !s2) return CoverSide::None;
  V2 d1 = xy(t1.slice_dir), d2 = xy(t2.slice_dir);
  if (d1.x == 0) return std::nullopt;
  Rat dd = cross(d1, d2);
  if (dd == 0) return std::nullopt;
  P2 a = s1->a, b = s1->b;
  if (d1.x < 0) std::swap(a, b);
  Rat tq = cross(s2->a - a, d2) / dd;
  P2 q = a + tq * d1;
  CoverSide side;
  P2 o;
  if (q.x > b.x) {
    side = CoverSide::Right;
    o = b;
  } else if (q.x < a.x) {
    side = CoverSide::Left;
    o = a;
  } else {
    return std::nullopt;  // q lands on f1's slice
  }
  V2 e = xy(p2 - p1);
  Rat ca = cross(s2->a - o, e), cb = cross(s2->b - o, e);
  bool hit;
  if (ca == 0 && cb == 0) {
    hit = dot(s2->a - o, e) >= 0 || dot(s2->b - o, e) >= 0;
  } else if ((ca > 0 && cb > 0) || (ca < 0 && cb < 0)) {
    hit = false;
  } else {
    Rat da = dot(s2->a - o, e), db = dot(s2->b - o, e);
    Rat num = ca * db - cb * da;  // sign of the ray parameter at the crossing
    Rat den = ca - cb;
    hit = num == 0 || (num > 0) == (den > 0);
  }
  return hit ? side : CoverSide::None;
}

struct CoverScan {
  std::vector<std::tuple<CoverSide, Rat, Rat>> intervals;
  bool undefined_seen = false;
};

// Exact cover intervals over the common z range. Every sign change of the
// underlying predicates happens at a root of one of a fixed set of
// functionals that are affine in z, so evaluating them at the range ends
// pins all critical heights; midpoints then decide each cell exactly.
inline CoverScan cover_intervals_chart(const P3& p1, const P3& p2, const SubTri& t1,
                                       const SubTri& t2) {
  CoverScan out;
  Rat l = std::max(t1.z_lo, t2.z_lo), h = std::min(t1.z_hi, t2.z_hi);
  if (l > h) return out;
  V2 d1 = xy(t1.slice_dir), d2 = xy(t2.slice_dir);
  if (d1.x == 0 || cross(d1, d2) == 0) {
    out.undefined_seen = true;
    return out;
  }
  V2 e = xy(p2 - p1);
  auto funcs = [&](const Rat& z) {
    std::vector<Rat> f;
    auto s1 = *slice(t1, z);
    auto s2 = *slice(t2, z);
    P2 a = s1.a, b = s1.b;
    if (d1.x < 0) std::swap(a, b);
    Rat tq = cross(s2.a - a, d2) / cross(d1, d2);
    P2 q = a + tq * d1;
    f.push_back(q.x - a.x);
    f.push_back(q.x - b.x);
    for (const P2& o : {a, b}) {
      f.push_back(cross(s2.a - o, e));
      f.push_back(cross(s2.b - o, e));
      f.push_back(cross(o - s2.a, d2));
    }
    return f;
  };
  std::vector<Rat> cuts = {l, h};
  if (l < h) {
    std::vector<Rat> fl = funcs(l), fh = funcs(h);
    for (size_t i = 0; i < fl.size(); ++i) {
      if (fl[i] == fh[i]) continue;
      Rat r = l + (h - l) * fl[i] / (fl[i] - fh[i]);
      if (r > l && r < h) cuts.push_back(r);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Alternating point/cell evaluations: points at the cuts, cells between.
  std::vector<std::optional<CoverSide>> at;
  for (size_t i = 0; i < cuts.size(); ++i) {
    at.push_back(cover_at_chart(p1, p2, t1, t2, cuts[i]));
    if (i + 1 < cuts.size())
      at.push_back(cover_at_chart(p1, p2, t1, t2, (cuts[i] + cuts[i + 1]) / 2));
  }
  for (auto& v : at)
    if (!v) out.undefined_seen = true;

  auto covered = [&](size_t idx) {
    return at[idx] && *at[idx] != CoverSide::None;
  };
  size_t n = at.size();
  size_t i = 0;
  while (i < n) {
    if (!covered(i)) {
      ++i;
      continue;
    }
    CoverSide side = *at[i];
    size_t j = i;
    while (j + 1 < n && covered(j + 1) && *at[j + 1] == side) ++j;
    // Even indices are cut points; odd indices are open cells whose closure
    // extends to the neighbouring cuts.
    Rat lo = cuts[i / 2];
    Rat hi = (j % 2 == 0) ? cuts[j / 2] : cuts[j / 2 + 1];
    out.intervals.push_back({side, lo, hi});
    i = j + 1;
  }
  return out;
}

inline ChartTransform flat_robot_chart(const RobotShape& robot) {
  if (robot.body.dim != 2)
    throw DegenerateInput("this operation needs a flat robot");
  return make_chart_transform(robot.body.planes[0].n);
}

inline SubTri chart_subtri(const ChartTransform& chart, const SubTri& t) {
  return make_subtri(t.obstacle, t.face, chart.point(t.v[0]), chart.point(t.v[1]),
                     chart.point(t.v[2]));
}

}  // namespace detail

// Pointwise cover for a flat robot. The subtriangles are given in workspace
// coordinates; z is the sweep coordinate of the robot's chart (the workspace
// z when the robot lies in a constant-z plane). Returns None when a slice is
// missing or the ray misses; throws when the construction is undefined.
inline CoverSide cover(const RobotShape& robot, const VContact& o1, const VContact& o2,
                       const Rat& z) {
  ChartTransform chart = detail::flat_robot_chart(robot);
  auto r = detail::cover_at_chart(chart.point(robot.body.verts[o1.vertex]),
                                  chart.point(robot.body.verts[o2.vertex]),
                                  detail::chart_subtri(chart, o1.tri),
                                  detail::chart_subtri(chart, o2.tri), z);
  if (!r) throw UndefinedCover("cover is undefined at this height");
  return *r;
}

// Exact interval(s) of sweep heights where o2 covers o1, at most one per
// side. Agrees with pointwise cover() wherever the latter is defined.
inline std::vector<CoverInterval> cover_interval(const RobotShape& robot,
                                                 const VContact& o1,
                                                 const VContact& o2) {
  ChartTransform chart = detail::flat_robot_chart(robot);
  auto scan = detail::cover_intervals_chart(chart.point(robot.body.verts[o1.vertex]),
                                            chart.point(robot.body.verts[o2.vertex]),
                                            detail::chart_subtri(chart, o1.tri),
                                            detail::chart_subtri(chart, o2.tri));
  std::vector<CoverInterval> out;
  for (auto& [side, lo, hi] : scan.intervals)
    out.push_back({detail::parent_spec(o1.vertex, o1.tri),
                   detail::parent_spec(o2.vertex, o2.tri), side, lo, hi});
  return out;
}

// --- parametric-plane segments ------------------------------------------------------

enum class SegTag {
  CoverLeft,
  CoverRight,
  IllegalBelow,
  IllegalAbove,
  QuadPP,  // illegal toward +s and +t
  QuadPM,  // illegal toward +s and -t
  QuadMP,
  QuadMM,
};

inline const char* seg_tag_name(SegTag t) {
  switch (t) {
    case SegTag::CoverLeft: return "cover-left";
    case SegTag::CoverRight: return "cover-right";
    case SegTag::IllegalBelow: return "illegal-below";
    case SegTag::IllegalAbove: return "illegal-above";
    case SegTag::QuadPP: return "illegal+s+t";
    case SegTag::QuadPM: return "illegal+s-t";
    case SegTag::QuadMP: return "illegal-s+t";
    case SegTag::QuadMM: return "illegal-s-t";
  }
  return "?";
}

// Double-contact locus in the parametric plane of the contact `plane`,
// witnessed by the contact `source`.
struct PPSeg {
  ContactSpec plane;
  ContactSpec source;
  Seg2 seg;
  SegTag tag = SegTag::CoverLeft;
};

// Valid region of a parametric plane: the sweep triangle of a vertex
// contact, or the unit rectangle of an edge or face contact.
struct PlaneRegion {
  enum class Kind { Triangle, Rectangle };
  Kind kind = Kind::Rectangle;
  std::array<P2, 3> corners{};  // triangle: (z_apex,0), (z_base,0), (z_base,1)
  Rat s_max = 1, height = 1;    // rectangle extents
};

inline PlaneRegion plane_region(const RobotShape& robot, const VContact& o1) {
  ChartTransform chart = detail::flat_robot_chart(robot);
  SubTri t = detail::chart_subtri(chart, o1.tri);
  Rat z_apex = t.v[0].z, z_base = t.v[1].z;
  PlaneRegion r;
  r.kind = PlaneRegion::Kind::Triangle;
  r.corners = {P2{z_apex, 0}, P2{z_base, 0}, P2{z_base, 1}};
  return r;
}

inline PlaneRegion plane_region(const ContactSpec& o1) {
  if (o1.robot.dim == 0)
    throw DegenerateInput("vertex contacts have triangular plane regions");
  return PlaneRegion{};
}

namespace detail {

struct SigmaPiece {
  Seg2 seg;  // (z, s); s measured from the slice's smaller-x endpoint
  CoverSide side = CoverSide::None;
};

struct SigmaScan {
  std::vector<SigmaPiece> pieces;
  bool needs_direct = false;  // some configuration was degenerate here
};

// Double-contact locus of (p1,t1) against (p2,t2) in the plane of (p1,t1),
// clipped to the cover intervals, the second slice, and the sweep triangle.
// All clip bounds are roots of functionals affine in z.
inline SigmaScan sigma_chart(const P3& p1, const P3& p2, const SubTri& t1,
                             const SubTri& t2) {
  SigmaScan out;
  CoverScan cov = cover_intervals_chart(p1, p2, t1, t2);
  out.needs_direct = cov.undefined_seen;
  if (cov.intervals.empty()) return out;
  V2 d1 = xy(t1.slice_dir), d2 = xy(t2.slice_dir);
  V2 e = xy(p2 - p1);
  V2 d1n = d1.x > 0 ? d1 : V2{-d1.x, -d1.y};
  // Contact point of p1 on f1's slice when p2 also touches f2: the crossing
  // of line 1 with line 2 shifted by -e. Affine in z.
  auto c1_at = [&](const Rat& z) {
    Seg2 s1 = *slice(t1, z), s2 = *slice(t2, z);
    P2 a2 = s2.a - e;
    Rat t = cross(a2 - s1.a, d2) / cross(d1, d2);
    return s1.a + t * d1;
  };
  auto s_of = [&](const Rat& z, const P2& c1) -> Rat {
    Seg2 s1 = *slice(t1, z);
    P2 a = d1.x > 0 ? s1.a : s1.b;
    return (c1.x - a.x) / d1n.x;
  };
  Rat apex_den = t1.v[1].z - t1.v[0].z;  // nonzero by construction
  int q2 = d2.x != 0 ? 0 : 1;            // coordinate used to test c2 on slice 2
  Rat d2q = q2 == 0 ? d2.x : d2.y;
  auto constraints = [&](const Rat& z) {
    // All values must be >= 0 for the locus to be realizable at height z.
    std::vector<Rat> f;
    P2 c1 = c1_at(z);
    Rat s = s_of(z, c1);
    Rat smax = (z - t1.v[0].z) / apex_den;
    f.push_back(s);
    f.push_back(smax - s);
    Seg2 s2 = *slice(t2, z);
    P2 c2 = c1 + e;
    Rat ca = q2 == 0 ? c2.x - s2.a.x : c2.y - s2.a.y;
    Rat cb = q2 == 0 ? s2.b.x - c2.x : s2.b.y - c2.y;
    int sg = sgn(d2q);
    f.push_back(sg >= 0 ? ca : Rat(-ca));
    f.push_back(sg >= 0 ? cb : Rat(-cb));
    return f;
  };
  for (auto& [side, zl, zh] : cov.intervals) {
    if (zl == zh) {
      out.needs_direct = true;
      continue;
    }
    Rat za = zl, zb = zh;
    std::vector<Rat> fl = constraints(zl), fh = constraints(zh);
    bool empty = false;
    for (size_t i = 0; i < fl.size() && !empty; ++i) {
      if (fl[i] >= 0 && fh[i] >= 0) continue;
      if (fl[i] < 0 && fh[i] < 0) {
        empty = true;
        break;
      }
      Rat r = zl + (zh - zl) * fl[i] / (fl[i] - fh[i]);
      if (fl[i] < 0)
        za = std::max(za, r);
      else
        zb = std::min(zb, r);
    }
    if (empty || za > zb) continue;
    if (za == zb) {
      out.needs_direct = true;
      continue;
    }
    P2 pa{za, s_of(za, c1_at(za))};
    P2 pb{zb, s_of(zb, c1_at(zb))};
    out.pieces.push_back({Seg2{pa, pb}, side});
  }
  return out;
}

}  // namespace detail

// σ of (o1, o2) in o1's parametric plane, when the cover relation carves out
// a nondegenerate locus. Coordinates are (sweep height, affine slice
// parameter from the smaller-x slice endpoint).
inline std::optional<PPSeg> sigma_vertex(const RobotShape& robot, const VContact& o1,
                                         const VContact& o2) {
  ChartTransform chart = detail::flat_robot_chart(robot);
  auto scan = detail::sigma_chart(chart.point(robot.body.verts[o1.vertex]),
                                  chart.point(robot.body.verts[o2.vertex]),
                                  detail::chart_subtri(chart, o1.tri),
                                  detail::chart_subtri(chart, o2.tri));
  if (scan.pieces.empty()) return std::nullopt;
  const detail::SigmaPiece& p = scan.pieces.front();
  return PPSeg{detail::parent_spec(o1.vertex, o1.tri),
               detail::parent_spec(o2.vertex, o2.tri), p.seg,
               p.side == CoverSide::Left ? SegTag::CoverLeft : SegTag::CoverRight};
}

// --- envelope candidate events ------------------------------------------------------

namespace detail {

struct Fam {
  SegFamily fam;
  std::vector<int> src;  // per segment: index into the owning context's table
  Envelope env;
  bool has_env = false;
};

inline void ensure_env(Fam& f, EnvSide side) {
  if (!f.has_env && !f.fam.segments.empty()) {
    f.env = envelope(f.fam, side);
    f.has_env = true;
  }
}

// Candidate double-contact points between two families restricted to their
// envelopes: transversal envelope crossings, plus every segment-endpoint
// touch lying on both envelopes (clip corners, shared obstacle edges, and
// value ties all surface as endpoint touches).
inline std::vector<std::pair<int, int>> pair_events(Fam& f2, EnvSide side2, Fam& f3,
                                                    EnvSide side3) {
  std::vector<std::pair<int, int>> out;
  if (f2.fam.segments.empty() || f3.fam.segments.empty()) return out;
  for (auto& ev : cross_envelope_visible_detail(f2.fam, side2, f3.fam, side3))
    out.push_back({ev.id1, ev.id2});
  ensure_env(f2, side2);
  ensure_env(f3, side3);
  std::vector<P2> pts;
  for (auto& s : f2.fam.segments) {
    pts.push_back(s.a);
    pts.push_back(s.b);
  }
  for (auto& s : f3.fam.segments) {
    pts.push_back(s.a);
    pts.push_back(s.b);
  }
  std::sort(pts.begin(), pts.end(), [](const P2& a, const P2& b) { return lex_less(a, b); });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const P2& a, const P2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  for (const P2& q : pts) {
    auto v2 = envelope_value(f2.env, q.x);
    if (!v2 || *v2 != q.y) continue;
    auto v3 = envelope_value(f3.env, q.x);
    if (!v3 || *v3 != q.y) continue;
    for (size_t i = 0; i < f2.fam.segments.size(); ++i) {
      if (!point_on_seg2(q, f2.fam.segments[i])) continue;
      for (size_t j = 0; j < f3.fam.segments.size(); ++j)
        if (point_on_seg2(q, f3.fam.segments[j]))
          out.push_back({static_cast<int>(i), static_cast<int>(j)});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// The segment attaining the envelope of its family immediately after
// (before) x: best value at x, ties broken by slope so the winner stays
// extremal on the open side.
inline std::optional<int> extremal_segment(const SegFamily& fam, const Rat& x,
                                           bool after, bool highest) {
  std::optional<int> best;
  Rat by, bs;
  for (size_t i = 0; i < fam.segments.size(); ++i) {
    Seg2 s = fam.segments[i];
    if (s.a.x > s.b.x) std::swap(s.a, s.b);
    bool covers = after ? (s.a.x <= x && x < s.b.x) : (s.a.x < x && x <= s.b.x);
    if (!covers) continue;
    Rat y = seg2_value_at(s, x);
    Rat sl = (s.b.y - s.a.y) / (s.b.x - s.a.x);
    if (!after) sl = -sl;
    bool better = !best || (highest ? (y > by || (y == by && sl > bs))
                                    : (y < by || (y == by && sl < bs)));
    if (better) {
      best = static_cast<int>(i);
      by = y;
      bs = sl;
    }
  }
  return best;
}

}  // namespace detail

// --- vertex-contact charts ----------------------------------------------------------

namespace detail {

struct TriBox {
  Rat xlo, xhi, ylo, yhi;
};

// One sweep chart: all robot vertices sharing a plane direction, the scene's
// subtriangles in chart coordinates, and memoized σ families.
struct VvvChart {
  std::vector<P3> cverts;     // chart coords of all robot vertices
  std::vector<int> universe;  // vertex indices active in this chart
  std::vector<SubTri> tris;
  std::vector<TriBox> boxes;
  std::vector<std::pair<int, int>> skipped;
  // (p1, t1, p2) -> left/right families over subtriangle sources
  std::map<std::tuple<int, int, int>, std::pair<Fam, Fam>> fams;
  std::set<std::pair<ContactSpec, ContactSpec>>* direct = nullptr;

  // completions[{i,j}] lists the vertices forming a chart triple with i and j.
  std::map<std::pair<int, int>, std::vector<int>> completions;

  void note_direct(const ContactSpec& a, const ContactSpec& b) {
    ContactSpec x = a, y = b;
    if (y < x) std::swap(x, y);
    direct->insert({x, y});
  }

  std::pair<Fam, Fam>& families(int p1, int t1, int p2) {
    auto key = std::make_tuple(p1, t1, p2);
    auto it = fams.find(key);
    if (it != fams.end()) return it->second;
    auto& entry = fams[key];
    const SubTri& a = tris[t1];
    const TriBox& ab = boxes[t1];
    V2 e = xy(cverts[p2] - cverts[p1]);
    for (int t2 = 0; t2 < static_cast<int>(tris.size()); ++t2) {
      const SubTri& b = tris[t2];
      if (b.z_hi < a.z_lo || b.z_lo > a.z_hi) continue;
      const TriBox& bb = boxes[t2];
      if (bb.xhi - e.x < ab.xlo || bb.xlo - e.x > ab.xhi) continue;
      if (bb.yhi - e.y < ab.ylo || bb.ylo - e.y > ab.yhi) continue;
      SigmaScan scan = sigma_chart(cverts[p1], cverts[p2], a, b);
      if (scan.needs_direct)
        note_direct(parent_spec(p1, a), parent_spec(p2, b));
      for (auto& piece : scan.pieces) {
        Fam& fam = piece.side == CoverSide::Left ? entry.first : entry.second;
        fam.fam.segments.push_back(piece.seg);
        fam.src.push_back(t2);
      }
    }
    return entry;
  }
};

inline TriBox tri_box(const SubTri& t) {
  TriBox b{t.v[0].x, t.v[0].x, t.v[0].y, t.v[0].y};
  for (int i = 1; i < 3; ++i) {
    b.xlo = std::min(b.xlo, t.v[i].x);
    b.xhi = std::max(b.xhi, t.v[i].x);
    b.ylo = std::min(b.ylo, t.v[i].y);
    b.yhi = std::max(b.yhi, t.v[i].y);
  }
  return b;
}

inline VvvChart make_vvv_chart(const RobotShape& robot, const Scene& scene,
                               const V3& normal,
                               const std::vector<std::array<int, 3>>& triples,
                               std::set<std::pair<ContactSpec, ContactSpec>>* direct) {
  VvvChart c;
  c.direct = direct;
  ChartTransform chart = make_chart_transform(normal);
  for (auto& v : robot.body.verts) c.cverts.push_back(chart.point(v));
  std::set<int> uni;
  for (auto& t : triples)
    for (int v : t) uni.insert(v);
  c.universe.assign(uni.begin(), uni.end());
  for (auto& t : triples) {
    std::array<int, 3> s = t;
    std::sort(s.begin(), s.end());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        c.completions[{s[i], s[j]}].push_back(s[3 - i - j]);
      }
  }
  for (auto& [k, v] : c.completions) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  ChartSplit split = split_faces_chart(scene, chart);
  c.tris = std::move(split.tris);
  c.skipped = std::move(split.skipped);
  for (auto& t : c.tris) c.boxes.push_back(tri_box(t));
  return c;
}

// Candidate triples from one chart: envelope crossings between the σ
// families of two partner vertices (each family on the side its cover
// direction makes illegal), and reconstruction walks from envelope
// breakpoints for circular configurations that the crossings miss.
inline void vvv_chart_candidates(VvvChart& c, bool crossings, bool walks,
                                 std::set<std::array<ContactSpec, 3>>& cand) {
  auto add = [&](const ContactSpec& a, const ContactSpec& b, const ContactSpec& d) {
    std::array<ContactSpec, 3> t{a, b, d};
    std::sort(t.begin(), t.end());
    if (t[0] == t[1] || t[1] == t[2]) return;
    cand.insert(t);
  };
  // Faces this chart could not split fall back to direct line scans: pair
  // each of their vertex contacts with every other vertex contact in scope.
  for (auto& [so, sf] : c.skipped)
    for (int p1 : c.universe) {
      ContactSpec a{{0, p1}, so, {2, sf}};
      for (int p2 : c.universe) {
        if (p2 == p1) continue;
        for (auto& t : c.tris) c.note_direct(a, parent_spec(p2, t));
        for (auto& [so2, sf2] : c.skipped) {
          ContactSpec b{{0, p2}, so2, {2, sf2}};
          if (!(a == b)) c.note_direct(a, b);
        }
      }
    }
  int nt = static_cast<int>(c.tris.size());
  for (int p1 : c.universe) {
    for (int t1 = 0; t1 < nt; ++t1) {
      ContactSpec o1 = parent_spec(p1, c.tris[t1]);
      if (crossings) {
        for (auto& [key, thirds] : c.completions) {
          auto [p2, p3] = key;
          if (p2 >= p3) continue;  // unordered partner pair
          if (std::find(thirds.begin(), thirds.end(), p1) == thirds.end()) continue;
          auto& f2 = c.families(p1, t1, p2);
          auto& f3 = c.families(p1, t1, p3);
          struct SideRef {
            Fam* f;
            EnvSide side;
            int p;
          };
          SideRef refs2[2] = {{&f2.first, EnvSide::Upper, p2},
                              {&f2.second, EnvSide::Lower, p2}};
          SideRef refs3[2] = {{&f3.first, EnvSide::Upper, p3},
                              {&f3.second, EnvSide::Lower, p3}};
          for (auto& r2 : refs2)
            for (auto& r3 : refs3)
              for (auto& [i2, i3] : pair_events(*r2.f, r2.side, *r3.f, r3.side))
                add(o1, parent_spec(p2, c.tris[r2.f->src[i2]]),
                    parent_spec(p3, c.tris[r3.f->src[i3]]));
        }
      }
      if (walks) {
        for (int p2 : c.universe) {
          if (p2 == p1) continue;
          auto cit = c.completions.find({p1, p2});
          if (cit == c.completions.end()) continue;
          auto& fp = c.families(p1, t1, p2);
          std::vector<Rat> bps;
          for (Fam* f : {&fp.first, &fp.second}) {
            if (f->fam.segments.empty()) continue;
            ensure_env(*f, f == &fp.first ? EnvSide::Upper : EnvSide::Lower);
            // every piece boundary is a breakpoint: where the extremal
            // segment can change, including envelope starts, ends and gaps
            for (auto& pc : f->env.pieces) {
              bps.push_back(pc.x0);
              bps.push_back(pc.x1);
            }
          }
          std::sort(bps.begin(), bps.end());
          bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
          for (const Rat& z : bps)
            for (int p3 : cit->second)
              for (int mask = 0; mask < 8; ++mask)
                for (bool after : {true, false}) {
                  bool hiA = (mask & 1) == 0, hiB = (mask & 2) == 0,
                       hiC = (mask & 4) == 0;
                  auto& fA = c.families(p1, t1, p2);
                  Fam& a = hiA ? fA.first : fA.second;
                  auto sA = extremal_segment(a.fam, z, after, hiA);
                  if (!sA) continue;
                  int f2 = a.src[*sA];
                  auto& fB = c.families(p2, f2, p3);
                  Fam& b = hiB ? fB.first : fB.second;
                  auto sB = extremal_segment(b.fam, z, after, hiB);
                  if (!sB) continue;
                  int f3 = b.src[*sB];
                  auto& fC = c.families(p3, f3, p1);
                  Fam& d = hiC ? fC.first : fC.second;
                  auto sC = extremal_segment(d.fam, z, after, hiC);
                  if (!sC) continue;
                  int f4 = d.src[*sC];
                  // close the cycle on the owning face
                  if (c.tris[f4].obstacle != c.tris[t1].obstacle ||
                      c.tris[f4].face != c.tris[t1].face)
                    continue;
                  add(o1, parent_spec(p2, c.tris[f2]), parent_spec(p3, c.tris[f3]));
                }
        }
      }
    }
  }
}

// All chart vertex triples grouped by plane direction.
inline std::vector<std::pair<V3, std::vector<std::array<int, 3>>>> chart_triples(
    const RobotShape& robot) {
  std::map<std::array<Rat, 3>, std::pair<V3, std::vector<std::array<int, 3>>>> groups;
  const auto& v = robot.body.verts;
  int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        V3 nor = cross(v[j] - v[i], v[k] - v[i]);
        if (is_zero(nor)) continue;
        nor = primitive_dir(nor);
        auto& g = groups[{nor.x, nor.y, nor.z}];
        g.first = nor;
        g.second.push_back({i, j, k});
      }
  std::vector<std::pair<V3, std::vector<std::array<int, 3>>>> out;
  for (auto& [k, g] : groups) out.push_back(g);
  return out;
}

}  // namespace detail

// σ families of o1 against partner vertex p2, split by cover side: left
// covers into L (legal placements ride its upper envelope), right covers
// into R (lower envelope).
inline std::pair<std::vector<PPSeg>, std::vector<PPSeg>> vertex_families(
    const RobotShape& robot, const Scene& scene, const VContact& o1, int p2) {
  ChartTransform chart = detail::flat_robot_chart(robot);
  detail::ChartSplit split = detail::split_faces_chart(scene, chart);
  SubTri t1 = detail::chart_subtri(chart, o1.tri);
  P3 p1c = chart.point(robot.body.verts[o1.vertex]);
  P3 p2c = chart.point(robot.body.verts[p2]);
  std::pair<std::vector<PPSeg>, std::vector<PPSeg>> out;
  ContactSpec plane = detail::parent_spec(o1.vertex, o1.tri);
  for (auto& t2 : split.tris) {
    auto scan = detail::sigma_chart(p1c, p2c, t1, t2);
    for (auto& piece : scan.pieces) {
      PPSeg s{plane, detail::parent_spec(p2, t2), piece.seg,
              piece.side == CoverSide::Left ? SegTag::CoverLeft : SegTag::CoverRight};
      (piece.side == CoverSide::Left ? out.first : out.second).push_back(s);
    }
  }
  return out;
}

// --- edge- and face-contact charts --------------------------------------------------

namespace detail {

// Parametric chart of an edge or face contact: placements v(s,t) = v00 +
// s*As + t*At with (s,t) in the unit square.
struct GenChart {
  ContactSpec owner;
  P3 v00;
  V3 As, At;
};

inline GenChart make_edge_chart(const RobotShape& robot, const Scene& scene,
                                const ContactSpec& o1) {
  const ConvexBody& B = robot.body;
  const ConvexBody& C = scene.obstacles[o1.obstacle].body;
  auto [e0, e1] = B.edges[o1.robot.index];
  auto [w0, w1] = C.edges[o1.feature.index];
  GenChart c;
  c.owner = o1;
  c.v00 = C.verts[w0] - (B.verts[e0] - P3{0, 0, 0});
  c.As = C.verts[w1] - C.verts[w0];
  c.At = -(B.verts[e1] - B.verts[e0]);
  return c;
}

inline std::optional<GenChart> make_face_chart(const RobotShape& robot,
                                               const Scene& scene,
                                               const ContactSpec& o1) {
  const ConvexBody& B = robot.body;
  const auto& cyc = B.facets[o1.robot.index];
  if (cyc.size() != 4) return std::nullopt;
  P3 q0 = B.verts[cyc[0]];
  V3 U = B.verts[cyc[1]] - q0, T = B.verts[cyc[3]] - q0;
  if (!(B.verts[cyc[2]] == q0 + U + T)) return std::nullopt;  // not a parallelogram
  P3 w = scene.obstacles[o1.obstacle].body.verts[o1.feature.index];
  GenChart c;
  c.owner = o1;
  c.v00 = w - (q0 - P3{0, 0, 0});
  c.As = -U;
  c.At = -T;
  return c;
}

struct GenSigma {
  Seg2 seg;        // (s, t)
  P3 mid;          // workspace placement at the segment midpoint
  bool degenerate = false;
};

// Pull the surface of o2 back through the chart: an exact segment in (s,t),
// clipped to the unit square and the surface polygon.
inline std::optional<GenSigma> gen_sigma(const GenChart& c, const ContactSurface& s2) {
  Rat A = dot(s2.plane.n, c.As), B = dot(s2.plane.n, c.At);
  Rat C = s2.plane.c - dot(s2.plane.n, c.v00 - P3{0, 0, 0});
  if (A == 0 && B == 0) return std::nullopt;
  Rat s0, t0;
  if (B != 0) {
    s0 = 0;
    t0 = C / B;
  } else {
    s0 = C / A;
    t0 = 0;
  }
  Rat ds = -B, dt = A;
  P3 P = c.v00 + s0 * c.As + t0 * c.At;
  V3 L = ds * c.As + dt * c.At;
  auto I = clip_line_to_polygon(P, L, s2.polygon, s2.plane.n);
  if (!I) return std::nullopt;
  Rat u0 = I->first, u1 = I->second;
  auto clip_axis = [&](const Rat& base, const Rat& d) {
    if (d == 0) return base >= 0 && base <= 1;
    Rat ua = (0 - base) / d, ub = (1 - base) / d;
    if (ua > ub) std::swap(ua, ub);
    u0 = std::max(u0, ua);
    u1 = std::min(u1, ub);
    return true;
  };
  if (!clip_axis(s0, ds) || !clip_axis(t0, dt)) return std::nullopt;
  if (u0 > u1) return std::nullopt;
  GenSigma g;
  g.seg = Seg2{{s0 + u0 * ds, t0 + u0 * dt}, {s0 + u1 * ds, t0 + u1 * dt}};
  Rat um = (u0 + u1) / 2;
  g.mid = P + um * L;
  g.degenerate = u0 == u1;
  return g;
}

// Whether moving from boundary point v along m enters the body's interior
// (+1), leaves it or starts outside (-1), or grazes a facet (0).
inline int side_probe(const ConvexBody& b, const P3& v, const V3& m) {
  if (b.dim < 3) return 0;
  bool active = false, tangent = false, exits = false;
  for (auto& pl : b.planes) {
    int s = pl.side(v);
    if (s > 0) return -1;
    if (s == 0) {
      active = true;
      int d = sgn(dot(pl.n, m));
      if (d > 0) exits = true;
      else if (d == 0) tangent = true;
    }
  }
  if (!active) return 0;
  if (exits) return -1;
  if (tangent) return 0;
  return 1;
}

// Illegal direction along an axis: +1 if placements just beyond σ toward
// +axis penetrate o2's obstacle, -1 for -axis, 0 if the probe is ambiguous.
inline int illegal_sign(const FreeSpace& fs, int obstacle, const P3& mid, const V3& axis) {
  const ConvexBody& body = fs.forbidden[obstacle];
  int plus = side_probe(body, mid, axis);
  int minus = side_probe(body, mid, -axis);
  if (plus == 1 && minus != 1) return 1;
  if (minus == 1 && plus != 1) return -1;
  return 0;
}

inline bool par_edge_partners(const RobotShape& robot, const ContactSpec& a,
                              const ContactSpec& b) {
  if (a.robot.dim != 1 || b.robot.dim != 1) return false;
  if (a.robot.index == b.robot.index) return true;
  return parallel(robot_edge_dir(robot.body, a.robot.index),
                  robot_edge_dir(robot.body, b.robot.index));
}

inline bool line_pair_partners(const RobotShape& robot, const ContactSpec& a,
                               const ContactSpec& b) {
  if (robot.kind != RobotKind::ConvexPolytope) return false;
  const ContactSpec* f = nullptr;
  const ContactSpec* o = nullptr;
  if (a.robot.dim == 2) {
    f = &a;
    o = &b;
  } else if (b.robot.dim == 2) {
    f = &b;
    o = &a;
  } else {
    return false;
  }
  if (o->robot.dim == 2) return true;
  if (o->robot.dim != 1) return false;
  const ConvexBody& B = robot.body;
  if (edge_on_facet(B, o->robot.index, f->robot.index)) return true;
  for (int g = 0; g < static_cast<int>(B.facets.size()); ++g)
    if (g != f->robot.index && facets_parallel(B, f->robot.index, g) &&
        edge_on_facet(B, o->robot.index, g))
      return true;
  return false;
}

}  // namespace detail

// Strips partitioning the chart rectangle of an edge contact along t, sized
// so each strip's workspace height stays at or below the shorter edge of the
// owner's parallel pair.
inline std::vector<std::pair<Rat, Rat>> strips(const RobotShape& robot,
                                               const PlaneRegion& gamma,
                                               const ContactSpec& o1) {
  if (gamma.kind != PlaneRegion::Kind::Rectangle)
    throw DegenerateInput("strips apply to rectangular plane regions");
  long k = 1;
  if (o1.robot.dim == 1 && o1.robot.index < static_cast<int>(robot.parallel.size())) {
    const EdgePartner& p = robot.parallel[o1.robot.index];
    if (p.partner >= 0) {
      Rat r = p.ratio;
      if (r < 1) {
        Rat inv = 1 / r;
        r = inv;
      }
      k = ceil_rat(r).convert_to<long>();
      if (k < 1) k = 1;
    }
  }
  std::vector<std::pair<Rat, Rat>> out;
  for (long i = 0; i < k; ++i)
    out.push_back({gamma.height * Rat(i) / k, gamma.height * Rat(i + 1) / k});
  return out;
}

// Double-contact locus of o2 in the parametric plane of the edge or face
// contact o1, tagged with its illegal side(s).
inline std::optional<PPSeg> pp_segment_generic(const RobotShape& robot,
                                               const Scene& scene,
                                               const ContactSpec& o1,
                                               const ContactSpec& o2) {
  if (o1.robot.dim == 0)
    throw IncompatiblePair("the plane owner must be an edge or face contact");
  if (detail::par_edge_partners(robot, o1, o2))
    throw IncompatiblePair("parallel-edge pairs move on a line, not a plane");
  if (detail::line_pair_partners(robot, o1, o2))
    throw IncompatiblePair("face-pinned pairs move on a line, not a plane");
  std::optional<detail::GenChart> chart;
  if (o1.robot.dim == 1)
    chart = detail::make_edge_chart(robot, scene, o1);
  else
    chart = detail::make_face_chart(robot, scene, o1);
  if (!chart) return std::nullopt;
  ContactSurface s2 = contact_surface(robot, scene, o2);
  auto g = detail::gen_sigma(*chart, s2);
  if (!g || g->degenerate) return std::nullopt;
  FreeSpace fs = make_free_space(robot, scene);
  int ts = detail::illegal_sign(fs, o2.obstacle, g->mid, chart->At);
  PPSeg out{o1, o2, g->seg, SegTag::IllegalBelow};
  if (o1.robot.dim == 1) {
    if (ts == 0) return std::nullopt;
    out.tag = ts > 0 ? SegTag::IllegalAbove : SegTag::IllegalBelow;
  } else {
    int ss = detail::illegal_sign(fs, o2.obstacle, g->mid, chart->As);
    if (ts == 0 || ss == 0) return std::nullopt;
    out.tag = ss > 0 ? (ts > 0 ? SegTag::QuadPP : SegTag::QuadPM)
                     : (ts > 0 ? SegTag::QuadMP : SegTag::QuadMM);
  }
  return out;
}

// --- structured pipeline ------------------------------------------------------------

struct StructuredOptions {
  bool disable_envelope_crossings = false;  // vertex-chart crossing candidates
  bool disable_breakpoint_walks = false;    // vertex-chart reconstruction walks
  int threads = 1;
};

namespace detail {

inline std::optional<size_t> spec_index(const SurfaceSet& ss, const ContactSpec& s) {
  auto it = std::lower_bound(ss.specs.begin(), ss.specs.end(), s);
  if (it == ss.specs.end() || !(*it == s)) return std::nullopt;
  return static_cast<size_t>(it - ss.specs.begin());
}

// Third contacts along the line a pair is pinned to, added as candidate
// triples. Pairs whose surfaces are parallel or unrealized contribute none.
inline void direct_pair_route(const RobotShape& robot, const SurfaceSet& ss,
                              const FreeSpace& fs, const ContactSpec& a,
                              const ContactSpec& b,
                              std::set<std::array<ContactSpec, 3>>& cand) {
  (void)robot;
  auto ia = spec_index(ss, a), ib = spec_index(ss, b);
  if (!ia || !ib || !ss.surfaces[*ia] || !ss.surfaces[*ib]) return;
  const ContactSurface& sa = *ss.surfaces[*ia];
  const ContactSurface& sb = *ss.surfaces[*ib];
  if (!sa.box.overlaps(sb.box)) return;
  std::vector<ContactSpec> thirds;
  try {
    thirds = third_contacts_on_line(ss, fs, sa, sb, a, b, /*interior_only=*/false);
  } catch (const NoLine&) {
    return;
  }
  for (auto& sp : thirds) {
    std::array<ContactSpec, 3> t{a, b, sp};
    std::sort(t.begin(), t.end());
    if (t[0] == t[1] || t[1] == t[2]) continue;
    cand.insert(t);
  }
}

// Same robot vertex against two faces of one obstacle: the pair rides the
// shared-edge translate, which the sweep machinery does not cover.
inline void repeated_vertex_pairs(const RobotShape& robot, const Scene& scene,
                                  std::set<std::pair<ContactSpec, ContactSpec>>& pairs) {
  int nv = static_cast<int>(robot.body.verts.size());
  for (int p = 0; p < nv; ++p)
    for (int o = 0; o < scene.k(); ++o) {
      int nf = static_cast<int>(scene.obstacles[o].body.facets.size());
      for (int fa = 0; fa < nf; ++fa)
        for (int fb = fa + 1; fb < nf; ++fb)
          pairs.insert({{{0, p}, o, {2, fa}}, {{0, p}, o, {2, fb}}});
    }
}

// Candidates in one edge or face chart: per strip and per axis orientation,
// envelope events between σ families of distinct robot features, each
// family filtered on the side its illegal region dictates.
inline void gen_chart_candidates(const RobotShape& robot, const SurfaceSet& ss,
                                 const FreeSpace& fs, const GenChart& chart,
                                 const std::vector<std::pair<Rat, Rat>>& bands,
                                 bool both_orientations,
                                 std::set<std::array<ContactSpec, 3>>& cand,
                                 std::set<std::pair<ContactSpec, ContactSpec>>& direct) {
  auto oidx = spec_index(ss, chart.owner);
  if (!oidx || !ss.surfaces[*oidx]) return;
  const AABB& obox = ss.surfaces[*oidx]->box;
  struct Entry {
    ContactSpec spec;
    Seg2 seg;
    int s_sign = 0, t_sign = 0;
  };
  std::vector<Entry> sigmas;
  auto note_direct = [&](const ContactSpec& o2) {
    ContactSpec x = chart.owner, y = o2;
    if (y < x) std::swap(x, y);
    direct.insert({x, y});
  };
  for (size_t i = 0; i < ss.specs.size(); ++i) {
    const ContactSpec& o2 = ss.specs[i];
    if (o2 == chart.owner || !ss.surfaces[i]) continue;
    if (o2.robot.dim == 2 && robot.kind == RobotKind::FlatPolygon) continue;
    if (par_edge_partners(robot, chart.owner, o2)) continue;
    if (line_pair_partners(robot, chart.owner, o2)) continue;
    if (!obox.overlaps(ss.surfaces[i]->box)) continue;
    auto g = gen_sigma(chart, *ss.surfaces[i]);
    if (!g) continue;
    if (g->degenerate) {
      note_direct(o2);
      continue;
    }
    Entry e{o2, g->seg, 0, 0};
    e.t_sign = illegal_sign(fs, o2.obstacle, g->mid, chart.At);
    e.s_sign = illegal_sign(fs, o2.obstacle, g->mid, chart.As);
    // A σ that is vertical or has an ambiguous illegal side in some
    // orientation it would feed cannot carry the envelope argument there;
    // its pair goes to the direct line scan instead.
    bool bad_s = e.seg.a.x == e.seg.b.x || e.t_sign == 0;   // s abscissa
    bool bad_t = e.seg.a.y == e.seg.b.y || e.s_sign == 0;   // t abscissa
    if (bad_s || (both_orientations && bad_t)) note_direct(o2);
    if (bad_s && (!both_orientations || bad_t)) continue;
    sigmas.push_back(e);
  }
  int orientations = both_orientations ? 2 : 1;
  for (int ori = 0; ori < orientations; ++ori) {
    for (auto& [b0, b1] : bands) {
      // families keyed by (robot feature, lower envelope?) after clipping to
      // the band; abscissa is s for orientation 0, t for orientation 1
      std::map<std::pair<FeatureRef, bool>, Fam> fams;
      std::vector<const Entry*> srcs;
      for (auto& e : sigmas) {
        Seg2 s = e.seg;
        // clip the ordinate (t in orientation 0) to [b0, b1]
        Rat tlo = std::min(s.a.y, s.b.y), thi = std::max(s.a.y, s.b.y);
        if (thi < b0 || tlo > b1) continue;
        if (tlo < b0 || thi > b1) {
          auto at = [&](const Rat& t) {
            Rat u = (t - s.a.y) / (s.b.y - s.a.y);
            return P2{s.a.x + u * (s.b.x - s.a.x), t};
          };
          P2 pa = s.a, pb = s.b;
          if (pa.y < b0) pa = at(b0);
          if (pb.y < b0) pb = at(b0);
          if (pa.y > b1) pa = at(b1);
          if (pb.y > b1) pb = at(b1);
          s = Seg2{pa, pb};
          if (s.a == s.b) continue;  // grazes the band; the neighbour owns it
        }
        int sign = ori == 0 ? e.t_sign : e.s_sign;
        if (sign == 0) continue;
        Seg2 use = ori == 0 ? s : Seg2{{s.a.y, s.a.x}, {s.b.y, s.b.x}};
        if (use.a.x == use.b.x) continue;  // vertical in this orientation
        bool lower = sign > 0;  // illegal above: legal placements ride below
        Fam& f = fams[{e.spec.robot, lower}];
        f.fam.segments.push_back(use);
        f.src.push_back(static_cast<int>(srcs.size()));
        srcs.push_back(&e);
      }
      for (auto it2 = fams.begin(); it2 != fams.end(); ++it2)
        for (auto it3 = std::next(it2); it3 != fams.end(); ++it3) {
          if (it2->first.first == it3->first.first) continue;  // same robot feature
          EnvSide s2 = it2->first.second ? EnvSide::Lower : EnvSide::Upper;
          EnvSide s3 = it3->first.second ? EnvSide::Lower : EnvSide::Upper;
          for (auto& [i2, i3] : pair_events(it2->second, s2, it3->second, s3)) {
            std::array<ContactSpec, 3> t{chart.owner,
                                         srcs[it2->second.src[i2]]->spec,
                                         srcs[it3->second.src[i3]]->spec};
            std::sort(t.begin(), t.end());
            if (t[0] == t[1] || t[1] == t[2]) continue;
            cand.insert(t);
          }
        }
    }
  }
}

// Candidates for face contacts of a flat robot: all pairwise crossings of
// the other surfaces' chords in the contact plane.
inline void face_plane_candidates(const RobotShape& robot, const SurfaceSet& ss,
                                  const ContactSpec& owner,
                                  std::set<std::array<ContactSpec, 3>>& cand) {
  (void)robot;
  auto oidx = spec_index(ss, owner);
  if (!oidx || !ss.surfaces[*oidx]) return;
  const ContactSurface& so = *ss.surfaces[*oidx];
  struct Chord {
    ContactSpec spec;
    Seg2 seg;
  };
  // project the plane to 2D by dropping the dominant normal coordinate
  int drop = 0;
  Rat best = rat_abs(so.plane.n.x);
  if (rat_abs(so.plane.n.y) > best) {
    best = rat_abs(so.plane.n.y);
    drop = 1;
  }
  if (rat_abs(so.plane.n.z) > best) drop = 2;
  auto proj = [&](const P3& p) {
    if (drop == 0) return P2{p.y, p.z};
    if (drop == 1) return P2{p.x, p.z};
    return P2{p.x, p.y};
  };
  std::vector<Chord> chords;
  for (size_t i = 0; i < ss.specs.size(); ++i) {
    if (i == *oidx || !ss.surfaces[i]) continue;
    const ContactSurface& s = *ss.surfaces[i];
    if (!so.box.overlaps(s.box)) continue;
    if (is_zero(cross(so.plane.n, s.plane.n))) continue;
    auto [P, L] = plane_line(so.plane, s.plane);
    auto I1 = clip_line_to_polygon(P, L, so.polygon, so.plane.n);
    if (!I1) continue;
    auto I2 = clip_line_to_polygon(P, L, s.polygon, s.plane.n);
    if (!I2) continue;
    Rat t0 = std::max(I1->first, I2->first), t1 = std::min(I1->second, I2->second);
    if (t0 > t1) continue;
    chords.push_back({ss.specs[i], Seg2{proj(P + t0 * L), proj(P + t1 * L)}});
  }
  for (size_t i = 0; i < chords.size(); ++i)
    for (size_t j = i + 1; j < chords.size(); ++j) {
      auto isect = seg2_intersect(chords[i].seg, chords[j].seg);
      if (!std::holds_alternative<Seg2Point>(isect)) continue;
      std::array<ContactSpec, 3> t{owner, chords[i].spec, chords[j].spec};
      std::sort(t.begin(), t.end());
      if (t[0] == t[1] || t[1] == t[2]) continue;
      cand.insert(t);
    }
}

// Exhaustive scan over the specs whose robot feature dimension is allowed,
// keeping triples of the requested classes.
inline void restricted_brute(const RobotShape& robot, const SurfaceSet& ss,
                             const FreeSpace& fs, std::set<int> dims,
                             std::set<ClassTag> tags, int threads,
                             std::set<std::array<ContactSpec, 3>>& cand) {
  SurfaceSet sub;
  for (size_t i = 0; i < ss.specs.size(); ++i) {
    if (!dims.count(ss.specs[i].robot.dim)) continue;
    sub.specs.push_back(ss.specs[i]);
    sub.surfaces.push_back(ss.surfaces[i]);
  }
  size_t pairs = count_pairs(sub);
  auto run = [&](size_t lo, size_t hi, std::vector<std::array<ContactSpec, 3>>& out) {
    scan_triples(sub, fs, lo, hi, [&](size_t i, size_t j, size_t k, const P3&) {
      std::array<ContactSpec, 3> t{sub.specs[i], sub.specs[j], sub.specs[k]};
      std::sort(t.begin(), t.end());
      if (tags.count(classify_triple(robot, t))) out.push_back(t);
    });
  };
  if (threads <= 1 || pairs < 2) {
    std::vector<std::array<ContactSpec, 3>> got;
    run(0, pairs, got);
    for (auto& t : got) cand.insert(t);
  } else {
    size_t nt = std::min<size_t>(threads, pairs);
    std::vector<std::vector<std::array<ContactSpec, 3>>> parts(nt);
    std::vector<std::thread> pool;
    for (size_t t = 0; t < nt; ++t) {
      size_t lo = pairs * t / nt, hi = pairs * (t + 1) / nt;
      pool.emplace_back([&, t, lo, hi] { run(lo, hi, parts[t]); });
    }
    for (auto& th : pool) th.join();
    for (auto& p : parts)
      for (auto& t : p) cand.insert(t);
  }
}

inline void vvv_routes(const RobotShape& robot, const Scene& scene,
                       const StructuredOptions& opts,
                       std::set<std::array<ContactSpec, 3>>& cand,
                       std::set<std::pair<ContactSpec, ContactSpec>>& direct) {
  for (auto& [normal, triples] : chart_triples(robot)) {
    VvvChart chart = make_vvv_chart(robot, scene, normal, triples, &direct);
    vvv_chart_candidates(chart, !opts.disable_envelope_crossings,
                         !opts.disable_breakpoint_walks, cand);
  }
}

}  // namespace detail

// Candidate vertex-triple contacts: envelope crossings and breakpoint walks
// in every chart, plus direct line scans for the pairs the charts flag as
// degenerate and for same-vertex face pairs. A superset of the realized free
// triples whose features are all robot vertices.
inline std::vector<std::array<ContactSpec, 3>> vvv_candidates(const RobotShape& robot,
                                                              const Scene& scene) {
  detail::SurfaceSet ss = detail::build_surfaces(robot, scene);
  FreeSpace fs = make_free_space(robot, scene);
  std::set<std::array<ContactSpec, 3>> cand;
  std::set<std::pair<ContactSpec, ContactSpec>> direct;
  detail::vvv_routes(robot, scene, StructuredOptions{}, cand, direct);
  detail::repeated_vertex_pairs(robot, scene, direct);
  for (auto& [a, b] : direct) detail::direct_pair_route(robot, ss, fs, a, b, cand);
  std::vector<std::array<ContactSpec, 3>> out(cand.begin(), cand.end());
  // keep only all-vertex candidates
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const std::array<ContactSpec, 3>& t) {
                             for (auto& s : t)
                               if (s.robot.dim != 0) return true;
                             return false;
                           }),
            out.end());
  return out;
}

// All realized free generic triples via the per-class structured routes;
// every candidate passes the same solve and freeness filter as the
// exhaustive enumeration.
inline std::vector<TripleContact> structured_triples(const RobotShape& robot,
                                                     const Scene& scene,
                                                     const StructuredOptions& opts = {}) {
  if (robot.kind == RobotKind::ConvexPolytope && !robot.is_cube)
    return brute_force_triples(robot, scene, opts.threads);
  detail::SurfaceSet ss = detail::build_surfaces(robot, scene);
  FreeSpace fs = make_free_space(robot, scene);
  std::set<std::array<ContactSpec, 3>> cand;
  std::set<std::pair<ContactSpec, ContactSpec>> direct;

  detail::vvv_routes(robot, scene, opts, cand, direct);
  detail::repeated_vertex_pairs(robot, scene, direct);

  // pairs pinned to a line: same or parallel robot edges, and for polytopes
  // face pairs and face-adjacent edges
  for (size_t i = 0; i < ss.specs.size(); ++i)
    for (size_t j = i + 1; j < ss.specs.size(); ++j) {
      const ContactSpec &a = ss.specs[i], &b = ss.specs[j];
      if (detail::par_edge_partners(robot, a, b) ||
          detail::line_pair_partners(robot, a, b))
        direct.insert({a, b});
    }

  bool flat = robot.kind == RobotKind::FlatPolygon;
  if (flat) {
    for (auto& sp : ss.specs)
      if (sp.robot.dim == 2) detail::face_plane_candidates(robot, ss, sp, cand);
  }
  bool edge_charts = robot.is_fully_parallel || robot.is_cube;
  if (edge_charts) {
    PlaneRegion gamma;
    for (auto& sp : ss.specs) {
      if (sp.robot.dim != 1) continue;
      auto chart = detail::make_edge_chart(robot, scene, sp);
      detail::gen_chart_candidates(robot, ss, fs, chart, strips(robot, gamma, sp),
                                   /*both_orientations=*/false, cand, direct);
    }
  }
  if (robot.is_cube) {
    std::vector<std::pair<Rat, Rat>> whole = {{Rat(0), Rat(1)}};
    for (auto& sp : ss.specs) {
      if (sp.robot.dim != 2) continue;
      auto chart = detail::make_face_chart(robot, scene, sp);
      if (!chart) continue;
      detail::gen_chart_candidates(robot, ss, fs, *chart, whole,
                                   /*both_orientations=*/true, cand, direct);
    }
  }

  std::set<ClassTag> brute_tags;
  std::set<int> brute_dims;
  if (robot.is_cube || (flat && robot.is_fully_parallel && !robot.is_square)) {
    brute_tags.insert(ClassTag::EEE_NONPAR);
    brute_dims.insert(1);
  }
  if (flat && !robot.is_fully_parallel) {
    brute_tags.insert(ClassTag::EEE_NONPAR);
    brute_tags.insert(ClassTag::EDGE_PP);
    brute_dims.insert(0);
    brute_dims.insert(1);
  }
  if (!brute_tags.empty())
    detail::restricted_brute(robot, ss, fs, brute_dims, brute_tags, opts.threads, cand);

  for (auto& [a, b] : direct) detail::direct_pair_route(robot, ss, fs, a, b, cand);

  std::vector<TripleContact> out;
  for (auto& t : cand) {
    auto i0 = detail::spec_index(ss, t[0]);
    auto i1 = detail::spec_index(ss, t[1]);
    auto i2 = detail::spec_index(ss, t[2]);
    if (!i0 || !i1 || !i2) continue;
    if (!ss.surfaces[*i0] || !ss.surfaces[*i1] || !ss.surfaces[*i2]) continue;
    TripleSolve sol =
        solve_triple(*ss.surfaces[*i0], *ss.surfaces[*i1], *ss.surfaces[*i2]);
    if (!sol.v || !is_free(fs, *sol.v)) continue;
    out.push_back({t, *sol.v, classify_triple(robot, t)});
  }
  return out;  // set order equals TripleContact order
}

// --- diagnostics --------------------------------------------------------------------

inline std::string spec_id(const ContactSpec& s) {
  std::ostringstream os;
  os << "r" << s.robot.dim << "." << s.robot.index << "/o" << s.obstacle << "."
     << s.feature.dim << "." << s.feature.index;
  return os.str();
}

inline std::string seg_str(const Seg2& s) {
  std::ostringstream os;
  os << "(" << rat_str(s.a.x) << "," << rat_str(s.a.y) << ")-(" << rat_str(s.b.x)
     << "," << rat_str(s.b.y) << ")";
  return os.str();
}

// Text dump of the parametric plane(s) owned by one contact: families,
// envelope sizes, and candidate events, keyed by spec ids.
inline std::string explain_plane(const RobotShape& robot, const Scene& scene,
                                 const ContactSpec& o1) {
  std::ostringstream os;
  detail::SurfaceSet ss = detail::build_surfaces(robot, scene);
  FreeSpace fs = make_free_space(robot, scene);
  if (o1.robot.dim == 0) {
    if (robot.body.dim != 2) {
      os << "plane " << spec_id(o1) << ": vertex charts of polytope robots are "
         << "enumerated per vertex-triple plane; use the flat-robot form\n";
      return os.str();
    }
    ChartTransform chart = detail::flat_robot_chart(robot);
    detail::ChartSplit split = detail::split_faces_chart(scene, chart);
    P3 p1 = chart.point(robot.body.verts[o1.robot.index]);
    int shown = 0;
    for (auto& t1 : split.tris) {
      if (t1.obstacle != o1.obstacle || t1.face != o1.feature.index) continue;
      os << "plane " << spec_id(o1) << " part " << shown++ << " sweep ["
         << rat_str(t1.z_lo) << ", " << rat_str(t1.z_hi) << "]\n";
      for (int p2 = 0; p2 < static_cast<int>(robot.body.verts.size()); ++p2) {
        if (p2 == o1.robot.index) continue;
        P3 p2c = chart.point(robot.body.verts[p2]);
        int nl = 0, nr = 0;
        for (auto& t2 : split.tris) {
          auto scan = detail::sigma_chart(p1, p2c, t1, t2);
          for (auto& piece : scan.pieces) {
            bool left = piece.side == CoverSide::Left;
            (left ? nl : nr)++;
            os << "  sigma " << spec_id(detail::parent_spec(p2, t2))
               << (left ? " left " : " right ") << seg_str(piece.seg) << "\n";
          }
        }
        os << "  partner r0." << p2 << ": " << nl << " left, " << nr << " right\n";
      }
    }
    if (!shown) os << "plane " << spec_id(o1) << ": no sweepable parts\n";
    return os.str();
  }
  std::optional<detail::GenChart> chart;
  if (o1.robot.dim == 1)
    chart = detail::make_edge_chart(robot, scene, o1);
  else if (robot.is_cube)
    chart = detail::make_face_chart(robot, scene, o1);
  if (!chart) {
    // flat-robot face contact: list the in-plane chords
    auto oidx = detail::spec_index(ss, o1);
    if (!oidx || !ss.surfaces[*oidx]) {
      os << "plane " << spec_id(o1) << ": no realized surface\n";
      return os.str();
    }
    std::set<std::array<ContactSpec, 3>> cand;
    detail::face_plane_candidates(robot, ss, o1, cand);
    os << "plane " << spec_id(o1) << " face-contact: " << cand.size()
       << " chord crossings\n";
    for (auto& t : cand)
      os << "  candidate " << spec_id(t[0]) << " " << spec_id(t[1]) << " "
         << spec_id(t[2]) << "\n";
    return os.str();
  }
  os << "plane " << spec_id(o1) << " rectangle [0,1]x[0,1]\n";
  int n = 0;
  for (size_t i = 0; i < ss.specs.size(); ++i) {
    const ContactSpec& o2 = ss.specs[i];
    if (o2 == o1 || !ss.surfaces[i]) continue;
    if (detail::par_edge_partners(robot, o1, o2)) continue;
    if (detail::line_pair_partners(robot, o1, o2)) continue;
    auto g = detail::gen_sigma(*chart, *ss.surfaces[i]);
    if (!g || g->degenerate) continue;
    int ts = detail::illegal_sign(fs, o2.obstacle, g->mid, chart->At);
    os << "  sigma " << spec_id(o2) << " " << seg_str(g->seg)
       << (ts > 0 ? " illegal-above" : ts < 0 ? " illegal-below" : " ambiguous")
       << "\n";
    ++n;
  }
  os << "  " << n << " segments\n";
  return os.str();
}

}  // namespace freespace
