#pragma once

#include <array>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "freespace/scene.hpp"

namespace freespace {

// --- contact specifications -----------------------------------------------------

struct FeatureRef {
  int dim = 0;
  int index = 0;

  friend bool operator==(const FeatureRef& a, const FeatureRef& b) {
    return a.dim == b.dim && a.index == b.index;
  }
  friend bool operator<(const FeatureRef& a, const FeatureRef& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.index < b.index;
  }
};

// `obstacle` is the position in Scene::obstacles, which is sorted by id, so
// comparisons by position agree with comparisons by id.
struct ContactSpec {
  FeatureRef robot;
  int obstacle = 0;
  FeatureRef feature;

  friend bool operator==(const ContactSpec& a, const ContactSpec& b) {
    return a.robot == b.robot && a.obstacle == b.obstacle && a.feature == b.feature;
  }
  friend bool operator<(const ContactSpec& a, const ContactSpec& b) {
    if (a.obstacle != b.obstacle) return a.obstacle < b.obstacle;
    if (!(a.feature == b.feature)) return a.feature < b.feature;
    return a.robot < b.robot;
  }
};

inline bool is_generic(const ContactSpec& s) { return s.robot.dim + s.feature.dim == 2; }
inline int degeneracy_degree(const ContactSpec& s) {
  return 2 - s.robot.dim - s.feature.dim;
}

enum class ContactKind { Vertex, Edge, Face };

inline ContactKind contact_kind(const ContactSpec& s) {
  switch (s.robot.dim) {
    case 0: return ContactKind::Vertex;
    case 1: return ContactKind::Edge;
    default: return ContactKind::Face;
  }
}

struct DegenerateSurface : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoLine : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContactSurface {
  ContactSpec spec;
  Plane plane;              // n . p = c, canonicalized, orientation unspecified
  std::vector<P3> polygon;  // convex cycle in that plane
  AABB box;
};

// All generic specs: robot vertex x obstacle face, edge x edge, face x vertex.
// Canonical order: (obstacle, obstacle feature dim, obstacle feature index,
// robot feature dim, robot feature index).
inline std::vector<ContactSpec> enumerate_specs(const RobotShape& robot, const Scene& scene) {
  std::vector<ContactSpec> out;
  const ConvexBody& B = robot.body;
  int nrv = static_cast<int>(B.verts.size());
  int nre = static_cast<int>(B.edges.size());
  int nrf = static_cast<int>(B.facets.size());
  for (int o = 0; o < scene.k(); ++o) {
    const ConvexBody& C = scene.obstacles[o].body;
    for (int gi = 0; gi < static_cast<int>(C.verts.size()); ++gi)
      for (int fi = 0; fi < nrf; ++fi) out.push_back({{2, fi}, o, {0, gi}});
    for (int gi = 0; gi < static_cast<int>(C.edges.size()); ++gi)
      for (int fi = 0; fi < nre; ++fi) out.push_back({{1, fi}, o, {1, gi}});
    for (int gi = 0; gi < static_cast<int>(C.facets.size()); ++gi)
      for (int fi = 0; fi < nrv; ++fi) out.push_back({{0, fi}, o, {2, gi}});
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline std::vector<P3> feature_points(const ConvexBody& b, const FeatureRef& f) {
  std::vector<P3> pts;
  if (f.dim == 0) {
    pts.push_back(b.verts[f.index]);
  } else if (f.dim == 1) {
    auto [i, j] = b.edges[f.index];
    pts.push_back(b.verts[i]);
    pts.push_back(b.verts[j]);
  } else {
    for (int v : b.facets[f.index]) pts.push_back(b.verts[v]);
  }
  return pts;
}

}  // namespace detail

// The surface of a generic spec is g + (-f): a translate of the obstacle face,
// the parallelogram spanned by the two edges, or a point-reflected translate
// of the robot face. Always a genuine convex polygon; parallel edge features
// collapse it and raise DegenerateSurface.
inline ContactSurface contact_surface(const RobotShape& robot, const Scene& scene,
                                      const ContactSpec& spec) {
  const ConvexBody& C = scene.obstacles[spec.obstacle].body;
  std::vector<P3> f = detail::feature_points(robot.body, spec.robot);
  std::vector<P3> g = detail::feature_points(C, spec.feature);
  std::vector<P3> sum;
  sum.reserve(f.size() * g.size());
  for (auto& w : g)
    for (auto& u : f) sum.push_back(w - (u - P3{0, 0, 0}));
  ConvexBody h = hull(sum);
  if (h.dim != 2)
    throw DegenerateSurface("contact surface degenerates: parallel features");
  ContactSurface s;
  s.spec = spec;
  s.plane = h.planes[0];
  for (int v : h.facets[0]) s.polygon.push_back(h.verts[v]);
  s.box = bbox_of(s.polygon);
  return s;
}

// --- forbidden bodies and freeness ----------------------------------------------

inline ConvexBody forbidden_body(const RobotShape& robot, const Obstacle& obstacle) {
  return minkowski(obstacle.body, negated(robot.body));
}

struct FreeSpace {
  std::vector<ConvexBody> forbidden;  // one per obstacle, scene order
};

inline FreeSpace make_free_space(const RobotShape& robot, const Scene& scene) {
  FreeSpace fs;
  ConvexBody neg = negated(robot.body);
  fs.forbidden.reserve(scene.obstacles.size());
  for (auto& o : scene.obstacles) fs.forbidden.push_back(minkowski(o.body, neg));
  return fs;
}

namespace detail {

inline bool box_may_contain(const AABB& box, const P3& p) {
  double l[3] = {dbl_lo(p.x), dbl_lo(p.y), dbl_lo(p.z)};
  double h[3] = {dbl_hi(p.x), dbl_hi(p.y), dbl_hi(p.z)};
  for (int i = 0; i < 3; ++i)
    if (h[i] < box.lo[i] || l[i] > box.hi[i]) return false;
  return true;
}

}  // namespace detail

// A placement is free when it is not interior to any forbidden body; boundary
// contact is legal, and bodies of dimension < 3 have empty interior.
inline bool is_free(const FreeSpace& fs, const P3& v) {
  for (auto& b : fs.forbidden) {
    if (b.dim < 3) continue;
    if (!detail::box_may_contain(b.box, v)) continue;
    if (interior_contains(b, v)) return false;
  }
  return true;
}

// --- triple solving --------------------------------------------------------------

struct TripleSolve {
  std::optional<P3> v;
  // True when the three planes are consistent but have no unique common
  // point (a shared line or plane): input for concurrency diagnostics.
  bool degenerate = false;
};

namespace detail {

// Intersection line of two nonparallel planes.
inline std::pair<P3, V3> plane_line(const Plane& a, const Plane& b) {
  V3 L = cross(a.n, b.n);
  P3 P{0, 0, 0};
  // Zero the coordinate where L is largest and solve the remaining 2x2.
  int k = 0;
  Rat best = rat_abs(L.x);
  if (rat_abs(L.y) > best) { best = rat_abs(L.y); k = 1; }
  if (rat_abs(L.z) > best) k = 2;
  int i = (k + 1) % 3, j = (k + 2) % 3;
  auto coord = [](const V3& n, int t) { return t == 0 ? n.x : (t == 1 ? n.y : n.z); };
  Rat det = coord(a.n, i) * coord(b.n, j) - coord(a.n, j) * coord(b.n, i);
  Rat pi = (a.c * coord(b.n, j) - b.c * coord(a.n, j)) / det;
  Rat pj = (coord(a.n, i) * b.c - coord(b.n, i) * a.c) / det;
  Rat c[3] = {0, 0, 0};
  c[i] = pi;
  c[j] = pj;
  P = P3{c[0], c[1], c[2]};
  return {P, L};
}

// Clip the line P + t L against a convex polygon lying in a plane containing
// the line. Returns the closed parameter interval, or nullopt when the line
// misses the polygon.
inline std::optional<std::pair<Rat, Rat>> clip_line_to_polygon(
    const P3& P, const V3& L, const std::vector<P3>& poly, const V3& n) {
  int m = static_cast<int>(poly.size());
  // Orientation sign of the cycle about n.
  int s = 0;
  for (int i = 0; i < m && s == 0; ++i) {
    const P3& a = poly[i];
    const P3& b = poly[(i + 1) % m];
    const P3& c = poly[(i + 2) % m];
    s = sgn(dot(cross(b - a, c - b), n));
  }
  bool lo_set = false, hi_set = false;
  Rat lo(0), hi(0);
  for (int i = 0; i < m; ++i) {
    const P3& a = poly[i];
    V3 e = poly[(i + 1) % m] - a;
    // Inside condition: s * dot(cross(e, q - a), n) >= 0, affine in t.
    Rat g0 = Rat(s) * dot(cross(e, P - a), n);
    Rat gd = Rat(s) * dot(cross(e, L), n);
    if (gd == 0) {
      if (g0 < 0) return std::nullopt;
      continue;
    }
    Rat t = -g0 / gd;
    if (gd > 0) {
      if (!lo_set || t > lo) { lo = t; lo_set = true; }
    } else {
      if (!hi_set || t < hi) { hi = t; hi_set = true; }
    }
    if (lo_set && hi_set && lo > hi) return std::nullopt;
  }
  if (!lo_set || !hi_set) {
    // Convex polygons are bounded, so an unbounded interval means the clip
    // was called with a line outside the polygon's plane.
    throw std::logic_error("clip_line_to_polygon: line not confined by polygon");
  }
  return std::make_pair(lo, hi);
}

inline AABB segment_box(const P3& a, const P3& b) {
  AABB box;
  box.grow(a);
  box.grow(b);
  return box;
}

}  // namespace detail

// Solve the three surface planes exactly; report the unique solution only if
// it lies in all three closed polygons. Consistent singular systems (shared
// line or shared plane) set `degenerate` for diagnostics.
inline TripleSolve solve_triple(const ContactSurface& s1, const ContactSurface& s2,
                                const ContactSurface& s3) {
  const Plane &a = s1.plane, &b = s2.plane, &c = s3.plane;
  Rat det = det3(a.n, b.n, c.n);
  if (det == 0) {
    // Singular: consistent iff all planes share a line or coincide.
    bool consistent = false;
    if (cross(a.n, b.n) == V3{0, 0, 0} && cross(a.n, c.n) == V3{0, 0, 0}) {
      // All normals parallel: consistent iff the planes coincide pairwise.
      consistent = a.unoriented() == b.unoriented() && a.unoriented() == c.unoriented();
    } else {
      const Plane* p2 = &b;
      const Plane* p3 = &c;
      if (cross(a.n, b.n) == V3{0, 0, 0}) {
        p2 = &c;
        p3 = &b;
      }
      auto [P, L] = detail::plane_line(a, *p2);
      consistent = dot(p3->n, L) == 0 && dot(p3->n, P - P3{0, 0, 0}) == p3->c;
    }
    return {std::nullopt, consistent};
  }
  // Cramer's rule, column replacement.
  auto solve1 = [&](int col) {
    V3 r1 = a.n, r2 = b.n, r3 = c.n;
    auto set = [&](V3& r, const Rat& val) {
      if (col == 0) r.x = val;
      else if (col == 1) r.y = val;
      else r.z = val;
    };
    set(r1, a.c);
    set(r2, b.c);
    set(r3, c.c);
    return det3(r1, r2, r3) / det;
  };
  P3 v{solve1(0), solve1(1), solve1(2)};
  for (const ContactSurface* s : {&s1, &s2, &s3})
    if (locate_in_convex_polygon3(s->polygon, s->plane.n, v).loc == PolyLoc::Outside)
      return {std::nullopt, false};
  return {v, false};
}

inline TripleSolve solve_triple(const RobotShape& robot, const Scene& scene,
                                const ContactSpec& a, const ContactSpec& b,
                                const ContactSpec& c) {
  return solve_triple(contact_surface(robot, scene, a), contact_surface(robot, scene, b),
                      contact_surface(robot, scene, c));
}

// --- classification ---------------------------------------------------------------

enum class ClassTag { VVV, FACE, PAR_EDGE, LINE_PAIR, FACE_PP, EDGE_PP, EEE_NONPAR };

inline const char* class_tag_name(ClassTag t) {
  switch (t) {
    case ClassTag::VVV: return "VVV";
    case ClassTag::FACE: return "FACE";
    case ClassTag::PAR_EDGE: return "PAR_EDGE";
    case ClassTag::LINE_PAIR: return "LINE_PAIR";
    case ClassTag::FACE_PP: return "FACE_PP";
    case ClassTag::EDGE_PP: return "EDGE_PP";
    case ClassTag::EEE_NONPAR: return "EEE_NONPAR";
  }
  return "?";
}

struct Unclassifiable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline V3 robot_edge_dir(const ConvexBody& b, int e) {
  auto [i, j] = b.edges[e];
  return b.verts[j] - b.verts[i];
}

inline bool edge_on_facet(const ConvexBody& b, int e, int f) {
  auto [i, j] = b.edges[e];
  bool hi = false, hj = false;
  for (int v : b.facets[f]) {
    if (v == i) hi = true;
    if (v == j) hj = true;
  }
  return hi && hj;
}

inline bool facets_parallel(const ConvexBody& b, int f, int g) {
  return cross(b.planes[f].n, b.planes[g].n) == V3{0, 0, 0};
}

}  // namespace detail

// Case analysis on the multiset of robot features, in priority order. The
// tag names the structured counting route that covers the triple.
inline ClassTag classify_triple(const RobotShape& robot,
                                const std::array<ContactSpec, 3>& specs) {
  const ConvexBody& B = robot.body;
  std::vector<int> vs, es, fs;
  for (auto& s : specs) {
    if (s.robot.dim == 0) vs.push_back(s.robot.index);
    else if (s.robot.dim == 1) es.push_back(s.robot.index);
    else fs.push_back(s.robot.index);
  }
  if (vs.size() == 3) return ClassTag::VVV;
  for (size_t i = 0; i < es.size(); ++i)
    for (size_t j = i + 1; j < es.size(); ++j) {
      if (es[i] == es[j]) return ClassTag::PAR_EDGE;
      if (cross(detail::robot_edge_dir(B, es[i]), detail::robot_edge_dir(B, es[j])) ==
          V3{0, 0, 0})
        return ClassTag::PAR_EDGE;
    }
  if (robot.kind == RobotKind::ConvexPolytope) {
    // Any two face features pin the motion to a line (nonparallel planes) or
    // to nothing at all (parallel planes); both route through the line case.
    if (fs.size() >= 2) return ClassTag::LINE_PAIR;
    if (fs.size() == 1)
      for (int e : es) {
        if (detail::edge_on_facet(B, e, fs[0])) return ClassTag::LINE_PAIR;
        for (int g = 0; g < static_cast<int>(B.facets.size()); ++g)
          if (g != fs[0] && detail::facets_parallel(B, fs[0], g) &&
              detail::edge_on_facet(B, e, g))
            return ClassTag::LINE_PAIR;
      }
  }
  if (robot.kind == RobotKind::FlatPolygon && !fs.empty()) return ClassTag::FACE;
  if (robot.is_cube && !fs.empty()) return ClassTag::FACE_PP;
  if (fs.empty() && !es.empty() && !vs.empty()) return ClassTag::EDGE_PP;
  if (es.size() == 3) return ClassTag::EEE_NONPAR;
  throw Unclassifiable("triple falls outside the case analysis");
}

// --- brute-force enumeration ------------------------------------------------------

struct TripleContact {
  std::array<ContactSpec, 3> specs;  // sorted
  P3 placement;
  ClassTag tag;

  friend bool operator<(const TripleContact& a, const TripleContact& b) {
    for (int i = 0; i < 3; ++i) {
      if (a.specs[i] < b.specs[i]) return true;
      if (b.specs[i] < a.specs[i]) return false;
    }
    return false;
  }
  friend bool operator==(const TripleContact& a, const TripleContact& b) {
    return a.specs == b.specs;
  }
};

enum class GPMode { Pairwise, Full };

namespace detail {

struct SurfaceSet {
  std::vector<ContactSpec> specs;
  std::vector<std::optional<ContactSurface>> surfaces;  // nullopt: degenerate
};

inline SurfaceSet build_surfaces(const RobotShape& robot, const Scene& scene) {
  SurfaceSet out;
  out.specs = enumerate_specs(robot, scene);
  out.surfaces.reserve(out.specs.size());
  for (auto& sp : out.specs) {
    try {
      out.surfaces.push_back(contact_surface(robot, scene, sp));
    } catch (const DegenerateSurface&) {
      out.surfaces.push_back(std::nullopt);
    }
  }
  return out;
}

// Shared pair-then-third scan over all surface triples. For each surface pair
// with a transversal plane intersection, the realized chord of the line is
// intersected with every later surface. Emits realized free triples through
// `emit`; when `gp` is nonnull, also reports concurrency and boundary
// degeneracies (triples sharing a line, boundary-touching solutions, and a
// fourth plane through a realized vertex).
template <class Emit>
inline void scan_triples(const SurfaceSet& ss, const FreeSpace& fs, size_t pair_lo,
                         size_t pair_hi, Emit&& emit,
                         std::vector<GPViolation>* gp = nullptr) {
  const auto& S = ss.surfaces;
  size_t N = S.size();
  size_t pair = 0;
  for (size_t i = 0; i + 1 < N; ++i) {
    if (!S[i]) { continue; }
    for (size_t j = i + 1; j < N; ++j) {
      if (!S[j]) continue;
      size_t p = pair++;
      if (p < pair_lo || p >= pair_hi) continue;
      if (!S[i]->box.overlaps(S[j]->box)) continue;
      if (cross(S[i]->plane.n, S[j]->plane.n) == V3{0, 0, 0}) continue;
      auto [P, L] = plane_line(S[i]->plane, S[j]->plane);
      auto I1 = clip_line_to_polygon(P, L, S[i]->polygon, S[i]->plane.n);
      if (!I1) continue;
      auto I2 = clip_line_to_polygon(P, L, S[j]->polygon, S[j]->plane.n);
      if (!I2) continue;
      Rat t0 = std::max(I1->first, I2->first);
      Rat t1 = std::min(I1->second, I2->second);
      if (t0 > t1) continue;
      P3 e0 = P + t0 * L, e1 = P + t1 * L;
      AABB cbox = segment_box(e0, e1);
      for (size_t k = j + 1; k < N; ++k) {
        if (!S[k]) continue;
        if (!cbox.overlaps(S[k]->box)) continue;
        Rat den = dot(S[k]->plane.n, L);
        if (den == 0) {
          if (gp && dot(S[k]->plane.n, P - P3{0, 0, 0}) == S[k]->plane.c) {
            // Third plane contains the whole pair line.
            auto I3 = clip_line_to_polygon(P, L, S[k]->polygon, S[k]->plane.n);
            if (I3 && std::max(t0, I3->first) <= std::min(t1, I3->second))
              gp->push_back({GPCode::V6,
                             "three contact surfaces share a line segment"});
          }
          continue;
        }
        Rat t = (S[k]->plane.c - dot(S[k]->plane.n, P - P3{0, 0, 0})) / den;
        if (t < t0 || t > t1) continue;
        P3 v = P + t * L;
        auto lk = locate_in_convex_polygon3(S[k]->polygon, S[k]->plane.n, v);
        if (lk.loc == PolyLoc::Outside) continue;
        bool free = is_free(fs, v);
        if (gp) {
          auto li = locate_in_convex_polygon3(S[i]->polygon, S[i]->plane.n, v);
          auto lj = locate_in_convex_polygon3(S[j]->polygon, S[j]->plane.n, v);
          if (li.loc != PolyLoc::Inside || lj.loc != PolyLoc::Inside ||
              lk.loc != PolyLoc::Inside) {
            std::ostringstream os;
            os << "triple solution on a surface polygon boundary at ("
               << rat_str(v.x) << ", " << rat_str(v.y) << ", " << rat_str(v.z) << ")";
            gp->push_back({GPCode::V7, os.str()});
          }
          if (free) {
            for (size_t m2 = 0; m2 < N; ++m2) {
              if (m2 == i || m2 == j || m2 == k || !S[m2]) continue;
              if (dot(S[m2]->plane.n, v - P3{0, 0, 0}) == S[m2]->plane.c) {
                std::ostringstream os;
                os << "four contact planes concurrent at (" << rat_str(v.x) << ", "
                   << rat_str(v.y) << ", " << rat_str(v.z) << ")";
                gp->push_back({GPCode::V6, os.str()});
              }
            }
          }
        }
        if (free) emit(i, j, k, v);
      }
    }
  }
}

inline size_t count_pairs(const SurfaceSet& ss) {
  size_t live = 0;
  for (size_t i = 0; i + 1 < ss.surfaces.size(); ++i) {
    if (!ss.surfaces[i]) continue;
    for (size_t j = i + 1; j < ss.surfaces.size(); ++j)
      if (ss.surfaces[j]) ++live;
  }
  return live;
}

}  // namespace detail

// All realized free generic triples, canonically sorted. `threads` partitions
// the surface-pair range; the output is independent of the partition.
inline std::vector<TripleContact> brute_force_triples(const RobotShape& robot,
                                                      const Scene& scene,
                                                      int threads = 1) {
  detail::SurfaceSet ss = detail::build_surfaces(robot, scene);
  FreeSpace fs = make_free_space(robot, scene);
  size_t pairs = detail::count_pairs(ss);
  auto run = [&](size_t lo, size_t hi, std::vector<TripleContact>& out) {
    detail::scan_triples(ss, fs, lo, hi, [&](size_t i, size_t j, size_t k, const P3& v) {
      std::array<ContactSpec, 3> specs{ss.specs[i], ss.specs[j], ss.specs[k]};
      std::sort(specs.begin(), specs.end());
      out.push_back({specs, v, classify_triple(robot, specs)});
    });
  };
  std::vector<TripleContact> all;
  if (threads <= 1 || pairs < 2) {
    run(0, pairs, all);
  } else {
    size_t nt = std::min<size_t>(threads, pairs);
    std::vector<std::vector<TripleContact>> parts(nt);
    std::vector<std::thread> pool;
    for (size_t t = 0; t < nt; ++t) {
      size_t lo = pairs * t / nt, hi = pairs * (t + 1) / nt;
      pool.emplace_back([&, t, lo, hi] { run(lo, hi, parts[t]); });
    }
    for (auto& th : pool) th.join();
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  }
  std::sort(all.begin(), all.end());
  return all;
}

inline std::map<ClassTag, long> count_by_class(const std::vector<TripleContact>& ts) {
  std::map<ClassTag, long> out;
  for (auto& t : ts) ++out[t.tag];
  return out;
}

// --- general position, full mode ---------------------------------------------------

// Pairwise feature degeneracies plus arrangement-level degeneracies found by
// scanning all surface pairs and triples: coplanar surfaces, surface triples
// sharing a line, solutions on polygon boundaries, and concurrent fourth planes.
inline std::vector<GPViolation> check_general_position(const RobotShape& robot,
                                                       const Scene& scene,
                                                       GPMode mode = GPMode::Pairwise) {
  std::vector<GPViolation> out = check_general_position_pairwise(robot, scene);
  if (mode == GPMode::Pairwise) return out;
  detail::SurfaceSet ss = detail::build_surfaces(robot, scene);
  FreeSpace fs = make_free_space(robot, scene);
  for (size_t i = 0; i + 1 < ss.surfaces.size(); ++i) {
    if (!ss.surfaces[i]) continue;
    for (size_t j = i + 1; j < ss.surfaces.size(); ++j) {
      if (!ss.surfaces[j]) continue;
      if (ss.surfaces[i]->plane.unoriented() == ss.surfaces[j]->plane.unoriented())
        out.push_back({GPCode::V6, "two contact surfaces are coplanar"});
    }
  }
  detail::scan_triples(ss, fs, 0, detail::count_pairs(ss),
                       [](size_t, size_t, size_t, const P3&) {}, &out);
  return out;
}

// --- third contacts along a pair's line of movement --------------------------------

namespace detail {

// Core of third_contacts_on_line working over prebuilt surfaces and free
// space, so pipelines iterating many pairs pay the setup once.
inline std::vector<ContactSpec> third_contacts_on_line(
    const SurfaceSet& ss, const FreeSpace& fs, const ContactSurface& s1,
    const ContactSurface& s2, const ContactSpec& O1, const ContactSpec& O2,
    bool interior_only) {
  if (cross(s1.plane.n, s2.plane.n) == V3{0, 0, 0})
    throw NoLine("surface planes are parallel");
  auto [P, L] = plane_line(s1.plane, s2.plane);
  auto I1 = clip_line_to_polygon(P, L, s1.polygon, s1.plane.n);
  if (!I1) return {};
  auto I2 = clip_line_to_polygon(P, L, s2.polygon, s2.plane.n);
  if (!I2) return {};
  Rat t0 = std::max(I1->first, I2->first);
  Rat t1 = std::min(I1->second, I2->second);
  if (t0 > t1) return {};
  std::vector<ContactSpec> out;
  for (size_t i = 0; i < ss.specs.size(); ++i) {
    const ContactSpec& sp = ss.specs[i];
    if (sp == O1 || sp == O2) continue;
    if (!ss.surfaces[i]) continue;
    const ContactSurface& s3 = *ss.surfaces[i];
    Rat den = dot(s3.plane.n, L);
    if (den == 0) continue;
    Rat t = (s3.plane.c - dot(s3.plane.n, P - P3{0, 0, 0})) / den;
    if (t < t0 || t > t1) continue;
    P3 v = P + t * L;
    auto loc = locate_in_convex_polygon3(s3.polygon, s3.plane.n, v).loc;
    if (interior_only ? loc != PolyLoc::Inside : loc == PolyLoc::Outside) continue;
    if (!is_free(fs, v)) continue;
    out.push_back(sp);
  }
  return out;
}

}  // namespace detail

// For a pair whose surfaces intersect in a line, find every other generic spec
// whose surface crosses the realized chord of that line at a free placement.
// Membership on the candidate surface is relative-interior by default: a
// candidate whose crossing lies on its polygon boundary is a slide-off
// degeneracy, not a blocking contact. Pass interior_only = false to keep such
// boundary candidates too.
inline std::vector<ContactSpec> third_contacts_on_line(const RobotShape& robot,
                                                       const Scene& scene,
                                                       const ContactSpec& O1,
                                                       const ContactSpec& O2,
                                                       bool interior_only = true) {
  ContactSurface s1 = contact_surface(robot, scene, O1);
  ContactSurface s2 = contact_surface(robot, scene, O2);
  detail::SurfaceSet ss = detail::build_surfaces(robot, scene);
  FreeSpace fs = make_free_space(robot, scene);
  return detail::third_contacts_on_line(ss, fs, s1, s2, O1, O2, interior_only);
}

// --- workspace re-verification ------------------------------------------------------

namespace detail {

// Closed intersection tests between translated robot features and obstacle
// features, carried out directly on workspace coordinates.
inline bool segments_meet(const P3& a, const P3& b, const P3& c, const P3& d) {
  V3 u = b - a, w = d - c;
  V3 nx = cross(u, w);
  if (nx == V3{0, 0, 0}) {
    if (cross(c - a, u) != V3{0, 0, 0}) return false;
    Rat uu = dot(u, u);
    Rat t0 = dot(c - a, u) / uu;
    Rat t1 = dot(d - a, u) / uu;
    if (t0 > t1) std::swap(t0, t1);
    return std::max(t0, Rat(0)) <= std::min(t1, Rat(1));
  }
  if (dot(c - a, nx) != 0) return false;
  Rat nn = dot(nx, nx);
  Rat t = det3(c - a, w, nx) / nn;
  Rat s = det3(c - a, u, nx) / nn;
  return t >= 0 && t <= 1 && s >= 0 && s <= 1;
}

inline bool point_meets_polygon(const P3& p, const std::vector<P3>& poly, const V3& n,
                                const Rat& c) {
  if (dot(n, p - P3{0, 0, 0}) != c) return false;
  return locate_in_convex_polygon3(poly, n, p).loc != PolyLoc::Outside;
}

}  // namespace detail

// Check, in workspace coordinates, that each translated robot feature meets
// its obstacle feature at the given placement.
inline bool verify_triple_workspace(const RobotShape& robot, const Scene& scene,
                                    const TripleContact& tc) {
  const V3 v = tc.placement - P3{0, 0, 0};
  for (auto& sp : tc.specs) {
    const ConvexBody& C = scene.obstacles[sp.obstacle].body;
    if (sp.robot.dim == 0) {
      P3 p = robot.body.verts[sp.robot.index] + v;
      std::vector<P3> poly;
      for (int vi : C.facets[sp.feature.index]) poly.push_back(C.verts[vi]);
      const Plane& pl = C.planes[sp.feature.index];
      if (!detail::point_meets_polygon(p, poly, pl.n, pl.c)) return false;
    } else if (sp.robot.dim == 1) {
      auto [i, j] = robot.body.edges[sp.robot.index];
      auto [gi, gj] = C.edges[sp.feature.index];
      if (!detail::segments_meet(robot.body.verts[i] + v, robot.body.verts[j] + v,
                                 C.verts[gi], C.verts[gj]))
        return false;
    } else {
      P3 w = C.verts[sp.feature.index];
      std::vector<P3> poly;
      for (int vi : robot.body.facets[sp.robot.index])
        poly.push_back(robot.body.verts[vi] + v);
      const Plane& pl = robot.body.planes[sp.robot.index];
      Rat c = pl.c + dot(pl.n, v);
      if (!detail::point_meets_polygon(w, poly, pl.n, c)) return false;
    }
  }
  return true;
}

}  // namespace freespace
