#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include "freespace/geom.hpp"

namespace freespace {

// Canonical convex body of affine dimension 0..3.
//  - verts: extreme points only, lex-sorted.
//  - facets/planes: dim 3: maximal facet cycles, ccw seen from outside, each
//    rotated to start at its smallest vertex index, sorted by plane; outward
//    planes. dim 2: one cycle, ccw w.r.t. its lex-positive plane normal.
//  - edges: (i,j) with i<j, sorted. dim 1 has the single edge, dim 0 none.
// Bodies of dimension < 3 have empty interior.
struct ConvexBody {
  int dim = -1;
  std::vector<P3> verts;
  std::vector<std::vector<int>> facets;
  std::vector<Plane> planes;
  std::vector<std::pair<int, int>> edges;
  AABB box;

  bool operator==(const ConvexBody& o) const {
    return dim == o.dim && verts == o.verts && facets == o.facets && planes == o.planes;
  }
};

enum class Loc { Outside, Boundary, Interior };

struct BodyLocate {
  Loc loc;
  int feature_dim = -1;  // 0 vertex, 1 edge, 2 facet (valid when Boundary)
  int index = -1;        // into verts / edges / facets
};

namespace detail {

// Strict 2D convex hull (Andrew); returns ccw cycle of indices into pts,
// collinear and duplicate points dropped.
inline std::vector<int> hull2d_strict(const std::vector<std::pair<P2, int>>& pts_in) {
  std::vector<std::pair<P2, int>> pts = pts_in;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return lex_less(a.first, b.first) || (a.first == b.first && a.second < b.second);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) { return a.first == b.first; }),
            pts.end());
  int n = static_cast<int>(pts.size());
  if (n == 1) return {pts[0].second};
  auto run = [&](bool rev) {
    std::vector<int> out;
    auto at = [&](int k) { return rev ? n - 1 - k : k; };
    for (int k = 0; k < n; ++k) {
      int i = at(k);
      while (out.size() >= 2 &&
             orient2d(pts[out[out.size() - 2]].first, pts[out[out.size() - 1]].first,
                      pts[i].first) <= 0)
        out.pop_back();
      out.push_back(i);
    }
    return out;
  };
  std::vector<int> lower = run(false);
  std::vector<int> upper = run(true);
  std::vector<int> cyc;
  for (size_t k = 0; k + 1 < lower.size(); ++k) cyc.push_back(pts[lower[k]].second);
  for (size_t k = 0; k + 1 < upper.size(); ++k) cyc.push_back(pts[upper[k]].second);
  if (cyc.empty()) cyc.push_back(pts[0].second);  // all points equal handled above; degenerate
  return cyc;
}

// Project plane points to 2D so that ccw in 2D is ccw about n.
inline std::vector<std::pair<P2, int>> project_to_plane2(const std::vector<P3>& pts,
                                                         const std::vector<int>& ids,
                                                         const V3& n) {
  int k = 0;
  Rat best = rat_abs(n.x);
  if (rat_abs(n.y) > best) {
    best = rat_abs(n.y);
    k = 1;
  }
  if (rat_abs(n.z) > best) k = 2;
  int u = (k + 1) % 3, v = (k + 2) % 3;
  if (sgn(n[k]) < 0) std::swap(u, v);
  std::vector<std::pair<P2, int>> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back({P2{pts[id][u], pts[id][v]}, id});
  return out;
}

inline V3 newell_normal(const std::vector<P3>& cycle) {
  V3 n{0, 0, 0};
  const P3& o = cycle[0];
  for (size_t i = 1; i + 1 < cycle.size(); ++i)
    n = n + cross(cycle[i] - o, cycle[i + 1] - o);
  return n;
}

struct Tri {
  int a, b, c;
  Plane pl;
  bool alive = true;
};

inline Plane tri_plane(const std::vector<P3>& pts, int a, int b, int c) {
  return plane_through(pts[a], pts[b], pts[c]);
}

}  // namespace detail

// Exact convex hull of an arbitrary point set; handles all affine dimensions.
inline ConvexBody hull(std::vector<P3> pts) {
  if (pts.empty()) throw std::invalid_argument("hull of empty point set");
  std::sort(pts.begin(), pts.end(), [](const P3& a, const P3& b) { return lex_less(a, b); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  int n = static_cast<int>(pts.size());

  ConvexBody body;

  // Affine dimension probes.
  int i1 = -1, i2 = -1, i3 = -1;
  for (int i = 1; i < n && i1 < 0; ++i)
    if (!(pts[i] == pts[0])) i1 = i;
  if (i1 >= 0)
    for (int i = 1; i < n && i2 < 0; ++i)
      if (!parallel(pts[i1] - pts[0], pts[i] - pts[0])) i2 = i;
  if (i2 >= 0)
    for (int i = 1; i < n && i3 < 0; ++i)
      if (orient3d(pts[0], pts[i1], pts[i2], pts[i]) != 0) i3 = i;

  if (i1 < 0) {
    body.dim = 0;
    body.verts = {pts[0]};
    body.box = bbox_of(body.verts);
    return body;
  }
  if (i2 < 0) {
    body.dim = 1;
    V3 d = pts[i1] - pts[0];
    P3 lo = pts[0], hi = pts[0];
    Rat tlo(0), thi(0);
    for (auto& p : pts) {
      Rat t = dot(p - pts[0], d);
      if (t < tlo) {
        tlo = t;
        lo = p;
      }
      if (t > thi) {
        thi = t;
        hi = p;
      }
    }
    body.verts = {lo, hi};
    if (lex_less(hi, lo)) std::swap(body.verts[0], body.verts[1]);
    body.edges = {{0, 1}};
    body.box = bbox_of(body.verts);
    return body;
  }
  if (i3 < 0) {
    body.dim = 2;
    Plane pl = plane_through(pts[0], pts[i1], pts[i2]).unoriented();
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i;
    auto proj = detail::project_to_plane2(pts, ids, pl.n);
    auto cyc = detail::hull2d_strict(proj);
    // Re-index: keep only cycle vertices, lex-sorted.
    std::vector<P3> vs;
    for (int id : cyc) vs.push_back(pts[id]);
    std::vector<P3> sorted = vs;
    std::sort(sorted.begin(), sorted.end(),
              [](const P3& a, const P3& b) { return lex_less(a, b); });
    body.verts = sorted;
    std::vector<int> cycle;
    for (auto& p : vs)
      cycle.push_back(static_cast<int>(
          std::lower_bound(sorted.begin(), sorted.end(), p,
                           [](const P3& a, const P3& b) { return lex_less(a, b); }) -
          sorted.begin()));
    // hull2d_strict is ccw about pl.n already; rotate to min index.
    auto mn = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), mn, cycle.end());
    body.facets = {cycle};
    body.planes = {pl};
    int m = static_cast<int>(cycle.size());
    std::set<std::pair<int, int>> es;
    for (int i = 0; i < m; ++i) {
      int a = cycle[i], b = cycle[(i + 1) % m];
      es.insert({std::min(a, b), std::max(a, b)});
    }
    body.edges.assign(es.begin(), es.end());
    body.box = bbox_of(body.verts);
    return body;
  }

  // Full-dimensional: incremental hull over triangles.
  body.dim = 3;
  std::vector<detail::Tri> tris;
  {
    int a = 0, b = i1, c = i2, d = i3;
    auto add_face = [&](int x, int y, int z, int w) {
      if (orient3d(pts[x], pts[y], pts[z], pts[w]) > 0) std::swap(y, z);
      tris.push_back({x, y, z, detail::tri_plane(pts, x, y, z)});
    };
    add_face(a, b, c, d);
    add_face(a, b, d, c);
    add_face(a, c, d, b);
    add_face(b, c, d, a);
  }

  std::vector<bool> used(n, false);
  used[0] = used[i1] = used[i2] = used[i3] = true;

  for (int p = 0; p < n; ++p) {
    if (used[p]) continue;
    used[p] = true;
    // Side of each alive face.
    std::vector<int> side(tris.size(), 0);
    bool any_strict = false;
    for (size_t f = 0; f < tris.size(); ++f) {
      if (!tris[f].alive) continue;
      side[f] = tris[f].pl.side(pts[p]);
      if (side[f] > 0) any_strict = true;
    }
    if (!any_strict) continue;  // inside or on the current hull: not extreme

    // Adjacency over alive faces via directed edges.
    std::map<std::pair<int, int>, int> owner;  // directed edge -> face
    for (size_t f = 0; f < tris.size(); ++f) {
      if (!tris[f].alive) continue;
      int v[3] = {tris[f].a, tris[f].b, tris[f].c};
      for (int e = 0; e < 3; ++e) owner[{v[e], v[(e + 1) % 3]}] = static_cast<int>(f);
    }
    auto neighbor = [&](int u, int v) {
      auto it = owner.find({v, u});
      return it == owner.end() ? -1 : it->second;
    };

    // Flood visible set: strict seeds, expand through faces containing p.
    std::vector<char> vis(tris.size(), 0);
    std::vector<int> stack;
    for (size_t f = 0; f < tris.size(); ++f)
      if (tris[f].alive && side[f] > 0) {
        vis[f] = 1;
        stack.push_back(static_cast<int>(f));
      }
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      int v[3] = {tris[f].a, tris[f].b, tris[f].c};
      for (int e = 0; e < 3; ++e) {
        int g = neighbor(v[e], v[(e + 1) % 3]);
        if (g >= 0 && !vis[g] && side[g] == 0) {
          vis[g] = 1;
          stack.push_back(g);
        }
      }
    }

    // Horizon edges, ordered as in the visible face.
    std::vector<std::pair<int, int>> horizon;
    for (size_t f = 0; f < tris.size(); ++f) {
      if (!tris[f].alive || !vis[f]) continue;
      int v[3] = {tris[f].a, tris[f].b, tris[f].c};
      for (int e = 0; e < 3; ++e) {
        int g = neighbor(v[e], v[(e + 1) % 3]);
        if (g < 0 || !vis[g]) horizon.push_back({v[e], v[(e + 1) % 3]});
      }
    }
    for (size_t f = 0; f < tris.size(); ++f)
      if (vis[f]) tris[f].alive = false;
    for (auto& [u, v] : horizon)
      tris.push_back({u, v, p, detail::tri_plane(pts, u, v, p)});
  }

  // Group alive triangles by oriented plane; merge into maximal facets.
  std::map<std::array<Rat, 4>, std::pair<Plane, std::set<int>>> groups;
  for (auto& t : tris) {
    if (!t.alive) continue;
    std::array<Rat, 4> key = {t.pl.n.x, t.pl.n.y, t.pl.n.z, t.pl.c};
    auto& g = groups[key];
    g.first = t.pl;
    g.second.insert(t.a);
    g.second.insert(t.b);
    g.second.insert(t.c);
  }

  struct RawFacet {
    Plane pl;
    std::vector<int> cyc;  // indices into pts
  };
  std::vector<RawFacet> raw;
  std::set<int> vert_ids;
  for (auto& [key, g] : groups) {
    std::vector<int> ids(g.second.begin(), g.second.end());
    auto proj = detail::project_to_plane2(pts, ids, g.first.n);
    auto cyc = detail::hull2d_strict(proj);
    if (cyc.size() < 3) throw std::logic_error("degenerate facet in hull");
    std::vector<P3> cpts;
    for (int id : cyc) cpts.push_back(pts[id]);
    if (dot(detail::newell_normal(cpts), g.first.n) < 0)
      std::reverse(cyc.begin(), cyc.end());
    raw.push_back({g.first, cyc});
    for (int id : cyc) vert_ids.insert(id);
  }

  // Final vertex array: lex order (pts already lex-sorted so ids are ordered).
  std::vector<int> idlist(vert_ids.begin(), vert_ids.end());
  std::map<int, int> remap;
  for (size_t i = 0; i < idlist.size(); ++i) {
    body.verts.push_back(pts[idlist[i]]);
    remap[idlist[i]] = static_cast<int>(i);
  }
  std::sort(raw.begin(), raw.end(),
            [](const RawFacet& a, const RawFacet& b) { return plane_less(a.pl, b.pl); });
  std::set<std::pair<int, int>> es;
  for (auto& f : raw) {
    std::vector<int> cyc;
    for (int id : f.cyc) cyc.push_back(remap[id]);
    auto mn = std::min_element(cyc.begin(), cyc.end());
    std::rotate(cyc.begin(), mn, cyc.end());
    int m = static_cast<int>(cyc.size());
    for (int i = 0; i < m; ++i) {
      int a = cyc[i], b = cyc[(i + 1) % m];
      es.insert({std::min(a, b), std::max(a, b)});
    }
    body.facets.push_back(cyc);
    body.planes.push_back(f.pl);
  }
  body.edges.assign(es.begin(), es.end());
  body.box = bbox_of(body.verts);

  // Structural validation.
  long V = static_cast<long>(body.verts.size());
  long E = static_cast<long>(body.edges.size());
  long F = static_cast<long>(body.facets.size());
  if (V - E + F != 2) throw std::logic_error("hull failed Euler check");
  for (size_t f = 0; f < body.facets.size(); ++f) {
    for (size_t v = 0; v < body.verts.size(); ++v) {
      int s = body.planes[f].side(body.verts[v]);
      if (s > 0) throw std::logic_error("hull facet plane not supporting");
    }
    for (int id : body.facets[f])
      if (body.planes[f].side(body.verts[id]) != 0)
        throw std::logic_error("hull facet cycle off its plane");
  }
  return body;
}

inline ConvexBody minkowski(const ConvexBody& a, const ConvexBody& b) {
  std::vector<P3> sums;
  sums.reserve(a.verts.size() * b.verts.size());
  for (auto& p : a.verts)
    for (auto& q : b.verts) sums.push_back(p + q);
  return hull(std::move(sums));
}

inline ConvexBody negated(const ConvexBody& a) {
  std::vector<P3> pts;
  pts.reserve(a.verts.size());
  for (auto& p : a.verts) pts.push_back(-p);
  return hull(std::move(pts));
}

inline ConvexBody translated(const ConvexBody& a, const V3& t) {
  ConvexBody b = a;
  for (auto& p : b.verts) p = p + t;
  for (auto& pl : b.planes) pl.c += dot(pl.n, t);
  b.box = bbox_of(b.verts);
  return b;
}

inline int edge_index(const ConvexBody& b, int i, int j) {
  auto key = std::make_pair(std::min(i, j), std::max(i, j));
  auto it = std::lower_bound(b.edges.begin(), b.edges.end(), key);
  if (it == b.edges.end() || *it != key) return -1;
  return static_cast<int>(it - b.edges.begin());
}

// Exact point location against a convex body of any dimension. Bodies of
// dimension < 3 never report Interior.
inline BodyLocate locate(const ConvexBody& b, const P3& p) {
  if (b.dim == 0) {
    if (p == b.verts[0]) return {Loc::Boundary, 0, 0};
    return {Loc::Outside};
  }
  if (b.dim == 1) {
    const P3 &a = b.verts[0], &c = b.verts[1];
    if (p == a) return {Loc::Boundary, 0, 0};
    if (p == c) return {Loc::Boundary, 0, 1};
    V3 d = c - a;
    if (!parallel(d, p - a)) return {Loc::Outside};
    Rat t = dot(p - a, d) / dot(d, d);
    if (t > 0 && t < 1) return {Loc::Boundary, 1, 0};
    return {Loc::Outside};
  }
  if (b.dim == 2) {
    const Plane& pl = b.planes[0];
    if (pl.side(p) != 0) return {Loc::Outside};
    std::vector<P3> cyc;
    for (int id : b.facets[0]) cyc.push_back(b.verts[id]);
    auto r = locate_in_convex_polygon3(cyc, pl.n, p);
    switch (r.loc) {
      case PolyLoc::Outside:
        return {Loc::Outside};
      case PolyLoc::Inside:
        return {Loc::Boundary, 2, 0};
      case PolyLoc::OnVertex: {
        int vid = b.facets[0][r.index];
        return {Loc::Boundary, 0, vid};
      }
      case PolyLoc::OnEdge: {
        int m = static_cast<int>(b.facets[0].size());
        int a = b.facets[0][r.index], c = b.facets[0][(r.index + 1) % m];
        return {Loc::Boundary, 1, edge_index(b, a, c)};
      }
    }
    return {Loc::Outside};
  }

  std::vector<int> zeros;
  for (size_t f = 0; f < b.planes.size(); ++f) {
    int s = b.planes[f].side(p);
    if (s > 0) return {Loc::Outside};
    if (s == 0) zeros.push_back(static_cast<int>(f));
  }
  if (zeros.empty()) return {Loc::Interior};
  if (zeros.size() == 1) return {Loc::Boundary, 2, zeros[0]};
  if (zeros.size() == 2) {
    // Shared edge of the two facets.
    std::set<int> s0(b.facets[zeros[0]].begin(), b.facets[zeros[0]].end());
    int u = -1, v = -1;
    for (int id : b.facets[zeros[1]])
      if (s0.count(id)) (u < 0 ? u : v) = id;
    if (u < 0 || v < 0) throw std::logic_error("locate: two planes without shared edge");
    return {Loc::Boundary, 1, edge_index(b, u, v)};
  }
  for (size_t v = 0; v < b.verts.size(); ++v)
    if (b.verts[v] == p) return {Loc::Boundary, 0, static_cast<int>(v)};
  throw std::logic_error("locate: vertex-degree boundary point is not a vertex");
}

inline bool contains(const ConvexBody& b, const P3& p) {
  return locate(b, p).loc != Loc::Outside;
}
inline bool interior_contains(const ConvexBody& b, const P3& p) {
  return locate(b, p).loc == Loc::Interior;
}

}  // namespace freespace
