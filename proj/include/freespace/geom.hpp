#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "freespace/rational.hpp"

namespace freespace {

struct P2 {
  Rat x, y;
  P2() : x(0), y(0) {}
  P2(Rat x_, Rat y_) : x(std::move(x_)), y(std::move(y_)) {}
  bool operator==(const P2& o) const { return x == o.x && y == o.y; }
  bool operator!=(const P2& o) const { return !(*this == o); }
};
using V2 = P2;

inline P2 operator+(const P2& a, const P2& b) { return {a.x + b.x, a.y + b.y}; }
inline P2 operator-(const P2& a, const P2& b) { return {a.x - b.x, a.y - b.y}; }
inline P2 operator*(const Rat& s, const P2& a) { return {s * a.x, s * a.y}; }
inline Rat dot(const V2& a, const V2& b) { return a.x * b.x + a.y * b.y; }
inline Rat cross(const V2& a, const V2& b) { return a.x * b.y - a.y * b.x; }

inline bool lex_less(const P2& a, const P2& b) {
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

struct P3 {
  Rat x, y, z;
  P3() : x(0), y(0), z(0) {}
  P3(Rat x_, Rat y_, Rat z_) : x(std::move(x_)), y(std::move(y_)), z(std::move(z_)) {}
  bool operator==(const P3& o) const { return x == o.x && y == o.y && z == o.z; }
  bool operator!=(const P3& o) const { return !(*this == o); }
  const Rat& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  Rat& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
};
using V3 = P3;

inline P3 operator+(const P3& a, const P3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline P3 operator-(const P3& a, const P3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline P3 operator*(const Rat& s, const P3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline P3 operator-(const P3& a) { return {-a.x, -a.y, -a.z}; }
inline Rat dot(const V3& a, const V3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline V3 cross(const V3& a, const V3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline bool is_zero(const V3& v) { return v.x == 0 && v.y == 0 && v.z == 0; }

inline bool lex_less(const P3& a, const P3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

// Sign of the 2D orientation of (a,b,c): +1 counterclockwise, -1 clockwise.
inline int orient2d(const P2& a, const P2& b, const P2& c) {
  return sgn(cross(b - a, c - a));
}

inline Rat det3(const V3& a, const V3& b, const V3& c) {
  return a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) +
         a.z * (b.x * c.y - b.y * c.x);
}

// Sign of det[b-a, c-a, d-a]: +1 when d is on the positive side of the
// oriented plane through a,b,c (right-hand rule).
inline int orient3d(const P3& a, const P3& b, const P3& c, const P3& d) {
  return sgn(det3(b - a, c - a, d - a));
}

inline bool parallel(const V3& a, const V3& b) { return is_zero(cross(a, b)); }

// --- 2D segments ------------------------------------------------------------

// Endpoints are distinct unless the segment is explicitly degenerate
// (a == b), which some slice operations produce at range boundaries.
struct Seg2 {
  P2 a, b;
  Seg2() = default;
  Seg2(P2 a_, P2 b_) : a(std::move(a_)), b(std::move(b_)) {}
  bool degenerate() const { return a == b; }
};

struct Seg2Empty {};
struct Seg2Point {
  P2 p;
};
struct Seg2Overlap {
  Seg2 s;
};
using Seg2Isect = std::variant<Seg2Empty, Seg2Point, Seg2Overlap>;

inline bool point_on_seg2(const P2& p, const Seg2& s) {
  if (orient2d(s.a, s.b, p) != 0) return false;
  Rat lox = std::min(s.a.x, s.b.x), hix = std::max(s.a.x, s.b.x);
  Rat loy = std::min(s.a.y, s.b.y), hiy = std::max(s.a.y, s.b.y);
  return p.x >= lox && p.x <= hix && p.y >= loy && p.y <= hiy;
}

// Exact segment intersection with full classification. Endpoint touches
// report Point; collinear overlaps report Overlap (Point when the overlap
// degenerates to a single point).
inline Seg2Isect seg2_intersect(const Seg2& s, const Seg2& t) {
  V2 d1 = s.b - s.a, d2 = t.b - t.a;
  Rat denom = cross(d1, d2);
  if (denom != 0) {
    // Lines cross at a unique point; check it lies on both segments.
    Rat tnum = cross(t.a - s.a, d2);
    Rat unum = cross(t.a - s.a, d1);
    Rat tt = tnum / denom, uu = unum / denom;
    if (tt < 0 || tt > 1 || uu < 0 || uu > 1) return Seg2Empty{};
    return Seg2Point{s.a + tt * d1};
  }
  // Parallel. Distinct lines: empty.
  if (cross(t.a - s.a, d1) != 0 || (s.degenerate() && t.degenerate() && !(s.a == t.a)))
    return Seg2Empty{};
  if (s.degenerate() && t.degenerate())
    return s.a == t.a ? Seg2Isect(Seg2Point{s.a}) : Seg2Isect(Seg2Empty{});
  if (s.degenerate())
    return point_on_seg2(s.a, t) ? Seg2Isect(Seg2Point{s.a}) : Seg2Isect(Seg2Empty{});
  if (t.degenerate())
    return point_on_seg2(t.a, s) ? Seg2Isect(Seg2Point{t.a}) : Seg2Isect(Seg2Empty{});
  // Collinear: project onto the dominant axis of d1.
  bool usex = rat_abs(d1.x) >= rat_abs(d1.y);
  auto coord = [&](const P2& p) { return usex ? p.x : p.y; };
  Rat s0 = coord(s.a), s1 = coord(s.b);
  if (s0 > s1) std::swap(s0, s1);
  Rat t0 = coord(t.a), t1 = coord(t.b);
  if (t0 > t1) std::swap(t0, t1);
  Rat lo = std::max(s0, t0), hi = std::min(s1, t1);
  if (lo > hi) return Seg2Empty{};
  auto at = [&](const Rat& c) -> P2 {
    Rat u = (c - coord(s.a)) / (coord(s.b) - coord(s.a));
    return s.a + u * d1;
  };
  if (lo == hi) return Seg2Point{at(lo)};
  return Seg2Overlap{Seg2(at(lo), at(hi))};
}

// y-value of a nonvertical segment's supporting line at x.
inline Rat seg2_value_at(const Seg2& s, const Rat& x) {
  return s.a.y + (x - s.a.x) * (s.b.y - s.a.y) / (s.b.x - s.a.x);
}

// --- planes -----------------------------------------------------------------

// Oriented plane {p : dot(n,p) == c}. Canonical form scales (n,c) by a
// positive rational so n becomes a primitive integer vector; the scale is
// positive, so orientation is preserved.
struct Plane {
  V3 n;
  Rat c;

  void canonicalize_scale() {
    Int l = rat_den(n.x);
    l = l / boost::multiprecision::gcd(l, rat_den(n.y)) * rat_den(n.y);
    l = l / boost::multiprecision::gcd(l, rat_den(n.z)) * rat_den(n.z);
    Rat m(l);
    V3 ni = m * n;
    Int g = boost::multiprecision::gcd(boost::multiprecision::gcd(rat_num(ni.x), rat_num(ni.y)),
                                       rat_num(ni.z));
    if (g == 0) g = 1;
    if (g < 0) g = -g;
    Rat scale = m / Rat(g);
    n = scale * n;
    c = scale * c;
  }

  // Orientation-insensitive canonical key (first nonzero component positive).
  Plane unoriented() const {
    Plane p = *this;
    p.canonicalize_scale();
    int s = sgn(p.n.x) != 0 ? sgn(p.n.x) : (sgn(p.n.y) != 0 ? sgn(p.n.y) : sgn(p.n.z));
    if (s < 0) {
      p.n = -p.n;
      p.c = -p.c;
    }
    return p;
  }

  Rat eval(const P3& p) const { return dot(n, p) - c; }
  int side(const P3& p) const { return sgn(eval(p)); }

  bool operator==(const Plane& o) const { return n == o.n && c == o.c; }
  bool operator!=(const Plane& o) const { return !(*this == o); }
};

inline Plane plane_through(const P3& a, const P3& b, const P3& c) {
  V3 n = cross(b - a, c - a);
  Plane p{n, dot(n, a)};
  p.canonicalize_scale();
  return p;
}

inline bool plane_less(const Plane& a, const Plane& b) {
  auto cmp = [](const Rat& x, const Rat& y) { return x < y ? -1 : (x > y ? 1 : 0); };
  int r = cmp(a.n.x, b.n.x);
  if (r) return r < 0;
  r = cmp(a.n.y, b.n.y);
  if (r) return r < 0;
  r = cmp(a.n.z, b.n.z);
  if (r) return r < 0;
  return a.c < b.c;
}

// --- convex polygons embedded in 3-space --------------------------------------

enum class PolyLoc { Outside, Inside, OnEdge, OnVertex };

struct PolyLocate {
  PolyLoc loc;
  int index = -1;  // edge index (i -> i+1) or vertex index
};

// p is assumed to lie on the polygon's plane; poly is a strictly convex cycle
// oriented counterclockwise as seen from the side n points to.
inline PolyLocate locate_in_convex_polygon3(const std::vector<P3>& poly, const V3& n,
                                            const P3& p) {
  int m = static_cast<int>(poly.size());
  if (m == 1) {
    if (p == poly[0]) return {PolyLoc::OnVertex, 0};
    return {PolyLoc::Outside, -1};
  }
  if (m == 2) {
    // Degenerate polygon (a segment).
    if (p == poly[0]) return {PolyLoc::OnVertex, 0};
    if (p == poly[1]) return {PolyLoc::OnVertex, 1};
    V3 d = poly[1] - poly[0];
    if (!parallel(d, p - poly[0])) return {PolyLoc::Outside, -1};
    Rat t = dot(p - poly[0], d) / dot(d, d);
    if (t > 0 && t < 1) return {PolyLoc::OnEdge, 0};
    return {PolyLoc::Outside, -1};
  }
  int on_edge = -1;
  for (int i = 0; i < m; ++i) {
    const P3& a = poly[i];
    const P3& b = poly[(i + 1) % m];
    int s = sgn(dot(cross(b - a, p - a), n));
    if (s < 0) return {PolyLoc::Outside, -1};
    if (s == 0) {
      if (p == a) return {PolyLoc::OnVertex, i};
      if (p == b) return {PolyLoc::OnVertex, (i + 1) % m};
      if (on_edge >= 0) return {PolyLoc::Outside, -1};  // outside along a tangent line
      on_edge = i;
    }
  }
  if (on_edge >= 0) {
    // Zero cross with a convex cycle means p is on the edge's line; confirm
    // it is within the edge span (otherwise some other edge test failed).
    return {PolyLoc::OnEdge, on_edge};
  }
  return {PolyLoc::Inside, -1};
}

// Clip a convex polygon (cycle in 3-space) to the halfspace eval <= 0.
inline std::vector<P3> clip_polygon_halfspace(const std::vector<P3>& poly, const Plane& h) {
  std::vector<P3> out;
  int m = static_cast<int>(poly.size());
  if (m == 0) return out;
  std::vector<Rat> e(m);
  for (int i = 0; i < m; ++i) e[i] = h.eval(poly[i]);
  for (int i = 0; i < m; ++i) {
    int j = (i + 1) % m;
    bool ina = e[i] <= 0, inb = e[j] <= 0;
    if (ina) out.push_back(poly[i]);
    if (ina != inb) {
      Rat t = e[i] / (e[i] - e[j]);
      out.push_back(poly[i] + t * (poly[j] - poly[i]));
    }
  }
  // Remove consecutive duplicates introduced by vertices on the boundary.
  std::vector<P3> ded;
  for (auto& p : out) {
    if (ded.empty() || !(ded.back() == p)) ded.push_back(p);
  }
  while (ded.size() > 1 && ded.front() == ded.back()) ded.pop_back();
  return ded;
}

// Intersection of a convex polygon with a plane: empty, a point, or a chord.
// Returns the (possibly degenerate) segment of polygon points on the plane.
inline std::optional<std::pair<P3, P3>> polygon_plane_chord(const std::vector<P3>& poly,
                                                            const Plane& pl) {
  std::vector<P3> pts;
  int m = static_cast<int>(poly.size());
  std::vector<Rat> e(m);
  bool pos = false, neg = false;
  for (int i = 0; i < m; ++i) {
    e[i] = pl.eval(poly[i]);
    if (e[i] > 0) pos = true;
    if (e[i] < 0) neg = true;
  }
  if (!pos && !neg) return std::nullopt;  // polygon lies in the plane: caller handles
  for (int i = 0; i < m; ++i) {
    int j = (i + 1) % m;
    if (e[i] == 0) pts.push_back(poly[i]);
    if ((e[i] < 0 && e[j] > 0) || (e[i] > 0 && e[j] < 0)) {
      Rat t = e[i] / (e[i] - e[j]);
      pts.push_back(poly[i] + t * (poly[j] - poly[i]));
    }
  }
  if (pts.empty()) return std::nullopt;
  // Extremes along the chord direction (dedup included).
  P3 lo = pts[0], hi = pts[0];
  for (auto& p : pts) {
    if (lex_less(p, lo)) lo = p;
    if (lex_less(hi, p)) hi = p;
  }
  return std::make_pair(lo, hi);
}

// --- axis-aligned boxes (double, outward rounded) -----------------------------

struct AABB {
  double lo[3] = {1e308, 1e308, 1e308};
  double hi[3] = {-1e308, -1e308, -1e308};

  void grow(const P3& p) {
    double l[3] = {dbl_lo(p.x), dbl_lo(p.y), dbl_lo(p.z)};
    double h[3] = {dbl_hi(p.x), dbl_hi(p.y), dbl_hi(p.z)};
    for (int i = 0; i < 3; ++i) {
      lo[i] = std::min(lo[i], l[i]);
      hi[i] = std::max(hi[i], h[i]);
    }
  }
  bool contains(const double p[3]) const {
    for (int i = 0; i < 3; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
  bool overlaps(const AABB& o) const {
    for (int i = 0; i < 3; ++i)
      if (hi[i] < o.lo[i] || o.hi[i] < lo[i]) return false;
    return true;
  }
};

inline AABB bbox_of(const std::vector<P3>& pts) {
  AABB b;
  for (auto& p : pts) b.grow(p);
  return b;
}

}  // namespace freespace
