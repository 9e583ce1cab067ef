#pragma once

#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "envelope.hpp"
#include "scene.hpp"

namespace freespace {

struct GenerationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenConfig {
  long extent = 0;  // half-width of the placement box; 0 picks one from m
  bool segments = true;
  bool triangles = true;
  bool tetrahedra = true;
  int scene_attempts = 40;      // full regenerations before giving up
  int placement_attempts = 200; // per-obstacle rejection budget
};

namespace detail {

// Primes used as reciprocal coordinate offsets. An obstacle whose edge
// directions carry distinct-prime reciprocal terms can never satisfy a
// zero/plus/minus-one linear relation exactly, so the edge-vs-robot
// parallelism conditions are ruled out by construction rather than by luck.
inline const std::vector<long>& offset_primes() {
  static const std::vector<long> p = {
      101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167,
      173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241,
      251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311, 313, 317, 331,
      337, 347, 349, 353, 359, 367, 373, 379, 383, 389, 397, 401, 409, 419,
      421, 431, 433, 439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499};
  return p;
}

inline bool aabb_gap(const AABB& a, const AABB& b, double gap) {
  for (int i = 0; i < 3; ++i)
    if (a.hi[i] + gap < b.lo[i] || b.hi[i] + gap < a.lo[i]) return true;
  return false;
}

inline AABB body_aabb(const ConvexBody& b) {
  AABB box;
  for (auto& p : b.verts) box.grow(p);
  return box;
}

// Triangle with centroid x, lying in the plane through x with normal n. The
// in-plane frame is rescaled to unit-ish length so tw spreads are in ordinary
// units. Returns nothing when tw is collinear.
inline std::optional<std::vector<P3>> plane_triangle(const P3& x, const V3& n, const P2 tw[3]) {
  if (orient2d(tw[0], tw[1], tw[2]) == 0) return std::nullopt;
  auto inorm = [](const V3& u) {
    Rat L2 = dot(u, u);
    long k = 1;
    while (Rat(k + 1) * (k + 1) <= L2) ++k;
    return k;
  };
  V3 e1 = cross(n, {0, 1, 0});
  if (is_zero(e1)) e1 = cross(n, {1, 0, 0});
  V3 e2 = cross(n, e1);
  Rat s1 = Rat(1) / inorm(e1);
  e1 = s1 * e1;
  Rat s2 = Rat(1) / inorm(e2);
  e2 = s2 * e2;
  P2 cen{(tw[0].x + tw[1].x + tw[2].x) / 3, (tw[0].y + tw[1].y + tw[2].y) / 3};
  std::vector<P3> pts;
  for (int q = 0; q < 3; ++q)
    pts.push_back(x + (tw[q].x - cen.x) * e1 + (tw[q].y - cen.y) * e2);
  return pts;
}

}  // namespace detail

// m pairwise-disjoint obstacles, general position verified against the
// square, triangle, cube and hexagon robots so one corpus serves them all.
inline Scene random_scene(int m, unsigned long long seed, const GenConfig& cfg = {}) {
  if (m < 0) throw DegenerateInput("random_scene: m must be >= 0");
  Scene base;
  base.robot = square_robot();
  base.meta.seed = seed;
  base.meta.generator = "random";
  if (m == 0) return base;

  std::vector<ObstacleKind> kinds;
  if (cfg.segments) kinds.push_back(ObstacleKind::Segment);
  if (cfg.triangles) kinds.push_back(ObstacleKind::Triangle);
  if (cfg.tetrahedra) kinds.push_back(ObstacleKind::ConvexSolid);
  if (kinds.empty()) throw DegenerateInput("random_scene: no obstacle kinds enabled");

  long extent = cfg.extent;
  if (extent <= 0) {
    long c = 1;
    while (c * c * c < m) ++c;
    extent = 12 + 5 * c;
  }

  std::mt19937_64 rng(seed);
  const auto& primes = detail::offset_primes();
  auto draw_coord = [&]() {
    long steps = 2 * extent * 8 + 1;
    return Rat(static_cast<long>(rng() % steps) - extent * 8) / 8;
  };

  const std::vector<RobotShape> robots = {square_robot(), vee_triangle_robot(),
                                          cube_robot(), hexagon_robot()};

  for (int attempt = 0; attempt < cfg.scene_attempts; ++attempt) {
    Scene s = base;
    std::vector<AABB> boxes;
    bool ok = true;
    for (int id = 0; id < m && ok; ++id) {
      bool placed = false;
      for (int t = 0; t < cfg.placement_attempts && !placed; ++t) {
        ObstacleKind kind = kinds[rng() % kinds.size()];
        int ndirs = kind == ObstacleKind::Segment    ? 1
                    : kind == ObstacleKind::Triangle ? 2
                                                     : 3;
        std::vector<size_t> used;
        auto draw_prime = [&]() {
          for (;;) {
            size_t i = rng() % primes.size();
            bool dup = false;
            for (size_t u : used) dup |= (u == i);
            if (!dup) {
              used.push_back(i);
              return primes[i];
            }
          }
        };
        P3 v0{draw_coord(), draw_coord(), draw_coord()};
        std::vector<P3> pts = {v0};
        for (int d = 0; d < ndirs; ++d) {
          V3 dir;
          for (int c = 0; c < 3; ++c) {
            long a = static_cast<long>(rng() % 5) - 2;
            long sign = rng() % 2 ? 1 : -1;
            dir[c] = Rat(a) + Rat(sign) / draw_prime();
          }
          pts.push_back(v0 + dir);
        }
        Obstacle o;
        try {
          o = make_obstacle(id, kind, pts);
        } catch (const DegenerateInput&) {
          continue;
        }
        AABB box = detail::body_aabb(o.body);
        bool clear = true;
        for (auto& b : boxes) clear &= detail::aabb_gap(box, b, 0.25);
        if (!clear) continue;
        boxes.push_back(box);
        s.obstacles.push_back(o);
        placed = true;
      }
      ok = placed;
    }
    if (!ok) continue;
    if (!validate_scene(s).empty()) continue;
    bool clean = true;
    for (auto& r : robots) clean &= check_general_position_pairwise(r, s).empty();
    if (!clean) continue;
    return s;
  }
  throw GenerationFailed("random_scene: retry budget exhausted");
}

// Obstacle clusters hugging translated copies of the robot. Each pocket picks
// a placement, then drops a few small triangles tangent to the placed robot
// (each touching it at the support vertex of a random outward direction, with
// slight per-triangle placement jitter). Free placements near a pocket brush
// several faces with several distinct robot vertices, which random_scene at
// its default density practically never produces.
inline Scene pocket_scene(const RobotShape& robot, int m, unsigned long long seed,
                          const GenConfig& cfg = {}) {
  if (m < 0) throw DegenerateInput("pocket_scene: m must be >= 0");
  Scene base;
  base.robot = robot;
  base.meta.seed = seed;
  base.meta.generator = "pocket";
  if (m == 0) return base;

  long radius = 1;  // L-inf robot radius, rounded up
  for (auto& p : robot.body.verts)
    for (int c = 0; c < 3; ++c)
      while (Rat(radius) < rat_abs(p[c])) ++radius;
  long sep = 2 * radius + 12;
  long pockets_hint = (m + 2) / 3;
  long c = 1;
  while (c * c * c < pockets_hint) ++c;
  long extent = cfg.extent > 0 ? cfg.extent : sep * (c + 1);

  std::mt19937_64 rng(seed);
  const auto& primes = detail::offset_primes();
  auto draw_coord = [&]() {
    long steps = 2 * extent * 8 + 1;
    return Rat(static_cast<long>(rng() % steps) - extent * 8) / 8;
  };
  const std::vector<RobotShape> robots = {square_robot(), vee_triangle_robot(),
                                          cube_robot(), hexagon_robot()};

  for (int attempt = 0; attempt < cfg.scene_attempts; ++attempt) {
    Scene s = base;
    std::vector<P3> centers;
    std::vector<ConvexBody> pocket_bodies;
    int id = 0;
    bool ok = true;
    while (id < m && ok) {
      P3 v;
      bool sited = false;
      for (int t = 0; t < cfg.placement_attempts && !sited; ++t) {
        v = {draw_coord(), draw_coord(), draw_coord()};
        sited = true;
        for (auto& q : centers) {
          V3 d = v - q;
          bool apart = rat_abs(d.x) > sep || rat_abs(d.y) > sep || rat_abs(d.z) > sep;
          sited &= apart;
        }
      }
      if (!sited) {
        ok = false;
        break;
      }
      centers.push_back(v);
      pocket_bodies.clear();
      std::set<int> core_verts;
      // wide pockets use faces big enough that other robot vertices cross
      // them too, which is what makes contact curves hide one another
      bool wide = rng() % 2 == 0;
      int want = static_cast<int>(3 + rng() % 3);
      if (want > m - id) want = m - id;
      for (int j = 0; j < want && ok; ++j) {
        // the first three triangles touch the robot placed exactly at v, at
        // three distinct vertices, so a triple contact is realized there; the
        // rest get jittered placements and act as clutter
        bool core = j < 3 && want >= 3;
        bool placed = false;
        for (int t = 0; t < cfg.placement_attempts && !placed; ++t) {
          std::vector<size_t> used;
          auto draw_prime = [&]() {
            for (;;) {
              size_t i = rng() % primes.size();
              bool dup = false;
              for (size_t u : used) dup |= (u == i);
              if (!dup) {
                used.push_back(i);
                return primes[i];
              }
            }
          };
          V3 n;
          bool big = false;
          for (int cc = 0; cc < 3; ++cc) {
            long a = static_cast<long>(rng() % 5) - 2;
            long sign = rng() % 2 ? 1 : -1;
            big |= a != 0;
            n[cc] = Rat(a) + Rat(sign) / draw_prime();
          }
          if (!big) continue;
          int best = 0;
          for (size_t pv = 1; pv < robot.body.verts.size(); ++pv)
            if (dot(n, robot.body.verts[pv] - robot.body.verts[best]) > 0)
              best = static_cast<int>(pv);
          bool tie = false;
          for (size_t pv = 0; pv < robot.body.verts.size(); ++pv)
            tie |= static_cast<int>(pv) != best &&
                   dot(n, robot.body.verts[best] - robot.body.verts[pv]) == 0;
          if (tie) continue;
          if (core && core_verts.count(best)) continue;
          V3 jit{0, 0, 0};
          if (!core)
            for (int cc = 0; cc < 3; ++cc)
              jit[cc] = Rat(static_cast<long>(rng() % 9) - 4) / 16;
          P3 x = v + jit + (robot.body.verts[best] - P3{0, 0, 0});
          long span = wide ? 20 : 6;
          P2 tw[3];
          for (int q = 0; q < 3; ++q) {
            long ax = static_cast<long>(rng() % (2 * span + 1)) - span;
            long sx = rng() % 2 ? 1 : -1;
            tw[q].x = Rat(ax) / 8 + Rat(sx) / draw_prime();
            long ay = static_cast<long>(rng() % (2 * span + 1)) - span;
            long sy = rng() % 2 ? 1 : -1;
            tw[q].y = Rat(ay) / 8 + Rat(sy) / draw_prime();
          }
          auto pts = detail::plane_triangle(x, n, tw);
          if (!pts) continue;
          Obstacle o;
          try {
            o = make_obstacle(id, ObstacleKind::Triangle, *pts);
          } catch (const DegenerateInput&) {
            continue;
          }
          ConvexBody neg = negated(o.body);
          bool clear = true;
          for (auto& pb : pocket_bodies) {
            ConvexBody diff = minkowski(pb, neg);
            if (locate(diff, {0, 0, 0}).loc != Loc::Outside) {
              clear = false;
              break;
            }
          }
          if (!clear) continue;
          if (core) core_verts.insert(best);
          pocket_bodies.push_back(o.body);
          s.obstacles.push_back(o);
          ++id;
          placed = true;
        }
        ok = placed;
      }
    }
    if (!ok) continue;
    if (!validate_scene(s).empty()) continue;
    bool clean = true;
    for (auto& r : robots) clean &= check_general_position_pairwise(r, s).empty();
    if (!clean) continue;
    return s;
  }
  throw GenerationFailed("pocket_scene: retry budget exhausted");
}

// Three big triangles around the vee triangle robot, one tangent plane per
// robot vertex, all through the same placement at the origin. The faces are
// wide enough that the other vertices' plane crossings land inside them, so
// the three contact curve families shade each other; seeds exist where a
// triple survives only via the breakpoint walks or only via the envelope
// crossings. A seed whose draw fails a soundness check throws; callers keep
// to seeds known to build.
inline Scene pinwheel_scene(unsigned long long seed) {
  RobotShape robot = vee_triangle_robot();
  const std::vector<RobotShape> robots = {square_robot(), vee_triangle_robot(),
                                          cube_robot(), hexagon_robot()};
  const auto& primes = detail::offset_primes();
  // outward in-plane cone generators per vee vertex
  const V3 cone[3][2] = {{{-1, 0, -1}, {1, 0, -1}},
                         {{-1, 0, -1}, {0, 0, 1}},
                         {{0, 0, 1}, {1, 0, -1}}};
  const P3 vert[3] = {{0, 0, 0}, {-1, 0, 1}, {1, 0, 1}};

  std::mt19937_64 rng(seed);
  std::vector<size_t> used;
  auto draw_prime = [&]() {
    for (;;) {
      size_t i = rng() % primes.size();
      bool dup = false;
      for (size_t u : used) dup |= (u == i);
      if (!dup) {
        used.push_back(i);
        return primes[i];
      }
    }
  };
  auto jit = [&]() {
    long sign = rng() % 2 ? 1 : -1;
    return Rat(sign) / draw_prime();
  };

  Scene s;
  s.robot = robot;
  s.meta.seed = seed;
  s.meta.generator = "pinwheel";
  std::vector<ConvexBody> bodies;
  for (int i = 0; i < 3; ++i) {
    long av = 1 + static_cast<long>(rng() % 4);
    Rat a = Rat(av) + jit();
    long bv = 1 + static_cast<long>(rng() % 4);
    Rat b = Rat(bv) + jit();
    long cv = static_cast<long>(rng() % 5) - 2;
    Rat c = Rat(cv) + jit();
    V3 n = a * cone[i][0] + b * cone[i][1] + c * V3{0, 1, 0};
    int bestv = 0;
    for (int pv = 1; pv < 3; ++pv)
      if (dot(n, vert[pv] - vert[bestv]) > 0) bestv = pv;
    if (bestv != i) throw GenerationFailed("pinwheel_scene: direction left its cone");
    for (int pv = 0; pv < 3; ++pv)
      if (pv != bestv && dot(n, vert[bestv] - vert[pv]) == 0)
        throw GenerationFailed("pinwheel_scene: support vertex tie");
    P2 tw[3];
    for (int q = 0; q < 3; ++q) {
      long ax = static_cast<long>(rng() % 49) - 24;
      tw[q].x = Rat(ax) / 8 + jit();
      long ay = static_cast<long>(rng() % 49) - 24;
      tw[q].y = Rat(ay) / 8 + jit();
    }
    auto pts = detail::plane_triangle(vert[i], n, tw);
    if (!pts) throw GenerationFailed("pinwheel_scene: collinear face draw");
    Obstacle o;
    try {
      o = make_obstacle(i, ObstacleKind::Triangle, *pts);
    } catch (const DegenerateInput&) {
      throw GenerationFailed("pinwheel_scene: degenerate face");
    }
    ConvexBody neg = negated(o.body);
    for (auto& pb : bodies) {
      ConvexBody diff = minkowski(pb, neg);
      if (locate(diff, {0, 0, 0}).loc != Loc::Outside)
        throw GenerationFailed("pinwheel_scene: faces intersect");
    }
    bodies.push_back(o.body);
    s.obstacles.push_back(o);
  }
  if (!validate_scene(s).empty()) throw GenerationFailed("pinwheel_scene: scene not disjoint");
  for (auto& r : robots)
    if (!check_general_position_pairwise(r, s).empty())
      throw GenerationFailed("pinwheel_scene: general position check failed");
  return s;
}

// Two crossed families of 2m long segments and a unit square robot. The
// forbidden slabs overlap in an m-by-m grid of boundary meetings; each grid
// point (i,j) is the free triple-contact vertex
//   v = (j*d + 1/2, i*d + j*d + 1/2, i*d),  d = 1/(2m),
// pinning the quadratic lower bound.
inline Scene quadratic_scene(int m) {
  if (m < 1) throw DegenerateInput("quadratic_scene: m must be >= 1");
  Scene s;
  s.robot = square_robot();
  s.meta.seed = 0;
  s.meta.generator = "quadratic";
  const Rat d = Rat(1) / (2 * m);
  const Rat M = 100;
  for (int i = 0; i < m; ++i) {
    Rat z = i * d;
    s.obstacles.push_back(make_obstacle(i, ObstacleKind::Segment,
                                        {{-M, -M + z, z}, {M, M + z, z}}));
  }
  for (int j = 0; j < m; ++j) {
    Rat x = j * d + Rat(1, 2);
    Rat c = x - d / 2;  // y - z along the segment
    s.obstacles.push_back(make_obstacle(m + j, ObstacleKind::Segment,
                                        {{x, -M + c, -M}, {x, M + c, M}}));
  }
  return s;
}

// The free vertex quadratic_scene pins for the pair (i,j), 0 <= i,j < m.
inline P3 quadratic_scene_vertex(int m, int i, int j) {
  const Rat d = Rat(1) / (2 * m);
  return {j * d + Rat(1, 2), i * d + j * d + Rat(1, 2), i * d};
}

// Triangle robot between two segment families: (a) a near-pencil of m lines
// parallel to the xy-plane whose slopes fan out around the origin, and (b)
// m short walls parallel to the y-axis. Every crossing of two (a)-edges can
// be combined with every wall, so the free-vertex count grows like m * the
// number of (a)-pair crossings.
inline Scene fig1_scene(int m) {
  if (m < 1) throw DegenerateInput("fig1_scene: m must be >= 1");
  Scene s;
  s.robot = vee_triangle_robot();
  s.meta.seed = 0;
  s.meta.generator = "fig1";
  const Rat M = 100;
  for (int i = 1; i <= m; ++i) {
    Rat slope = 1 + Rat(i, 10);
    Rat stagger = Rat(i, 100000);
    Rat z = Rat(1, 2) + Rat(i, 1000);
    auto at = [&](const Rat& t) { return P3{slope * (t - stagger), t, z}; };
    s.obstacles.push_back(make_obstacle(i - 1, ObstacleKind::Segment, {at(-M), at(M)}));
  }
  for (int j = 1; j <= m; ++j) {
    Rat y0 = 1 + Rat(j - 1, 8);
    Rat x = Rat(27, 20) * y0;
    Rat z = Rat(9, 10) + Rat(j, 1000);
    s.obstacles.push_back(make_obstacle(m + j - 1, ObstacleKind::Segment,
                                        {{x, y0, z}, {x, y0 + Rat(1, 16), z}}));
  }
  return s;
}

// m nonvertical segments whose lower envelope carries at least m-1 crossing
// breakpoints: consecutive members of the concave line family
// y = -i*x + i^2/2 cross on the envelope at x = i + 1/2. The seed jitters
// the intercepts by at most 1e-6, far below the 1/2-scale clearances.
inline SegFamily hard_envelope_family(int m, unsigned long long seed) {
  if (m < 2) throw DegenerateInput("hard_envelope_family: m must be >= 2");
  std::mt19937_64 rng(seed);
  SegFamily fam;
  for (int i = 1; i <= m; ++i) {
    Rat jitter = Rat(static_cast<long>(rng() % 2001) - 1000) / 1000000000;
    Rat b = Rat(i) * i / 2 + jitter;
    Rat x0 = 0, x1 = m + 1;
    fam.segments.push_back({{x0, -i * x0 + b}, {x1, -i * x1 + b}});
  }
  return fam;
}

}  // namespace freespace
