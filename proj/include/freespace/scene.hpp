#pragma once

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "freespace/convex.hpp"

namespace freespace {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonConvex : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotFullyParallel : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PerturbationBrokeDisjointness : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RobotKind { FlatPolygon, ConvexPolytope };

// Parallel partner of a polygon edge; ratio is the affine length of the
// partner divided by this edge's length (exact, since both are rational
// multiples of a common direction).
struct EdgePartner {
  int partner = -1;
  Rat ratio;
};

struct RobotShape {
  RobotKind kind = RobotKind::FlatPolygon;
  ConvexBody body;
  bool is_triangle = false;
  bool is_square = false;
  bool is_cube = false;
  bool is_fully_parallel = false;
  std::vector<EdgePartner> parallel;  // indexed like body.edges (flat robots)
};

namespace detail {

inline V3 edge_dir(const ConvexBody& b, int e) {
  return b.verts[b.edges[e].second] - b.verts[b.edges[e].first];
}

inline void finalize_flat(RobotShape& r) {
  const ConvexBody& b = r.body;
  int ne = static_cast<int>(b.edges.size());
  r.parallel.assign(ne, {});
  for (int i = 0; i < ne; ++i) {
    V3 di = edge_dir(b, i);
    for (int j = 0; j < ne; ++j) {
      if (j == i) continue;
      V3 dj = edge_dir(b, j);
      if (!parallel(di, dj)) continue;
      Rat lam = di.x != 0 ? dj.x / di.x : (di.y != 0 ? dj.y / di.y : dj.z / di.z);
      r.parallel[i].partner = j;
      r.parallel[i].ratio = rat_abs(lam);
    }
  }
  r.is_triangle = b.verts.size() == 3;
  std::vector<P3> sq = {{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {1, 0, 1}};
  r.is_square = b.verts == sq;
  r.is_fully_parallel = true;
  for (auto& p : r.parallel)
    if (p.partner < 0) r.is_fully_parallel = false;
  if (ne == 0) r.is_fully_parallel = false;
}

}  // namespace detail

// Flat convex polygon robot from its vertex set (any order).
inline RobotShape make_flat_polygon(const std::vector<P3>& pts) {
  RobotShape r;
  r.kind = RobotKind::FlatPolygon;
  r.body = hull(pts);
  if (r.body.dim != 2) throw DegenerateInput("flat robot must span dimension 2");
  std::set<std::array<std::string, 3>> inset, keep;
  for (auto& p : pts) inset.insert({rat_str(p.x), rat_str(p.y), rat_str(p.z)});
  for (auto& p : r.body.verts) keep.insert({rat_str(p.x), rat_str(p.y), rat_str(p.z)});
  if (inset != keep) throw NonConvex("flat robot has non-extreme input vertices");
  detail::finalize_flat(r);
  return r;
}

inline RobotShape make_fully_parallel(const std::vector<P3>& pts) {
  RobotShape r = make_flat_polygon(pts);
  if (!r.is_fully_parallel)
    throw NotFullyParallel("an edge of the polygon lacks a parallel partner");
  return r;
}

inline RobotShape make_triangle(const P3& a, const P3& b, const P3& c) {
  RobotShape r = make_flat_polygon({a, b, c});
  return r;
}

inline RobotShape make_polytope(const std::vector<P3>& pts) {
  RobotShape r;
  r.kind = RobotKind::ConvexPolytope;
  r.body = hull(pts);
  if (r.body.dim != 3) throw DegenerateInput("polytope robot must span dimension 3");
  std::set<std::array<std::string, 3>> inset, keep;
  for (auto& p : pts) inset.insert({rat_str(p.x), rat_str(p.y), rat_str(p.z)});
  for (auto& p : r.body.verts) keep.insert({rat_str(p.x), rat_str(p.y), rat_str(p.z)});
  if (inset != keep) throw NonConvex("polytope robot has non-extreme input vertices");
  std::vector<P3> cube;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y)
      for (int z = 0; z <= 1; ++z) cube.push_back({x, y, z});
  std::sort(cube.begin(), cube.end(), [](const P3& a, const P3& b) { return lex_less(a, b); });
  r.is_cube = r.body.verts == cube;
  return r;
}

// Standard robots used throughout the tests and generators. All flat robots
// live in the y=0 plane.
inline RobotShape square_robot() {
  return make_flat_polygon({{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1}});
}
inline RobotShape vee_triangle_robot() {
  return make_triangle({0, 0, 0}, {-1, 0, 1}, {1, 0, 1});
}
inline RobotShape hexagon_robot() {
  return make_fully_parallel({{0, 0, 0},
                              {1, 0, 0},
                              {2, 0, 2},
                              {1, 0, 3},
                              {-2, 0, 3},
                              {parse_rat("-7/3"), 0, parse_rat("7/3")}});
}
inline RobotShape cube_robot() {
  std::vector<P3> c;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y)
      for (int z = 0; z <= 1; ++z) c.push_back({x, y, z});
  return make_polytope(c);
}

enum class ObstacleKind { Point, Segment, Triangle, ConvexSolid };

struct Obstacle {
  int id = -1;
  ObstacleKind kind = ObstacleKind::Point;
  ConvexBody body;
};

inline Obstacle make_obstacle(int id, ObstacleKind kind, const std::vector<P3>& pts) {
  Obstacle o;
  o.id = id;
  o.kind = kind;
  o.body = hull(pts);
  int want = kind == ObstacleKind::Point      ? 0
             : kind == ObstacleKind::Segment  ? 1
             : kind == ObstacleKind::Triangle ? 2
                                              : 3;
  if (o.body.dim != want) throw DegenerateInput("obstacle dimension does not match kind");
  if (kind == ObstacleKind::Triangle && o.body.verts.size() != 3)
    throw DegenerateInput("triangle obstacle must have exactly 3 extreme points");
  return o;
}

struct SceneMeta {
  unsigned long long seed = 0;
  std::string generator;
};

struct Scene {
  RobotShape robot;
  std::vector<Obstacle> obstacles;
  SceneMeta meta;

  int k() const { return static_cast<int>(obstacles.size()); }
  long n() const {
    long t = 0;
    for (auto& o : obstacles) t += static_cast<long>(o.body.verts.size());
    return t;
  }
};

// --- disjointness -------------------------------------------------------------

struct DisjointnessViolation {
  int id1, id2;
  std::string detail;
};

// Exact closed-set pairwise disjointness: A and B intersect iff the origin
// lies in A + (-B).
inline std::vector<DisjointnessViolation> validate_scene(const Scene& s) {
  for (size_t i = 1; i < s.obstacles.size(); ++i)
    if (s.obstacles[i - 1].id >= s.obstacles[i].id)
      throw InvariantViolation("scene obstacles must be sorted by strictly increasing id");
  std::vector<DisjointnessViolation> out;
  std::vector<ConvexBody> neg;
  neg.reserve(s.obstacles.size());
  for (auto& o : s.obstacles) neg.push_back(negated(o.body));
  for (size_t i = 0; i < s.obstacles.size(); ++i)
    for (size_t j = i + 1; j < s.obstacles.size(); ++j) {
      if (!s.obstacles[i].body.box.overlaps(s.obstacles[j].body.box)) continue;
      ConvexBody diff = minkowski(s.obstacles[i].body, neg[j]);
      if (locate(diff, {0, 0, 0}).loc != Loc::Outside)
        out.push_back({s.obstacles[i].id, s.obstacles[j].id, "obstacles intersect or touch"});
    }
  return out;
}

// --- persistence ---------------------------------------------------------------

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson p3_json(const P3& p) {
  return ojson::array({rat_str(p.x), rat_str(p.y), rat_str(p.z)});
}

inline P3 p3_from_json(const ojson& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ParseError(where + ": expected 3 coordinates");
  P3 p;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_string()) throw ParseError(where + ": coordinates must be rational strings");
    try {
      p[i] = parse_rat(j[i].get<std::string>());
    } catch (const RatParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return p;
}

inline void reject_unknown(const ojson& j, const std::set<std::string>& allowed,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ParseError(where + ": unknown field '" + it.key() + "'");
}

inline const char* obstacle_kind_name(ObstacleKind k) {
  switch (k) {
    case ObstacleKind::Point: return "point";
    case ObstacleKind::Segment: return "segment";
    case ObstacleKind::Triangle: return "triangle";
    case ObstacleKind::ConvexSolid: return "convex_solid";
  }
  return "?";
}

inline ObstacleKind obstacle_kind_from(const std::string& s, const std::string& where) {
  if (s == "point") return ObstacleKind::Point;
  if (s == "segment") return ObstacleKind::Segment;
  if (s == "triangle") return ObstacleKind::Triangle;
  if (s == "convex_solid") return ObstacleKind::ConvexSolid;
  throw ParseError(where + ": unknown obstacle kind '" + s + "'");
}

}  // namespace detail

inline std::string save_scene(const Scene& s) {
  using detail::ojson;
  ojson j;
  j["version"] = 1;
  j["robot"]["kind"] =
      s.robot.kind == RobotKind::FlatPolygon ? "flat_polygon" : "convex_polytope";
  ojson rv = ojson::array();
  if (s.robot.kind == RobotKind::FlatPolygon) {
    for (int id : s.robot.body.facets[0]) rv.push_back(detail::p3_json(s.robot.body.verts[id]));
  } else {
    for (auto& p : s.robot.body.verts) rv.push_back(detail::p3_json(p));
  }
  j["robot"]["vertices"] = rv;
  ojson obs = ojson::array();
  for (auto& o : s.obstacles) {
    ojson jo;
    jo["id"] = o.id;
    jo["kind"] = detail::obstacle_kind_name(o.kind);
    ojson pts = ojson::array();
    for (auto& p : o.body.verts) pts.push_back(detail::p3_json(p));
    jo["points"] = pts;
    obs.push_back(jo);
  }
  j["obstacles"] = obs;
  j["metadata"]["seed"] = s.meta.seed;
  j["metadata"]["generator"] = s.meta.generator;
  return j.dump(2) + "\n";
}

inline Scene load_scene(const std::string& text) {
  using detail::ojson;
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("scene file: ") + e.what());
  }
  try {
  if (!j.is_object()) throw ParseError("scene file: top level must be an object");
  detail::reject_unknown(j, {"version", "robot", "obstacles", "metadata"}, "scene");
  for (const char* req : {"version", "robot", "obstacles", "metadata"})
    if (!j.contains(req)) throw ParseError(std::string("scene: missing field '") + req + "'");
  if (!j["version"].is_number_integer() || j["version"].get<int>() != 1)
    throw ParseError("scene.version: expected 1");

  Scene s;
  const ojson& jr = j["robot"];
  detail::reject_unknown(jr, {"kind", "vertices"}, "robot");
  if (!jr.contains("kind") || !jr.contains("vertices"))
    throw ParseError("robot: missing kind or vertices");
  std::string rk = jr["kind"].get<std::string>();
  std::vector<P3> rpts;
  for (size_t i = 0; i < jr["vertices"].size(); ++i)
    rpts.push_back(
        detail::p3_from_json(jr["vertices"][i], "robot.vertices[" + std::to_string(i) + "]"));
  try {
    if (rk == "flat_polygon")
      s.robot = make_flat_polygon(rpts);
    else if (rk == "convex_polytope")
      s.robot = make_polytope(rpts);
    else
      throw ParseError("robot.kind: unknown kind '" + rk + "'");
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("robot: ") + e.what());
  }

  std::set<int> ids;
  for (size_t i = 0; i < j["obstacles"].size(); ++i) {
    const ojson& jo = j["obstacles"][i];
    std::string where = "obstacles[" + std::to_string(i) + "]";
    detail::reject_unknown(jo, {"id", "kind", "points"}, where);
    for (const char* req : {"id", "kind", "points"})
      if (!jo.contains(req)) throw ParseError(where + ": missing field '" + req + "'");
    if (!jo["id"].is_number_integer()) throw ParseError(where + ".id: expected integer");
    int id = jo["id"].get<int>();
    if (!ids.insert(id).second) throw ParseError(where + ".id: duplicate id");
    ObstacleKind kind =
        detail::obstacle_kind_from(jo["kind"].get<std::string>(), where + ".kind");
    std::vector<P3> pts;
    for (size_t p = 0; p < jo["points"].size(); ++p)
      pts.push_back(detail::p3_from_json(jo["points"][p],
                                         where + ".points[" + std::to_string(p) + "]"));
    try {
      s.obstacles.push_back(make_obstacle(id, kind, pts));
    } catch (const std::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }

  std::sort(s.obstacles.begin(), s.obstacles.end(),
            [](const Obstacle& a, const Obstacle& b) { return a.id < b.id; });

  const ojson& jm = j["metadata"];
  detail::reject_unknown(jm, {"seed", "generator"}, "metadata");
  if (jm.contains("seed")) s.meta.seed = jm["seed"].get<unsigned long long>();
  if (jm.contains("generator")) s.meta.generator = jm["generator"].get<std::string>();

  auto viol = validate_scene(s);
  if (!viol.empty()) {
    std::ostringstream msg;
    msg << "scene obstacles are not pairwise disjoint:";
    for (auto& v : viol) msg << " (" << v.id1 << "," << v.id2 << ")";
    throw InvariantViolation(msg.str());
  }
  return s;
  } catch (const ParseError&) {
    throw;
  } catch (const InvariantViolation&) {
    throw;
  } catch (const std::exception& e) {
    // JSON type errors and similar malformations.
    throw ParseError(std::string("scene file: ") + e.what());
  }
}

inline void save_scene_file(const Scene& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot open for writing: " + path);
  f << save_scene(s);
}

inline Scene load_scene_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_scene(ss.str());
}

// --- perturbation --------------------------------------------------------------

inline Scene perturb_scene(const Scene& s, unsigned long long seed, const Rat& magnitude) {
  if (magnitude < 0) throw DegenerateInput("perturbation magnitude must be >= 0");
  if (magnitude == 0) return s;
  std::mt19937_64 rng(seed);
  auto draw = [&]() {
    long v = static_cast<long>(rng() % 2001) - 1000;
    return magnitude * Rat(v) / 1000;
  };
  Scene out = s;
  for (auto& o : out.obstacles) {
    std::vector<P3> pts;
    for (auto& p : o.body.verts) {
      Rat dx = draw(), dy = draw(), dz = draw();
      pts.push_back({p.x + dx, p.y + dy, p.z + dz});
    }
    try {
      o = make_obstacle(o.id, o.kind, pts);
    } catch (const std::exception& e) {
      throw PerturbationBrokeDisjointness(std::string("perturbation degenerated obstacle ") +
                                          std::to_string(o.id) + ": " + e.what());
    }
  }
  if (!validate_scene(out).empty())
    throw PerturbationBrokeDisjointness("perturbed obstacles are no longer disjoint");
  return out;
}

// --- general position (pairwise mode) -------------------------------------------

enum class GPCode { V1, V2, V3, V4, V5, V6, V7 };

inline const char* gp_code_name(GPCode c) {
  switch (c) {
    case GPCode::V1: return "V1";
    case GPCode::V2: return "V2";
    case GPCode::V3: return "V3";
    case GPCode::V4: return "V4";
    case GPCode::V5: return "V5";
    case GPCode::V6: return "V6";
    case GPCode::V7: return "V7";
  }
  return "?";
}

struct GPViolation {
  GPCode code;
  std::string detail;
};

namespace detail {

inline V3 primitive_dir(V3 v) {
  Plane p{v, 0};
  p = p.unoriented();
  return p.n;
}

}  // namespace detail

// Distinct planes spanned by robot vertex triples, as primitive lex-positive
// normal directions. Flat robots yield one; the unit cube yields 13.
inline std::vector<V3> robot_triple_normals(const RobotShape& r) {
  std::set<std::array<Rat, 3>> seen;
  std::vector<V3> out;
  const auto& v = r.body.verts;
  int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        V3 nor = cross(v[j] - v[i], v[k] - v[i]);
        if (is_zero(nor)) continue;
        nor = detail::primitive_dir(nor);
        if (seen.insert({nor.x, nor.y, nor.z}).second) out.push_back(nor);
      }
  return out;
}

// Affine chart transform: permutation sending one axis to z, then a shear
// that levels a chosen plane normal to (0,0,*). Maps points; plane normals
// transform contravariantly.
struct ChartTransform {
  int ax = 0, ay = 1, az = 2;  // source axes landing in x,y,z slots
  Rat alpha, beta;

  P3 point(const P3& p) const {
    P3 q{p[ax], p[ay], p[az]};
    return {q.x, q.y, q.z + alpha * q.x + beta * q.y};
  }
  V3 normal(const V3& n) const {
    V3 q{n[ax], n[ay], n[az]};
    return {q.x - alpha * q.z, q.y - beta * q.z, q.z};
  }
  P3 inverse_point(const P3& p) const {
    P3 q{p.x, p.y, p.z - alpha * p.x - beta * p.y};
    P3 r;
    r[ax] = q.x;
    r[ay] = q.y;
    r[az] = q.z;
    return r;
  }
};

inline ChartTransform make_chart_transform(const V3& plane_normal) {
  ChartTransform t;
  int k = 0;
  Rat best = rat_abs(plane_normal.x);
  if (rat_abs(plane_normal.y) > best) {
    best = rat_abs(plane_normal.y);
    k = 1;
  }
  if (rat_abs(plane_normal.z) > best) k = 2;
  t.ax = (k + 1) % 3;
  t.ay = (k + 2) % 3;
  t.az = k;
  V3 q{plane_normal[t.ax], plane_normal[t.ay], plane_normal[t.az]};
  t.alpha = q.x / q.z;
  t.beta = q.y / q.z;
  return t;
}

// Pairwise-mode general position: V1-V5. V1 extends to all robot
// vertex-triple planes (facet planes included) and V2 additionally flags
// obstacle edges parallel to robot edges; both extensions are required for
// the chart machinery to stay degenerate-free and are reported under the
// nearest listed code.
inline std::vector<GPViolation> check_general_position_pairwise(const RobotShape& robot,
                                                                const Scene& scene) {
  std::vector<GPViolation> out;
  auto normals = robot_triple_normals(robot);
  std::vector<V3> robot_edge_dirs;
  for (size_t e = 0; e < robot.body.edges.size(); ++e)
    robot_edge_dirs.push_back(detail::edge_dir(robot.body, static_cast<int>(e)));
  bool flat = robot.kind == RobotKind::FlatPolygon;
  V3 flat_normal = flat ? robot.body.planes[0].n : V3{0, 0, 0};

  struct FaceRef {
    int obstacle;
    int facet;
    V3 n;
  };
  std::vector<FaceRef> faces;
  for (auto& o : scene.obstacles)
    for (size_t f = 0; f < o.body.planes.size(); ++f)
      faces.push_back({o.id, static_cast<int>(f), o.body.planes[f].n});

  std::vector<ChartTransform> transforms;
  for (auto& n : normals) transforms.push_back(make_chart_transform(n));

  for (auto& o : scene.obstacles) {
    for (size_t e = 0; e < o.body.edges.size(); ++e) {
      V3 d = detail::edge_dir(o.body, static_cast<int>(e));
      for (auto& n : normals)
        if (dot(d, n) == 0) {
          std::ostringstream msg;
          msg << "obstacle " << o.id << " edge " << e
              << " parallel to a robot vertex-triple plane";
          out.push_back({GPCode::V1, msg.str()});
        }
      for (size_t re = 0; re < robot_edge_dirs.size(); ++re)
        if (parallel(d, robot_edge_dirs[re])) {
          std::ostringstream msg;
          msg << "obstacle " << o.id << " edge " << e << " parallel to robot edge " << re;
          out.push_back({GPCode::V2, msg.str()});
        }
    }
  }

  for (auto& f : faces) {
    for (size_t re = 0; re < robot_edge_dirs.size(); ++re)
      if (dot(f.n, robot_edge_dirs[re]) == 0) {
        std::ostringstream msg;
        msg << "obstacle " << f.obstacle << " face " << f.facet << " parallel to robot edge "
            << re;
        out.push_back({GPCode::V2, msg.str()});
      }
    if (flat && parallel(f.n, flat_normal)) {
      std::ostringstream msg;
      msg << "obstacle " << f.obstacle << " face " << f.facet << " parallel to the robot plane";
      out.push_back({GPCode::V3, msg.str()});
    }
    for (auto& t : transforms) {
      V3 np = t.normal(f.n);
      if (np.y == 0) {
        std::ostringstream msg;
        msg << "obstacle " << f.obstacle << " face " << f.facet
            << " slices parallel to the chart y-axis";
        out.push_back({GPCode::V5, msg.str()});
      }
    }
  }

  if (flat) {
    for (size_t i = 0; i < faces.size(); ++i)
      for (size_t j = i + 1; j < faces.size(); ++j) {
        V3 dir = cross(faces[i].n, faces[j].n);
        if (is_zero(dir)) continue;
        if (dot(dir, flat_normal) == 0) {
          std::ostringstream msg;
          msg << "faces " << faces[i].obstacle << "/" << faces[i].facet << " and "
              << faces[j].obstacle << "/" << faces[j].facet
              << " meet in a line parallel to the robot plane";
          out.push_back({GPCode::V4, msg.str()});
        }
      }
  }
  return out;
}

}  // namespace freespace
