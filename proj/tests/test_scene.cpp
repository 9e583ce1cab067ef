#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "freespace/scene.hpp"

using namespace freespace;

static Rat Q(const char* s) { return parse_rat(s); }

TEST_CASE("standard robots") {
  auto sq = square_robot();
  CHECK(sq.kind == RobotKind::FlatPolygon);
  CHECK(sq.is_square);
  CHECK(sq.is_fully_parallel);
  CHECK(!sq.is_triangle);
  CHECK(!sq.is_cube);
  REQUIRE(sq.body.verts.size() == 4);
  CHECK(sq.body.verts[0] == P3(0, 0, 0));
  CHECK(sq.body.verts[1] == P3(0, 0, 1));
  CHECK(sq.body.verts[2] == P3(1, 0, 0));
  CHECK(sq.body.verts[3] == P3(1, 0, 1));
  for (auto& p : sq.parallel) {
    CHECK(p.partner >= 0);
    CHECK(p.ratio == 1);
  }

  auto tri = vee_triangle_robot();
  CHECK(tri.is_triangle);
  CHECK(!tri.is_fully_parallel);
  CHECK(!tri.is_square);
  CHECK(tri.body.verts.size() == 3);

  auto hex = hexagon_robot();
  CHECK(hex.is_fully_parallel);
  CHECK(hex.body.verts.size() == 6);
  CHECK(hex.body.dim == 2);
  std::multiset<Rat> ratios;
  for (size_t e = 0; e < hex.parallel.size(); ++e) {
    REQUIRE(hex.parallel[e].partner >= 0);
    Rat lam = hex.parallel[e].ratio;
    Rat inv = 1 / lam;
    ratios.insert(std::max(lam, inv));
  }
  // Each pair contributes its ratio from both sides.
  std::multiset<Rat> want = {Rat(3), Rat(3), Rat(3), Rat(3), Q("7/3"), Q("7/3")};
  CHECK(ratios == want);

  auto cube = cube_robot();
  CHECK(cube.kind == RobotKind::ConvexPolytope);
  CHECK(cube.is_cube);
  CHECK(cube.body.verts.size() == 8);
}

TEST_CASE("robot constructor errors") {
  CHECK_THROWS_AS(make_fully_parallel({{0, 0, 0}, {-1, 0, 1}, {1, 0, 1}}), NotFullyParallel);
  CHECK_THROWS_AS(make_flat_polygon({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}), DegenerateInput);
  CHECK_THROWS_AS(
      make_flat_polygon({{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1}, {Q("1/2"), 0, Q("1/2")}}),
      NonConvex);
  CHECK_THROWS_AS(make_polytope({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}), DegenerateInput);
  std::vector<P3> cube_and_center;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y)
      for (int z = 0; z <= 1; ++z) cube_and_center.push_back({x, y, z});
  cube_and_center.push_back({Q("1/2"), Q("1/2"), Q("1/2")});
  CHECK_THROWS_AS(make_polytope(cube_and_center), NonConvex);
}

TEST_CASE("triple-plane normal inventory") {
  CHECK(robot_triple_normals(square_robot()).size() == 1);
  CHECK(robot_triple_normals(vee_triangle_robot()).size() == 1);
  CHECK(robot_triple_normals(hexagon_robot()).size() == 1);
  CHECK(robot_triple_normals(square_robot())[0] == V3(0, 1, 0));
  CHECK(robot_triple_normals(cube_robot()).size() == 13);
}

TEST_CASE("chart transforms level their plane") {
  std::mt19937_64 rng(11);
  auto rnd = [&]() { return Rat(static_cast<long>(rng() % 19) - 9); };
  for (int it = 0; it < 50; ++it) {
    V3 n{rnd(), rnd(), rnd()};
    if (is_zero(n)) continue;
    ChartTransform t = make_chart_transform(n);
    V3 np = t.normal(n);
    CHECK(np.x == 0);
    CHECK(np.y == 0);
    CHECK(np.z != 0);
    // Point/normal consistency: incidence is preserved.
    for (int k = 0; k < 5; ++k) {
      P3 p{rnd(), rnd(), rnd()};
      P3 q{rnd(), rnd(), rnd()};
      CHECK(t.inverse_point(t.point(p)) == p);
      CHECK(dot(n, p - q) == dot(V3(t.normal(n)), t.point(p) - t.point(q)));
    }
  }
}

static Scene tiny_scene() {
  Scene s;
  s.robot = square_robot();
  s.obstacles.push_back(
      make_obstacle(0, ObstacleKind::Segment, {{3, 1, 2}, {4, 3, 7}}));
  s.obstacles.push_back(
      make_obstacle(1, ObstacleKind::Triangle, {{10, 1, 0}, {11, 3, 1}, {10, 5, 3}}));
  s.obstacles.push_back(make_obstacle(2, ObstacleKind::Point, {{-5, Q("1/3"), 2}}));
  s.meta.seed = 42;
  s.meta.generator = "handmade";
  return s;
}

TEST_CASE("scene counters") {
  Scene s = tiny_scene();
  CHECK(s.k() == 3);
  CHECK(s.n() == 6);
}

TEST_CASE("scene json round-trip") {
  Scene s = tiny_scene();
  std::string text = save_scene(s);
  Scene back = load_scene(text);
  CHECK(save_scene(back) == text);
  CHECK(back.meta.seed == 42);
  CHECK(back.meta.generator == "handmade");
  CHECK(back.k() == 3);
  CHECK(back.obstacles[2].body.verts[0].y == Q("1/3"));
  CHECK(back.robot.is_square);
}

TEST_CASE("scene json rejects malformed input") {
  Scene s = tiny_scene();
  std::string good = save_scene(s);

  SECTION("unknown top-level field") {
    auto j = nlohmann::ordered_json::parse(good);
    j["extra"] = 1;
    CHECK_THROWS_AS(load_scene(j.dump()), ParseError);
  }
  SECTION("unknown obstacle field") {
    auto j = nlohmann::ordered_json::parse(good);
    j["obstacles"][0]["color"] = "red";
    CHECK_THROWS_AS(load_scene(j.dump()), ParseError);
  }
  SECTION("decimal coordinates are rejected") {
    auto j = nlohmann::ordered_json::parse(good);
    j["obstacles"][0]["points"][0][0] = 0.5;
    CHECK_THROWS_AS(load_scene(j.dump()), ParseError);
  }
  SECTION("zero denominator") {
    auto j = nlohmann::ordered_json::parse(good);
    j["obstacles"][0]["points"][0][0] = "1/0";
    CHECK_THROWS_AS(load_scene(j.dump()), ParseError);
  }
  SECTION("duplicate obstacle ids") {
    auto j = nlohmann::ordered_json::parse(good);
    j["obstacles"][1]["id"] = j["obstacles"][0]["id"];
    CHECK_THROWS_AS(load_scene(j.dump()), ParseError);
  }
  SECTION("bad version") {
    auto j = nlohmann::ordered_json::parse(good);
    j["version"] = 2;
    CHECK_THROWS_AS(load_scene(j.dump()), ParseError);
  }
  SECTION("garbage") { CHECK_THROWS_AS(load_scene("{nope"), ParseError); }
  SECTION("wrong kind string") {
    auto j = nlohmann::ordered_json::parse(good);
    j["obstacles"][0]["kind"] = "blob";
    CHECK_THROWS_AS(load_scene(j.dump()), ParseError);
  }
}

TEST_CASE("large scene round-trips byte-identically") {
  Scene s;
  s.robot = cube_robot();
  for (int i = 0; i < 100; ++i)
    s.obstacles.push_back(make_obstacle(
        i, ObstacleKind::Segment, {{3 * i, 0, 0}, {3 * i + 1, 1, 1}}));
  s.meta.seed = 7;
  s.meta.generator = "grid";
  std::string a = save_scene(s);
  std::string b = save_scene(load_scene(a));
  CHECK(a == b);
}

TEST_CASE("disjointness validation") {
  SECTION("separated bodies pass") {
    Scene s = tiny_scene();
    CHECK(validate_scene(s).empty());
  }
  SECTION("touching solids fail") {
    Scene s;
    s.robot = square_robot();
    std::vector<P3> c1, c2;
    for (int x = 0; x <= 1; ++x)
      for (int y = 0; y <= 1; ++y)
        for (int z = 0; z <= 1; ++z) {
          c1.push_back({x, y, z});
          c2.push_back({x + 1, y, z});  // shares the x=1 face
        }
    s.obstacles.push_back(make_obstacle(0, ObstacleKind::ConvexSolid, c1));
    s.obstacles.push_back(make_obstacle(1, ObstacleKind::ConvexSolid, c2));
    auto v = validate_scene(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].id1 == 0);
    CHECK(v[0].id2 == 1);
    CHECK_THROWS_AS(load_scene(save_scene(s)), InvariantViolation);
  }
  SECTION("crossing segments fail") {
    Scene s;
    s.robot = square_robot();
    s.obstacles.push_back(make_obstacle(0, ObstacleKind::Segment, {{-1, -1, 0}, {1, 1, 0}}));
    s.obstacles.push_back(make_obstacle(1, ObstacleKind::Segment, {{-1, 1, 0}, {1, -1, 0}}));
    CHECK(validate_scene(s).size() == 1);
  }
  SECTION("near miss passes") {
    Scene s;
    s.robot = square_robot();
    s.obstacles.push_back(make_obstacle(0, ObstacleKind::Segment, {{0, 0, 0}, {2, 2, 2}}));
    s.obstacles.push_back(
        make_obstacle(1, ObstacleKind::Segment, {{1, 1, Q("1000001/1000000")}, {3, 1, 2}}));
    CHECK(validate_scene(s).empty());
  }
}

TEST_CASE("pairwise general position checks") {
  auto sq = square_robot();
  Scene empty;
  empty.robot = sq;
  CHECK(check_general_position_pairwise(sq, empty).empty());

  auto has_code = [](const std::vector<GPViolation>& v, GPCode c) {
    for (auto& x : v)
      if (x.code == c) return true;
    return false;
  };

  SECTION("clean scene") {
    Scene s = tiny_scene();
    auto v = check_general_position_pairwise(sq, s);
    for (auto& x : v) INFO(gp_code_name(x.code) << ": " << x.detail);
    CHECK(v.empty());
  }
  SECTION("edge parallel to robot plane is V1") {
    Scene s;
    s.robot = sq;
    s.obstacles.push_back(make_obstacle(0, ObstacleKind::Segment, {{0, 5, 0}, {1, 5, 1}}));
    auto v = check_general_position_pairwise(sq, s);
    CHECK(has_code(v, GPCode::V1));
  }
  SECTION("face parallel to robot edge is V2") {
    Scene s;
    s.robot = sq;
    s.obstacles.push_back(
        make_obstacle(0, ObstacleKind::Triangle, {{5, 0, 0}, {5, 1, 0}, {5, 0, 1}}));
    auto v = check_general_position_pairwise(sq, s);
    CHECK(has_code(v, GPCode::V2));
  }
  SECTION("obstacle edge parallel to robot edge is V2") {
    Scene s;
    s.robot = sq;
    s.obstacles.push_back(make_obstacle(0, ObstacleKind::Segment, {{5, 1, 0}, {5, 1, 3}}));
    auto v = check_general_position_pairwise(sq, s);
    CHECK(has_code(v, GPCode::V2));
  }
  SECTION("face parallel to the robot plane is V3") {
    Scene s;
    s.robot = sq;
    s.obstacles.push_back(
        make_obstacle(0, ObstacleKind::Triangle, {{5, 5, 0}, {6, 5, 0}, {5, 5, 3}}));
    auto v = check_general_position_pairwise(sq, s);
    CHECK(has_code(v, GPCode::V3));
  }
  SECTION("face pair meeting parallel to the robot plane is V4") {
    Scene s;
    s.robot = sq;
    s.obstacles.push_back(
        make_obstacle(0, ObstacleKind::Triangle, {{0, 0, 0}, {1, -1, 0}, {1, -1, 7}}));
    s.obstacles.push_back(
        make_obstacle(1, ObstacleKind::Triangle, {{10, 0, 0}, {11, 1, 0}, {11, 1, 7}}));
    auto v = check_general_position_pairwise(sq, s);
    CHECK(has_code(v, GPCode::V4));
  }
  SECTION("face slicing parallel to the chart axis is V5") {
    Scene s;
    s.robot = sq;
    s.obstacles.push_back(
        make_obstacle(0, ObstacleKind::Triangle, {{5, 2, -1}, {6, 2, -1}, {5, 0, 0}}));
    auto v = check_general_position_pairwise(sq, s);
    CHECK(has_code(v, GPCode::V5));
  }
}

TEST_CASE("perturbation") {
  Scene s = tiny_scene();
  SECTION("zero magnitude is identity") {
    Scene p = perturb_scene(s, 9, Rat(0));
    CHECK(save_scene(p) == save_scene(s));
  }
  SECTION("determinism") {
    Scene a = perturb_scene(s, 123, Q("1/100"));
    Scene b = perturb_scene(s, 123, Q("1/100"));
    Scene c = perturb_scene(s, 124, Q("1/100"));
    CHECK(save_scene(a) == save_scene(b));
    CHECK(save_scene(a) != save_scene(c));
  }
  SECTION("perturbation clears constructed degeneracies") {
    Scene bad;
    bad.robot = square_robot();
    bad.obstacles.push_back(make_obstacle(0, ObstacleKind::Segment, {{0, 5, 0}, {1, 5, 1}}));
    bad.obstacles.push_back(
        make_obstacle(1, ObstacleKind::Triangle, {{5, 2, -1}, {6, 2, -1}, {5, 0, 0}}));
    REQUIRE(!check_general_position_pairwise(bad.robot, bad).empty());
    Scene fixed = perturb_scene(bad, 1, Q("1/1000"));
    auto v = check_general_position_pairwise(bad.robot, fixed);
    for (auto& x : v) INFO(gp_code_name(x.code) << ": " << x.detail);
    CHECK(v.empty());
  }
}
