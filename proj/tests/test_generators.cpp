#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "freespace/contacts.hpp"
#include "freespace/generators.hpp"

using namespace freespace;

namespace {

int envelope_crossings(const SegFamily& fam) {
  Envelope env = envelope(fam, EnvSide::Lower);
  int c = 0;
  for (auto& b : env.breakpoints)
    if (b.kind == BreakKind::Crossing) ++c;
  return c;
}

bool has_placement(const std::vector<TripleContact>& out, const P3& v) {
  for (auto& t : out)
    if (t.placement == v) return true;
  return false;
}

}  // namespace

TEST_CASE("hard envelope family") {
  SECTION("two segments cross once on the envelope") {
    REQUIRE(envelope_crossings(hard_envelope_family(2, 1)) == 1);
  }
  SECTION("crossing count grows with family size") {
    for (int m : {3, 8, 16, 33, 64})
      REQUIRE(envelope_crossings(hard_envelope_family(m, 5)) >= m - 1);
  }
  SECTION("segments are nonvertical") {
    for (auto& s : hard_envelope_family(16, 9).segments) REQUIRE(s.a.x != s.b.x);
  }
  SECTION("deterministic per seed") {
    auto a = hard_envelope_family(7, 42), b = hard_envelope_family(7, 42);
    REQUIRE(a.segments.size() == b.segments.size());
    for (size_t i = 0; i < a.segments.size(); ++i) {
      REQUIRE(a.segments[i].a == b.segments[i].a);
      REQUIRE(a.segments[i].b == b.segments[i].b);
    }
    auto c = hard_envelope_family(7, 43);
    bool same = true;
    for (size_t i = 0; i < a.segments.size(); ++i)
      same = same && a.segments[i].a == c.segments[i].a && a.segments[i].b == c.segments[i].b;
    REQUIRE_FALSE(same);
  }
  SECTION("rejects m < 2") { REQUIRE_THROWS_AS(hard_envelope_family(1, 0), DegenerateInput); }
}

TEST_CASE("random scene generation") {
  SECTION("deterministic per (m, seed)") {
    REQUIRE(save_scene(random_scene(6, 7)) == save_scene(random_scene(6, 7)));
    REQUIRE(save_scene(random_scene(6, 7)) != save_scene(random_scene(6, 8)));
  }
  SECTION("m = 0 gives an empty scene") {
    Scene s = random_scene(0, 1);
    REQUIRE(s.obstacles.empty());
    REQUIRE(s.robot.is_square);
  }
  SECTION("validators are clean across draws") {
    std::set<ObstacleKind> seen;
    const std::vector<RobotShape> robots = {square_robot(), vee_triangle_robot(),
                                            cube_robot(), hexagon_robot()};
    for (unsigned long long seed = 0; seed < 100; ++seed) {
      Scene s = random_scene(2 + static_cast<int>(seed % 4), seed);
      REQUIRE(validate_scene(s).empty());
      REQUIRE(check_general_position_pairwise(s.robot, s).empty());
      if (seed < 10)
        for (auto& r : robots) REQUIRE(check_general_position_pairwise(r, s).empty());
      for (auto& o : s.obstacles) seen.insert(o.kind);
    }
    REQUIRE(seen.size() == 3);
  }
  SECTION("ids are strictly increasing") {
    Scene s = random_scene(8, 3);
    REQUIRE(s.obstacles.size() == 8);
    for (int i = 0; i < 8; ++i) REQUIRE(s.obstacles[i].id == i);
  }
  SECTION("kind mix is configurable") {
    GenConfig cfg;
    cfg.triangles = cfg.tetrahedra = false;
    Scene s = random_scene(5, 11, cfg);
    for (auto& o : s.obstacles) REQUIRE(o.kind == ObstacleKind::Segment);
  }
  SECTION("impossible packings fail loudly") {
    GenConfig cfg;
    cfg.extent = 1;
    cfg.scene_attempts = 3;
    cfg.placement_attempts = 50;
    REQUIRE_THROWS_AS(random_scene(50, 1, cfg), GenerationFailed);
  }
}

TEST_CASE("quadratic scene") {
  SECTION("structure") {
    Scene s = quadratic_scene(3);
    REQUIRE(s.obstacles.size() == 6);
    for (int i = 0; i < 6; ++i) {
      REQUIRE(s.obstacles[i].id == i);
      REQUIRE(s.obstacles[i].kind == ObstacleKind::Segment);
    }
    REQUIRE(s.robot.is_square);
    REQUIRE(validate_scene(s).empty());
    REQUIRE(check_general_position_pairwise(s.robot, s).empty());
  }
  SECTION("every predicted vertex is realized, m = 2") {
    const int m = 2;
    Scene s = quadratic_scene(m);
    auto out = brute_force_triples(s.robot, s);
    REQUIRE(out.size() >= static_cast<size_t>(m * m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        P3 v = quadratic_scene_vertex(m, i, j);
        INFO("i=" << i << " j=" << j);
        REQUIRE(has_placement(out, v));
      }
    // The pinned realization: the robot's left and bottom edges ride the
    // diagonal beam i while the left edge also rests on wall j.
    std::array<ContactSpec, 3> want{{{{1, 0}, 0, {1, 0}},
                                     {{1, 1}, 0, {1, 0}},
                                     {{1, 0}, m, {1, 0}}}};
    std::sort(want.begin(), want.end());
    bool found = false;
    for (auto& t : out)
      if (t.specs == want) {
        found = true;
        REQUIRE(t.placement == quadratic_scene_vertex(m, 0, 0));
        REQUIRE(t.tag == ClassTag::PAR_EDGE);
      }
    REQUIRE(found);
  }
  SECTION("quadratic growth, m = 3") {
    const int m = 3;
    Scene s = quadratic_scene(m);
    auto out = brute_force_triples(s.robot, s);
    REQUIRE(out.size() >= static_cast<size_t>(m * m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) REQUIRE(has_placement(out, quadratic_scene_vertex(m, i, j)));
  }
}

TEST_CASE("fig1 scene") {
  SECTION("structure") {
    Scene s = fig1_scene(4);
    REQUIRE(s.obstacles.size() == 8);
    REQUIRE(s.robot.is_triangle);
    REQUIRE(validate_scene(s).empty());
    REQUIRE(check_general_position_pairwise(s.robot, s).empty());
    REQUIRE(save_scene(fig1_scene(4)) == save_scene(s));
  }
  SECTION("crossing-times-wall growth") {
    auto count = [](int m) {
      Scene s = fig1_scene(m);
      return brute_force_triples(s.robot, s).size();
    };
    size_t c3 = count(3), c4 = count(4);
    REQUIRE(c3 >= 6);  // at least one vertex per (a)-pair crossing and wall
    REQUIRE(c4 > c3);
  }
  SECTION("face contacts appear") {
    Scene s = fig1_scene(3);
    auto out = brute_force_triples(s.robot, s);
    bool face = false;
    for (auto& t : out) face |= t.tag == ClassTag::FACE;
    REQUIRE(face);
  }
}
