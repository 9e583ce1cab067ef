#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "freespace/envelope.hpp"

using namespace freespace;

static Rat Q(const char* s) { return parse_rat(s); }

namespace {

bool same_env(const Envelope& a, const Envelope& b) {
  if (a.pieces.size() != b.pieces.size()) return false;
  for (size_t i = 0; i < a.pieces.size(); ++i) {
    if (a.pieces[i].x0 != b.pieces[i].x0 || a.pieces[i].x1 != b.pieces[i].x1 ||
        a.pieces[i].seg != b.pieces[i].seg)
      return false;
  }
  if (a.breakpoints.size() != b.breakpoints.size()) return false;
  for (size_t i = 0; i < a.breakpoints.size(); ++i) {
    if (!(a.breakpoints[i].p == b.breakpoints[i].p) ||
        a.breakpoints[i].kind != b.breakpoints[i].kind)
      return false;
  }
  return true;
}

void check_env_invariants(const Envelope& env) {
  for (auto& p : env.pieces) REQUIRE(p.x0 < p.x1);
  for (size_t i = 0; i + 1 < env.pieces.size(); ++i)
    REQUIRE(env.pieces[i].x1 <= env.pieces[i + 1].x0);
  // Each piece attains the extreme among covering segments at its midpoint.
  for (auto& p : env.pieces) {
    Rat xm = (p.x0 + p.x1) / 2;
    Rat val = seg2_value_at(env.segments[p.seg], xm);
    const Seg2& win = env.segments[p.seg];
    REQUIRE(win.a.x <= xm);
    REQUIRE(xm <= win.b.x);
    for (auto& s : env.segments) {
      if (s.a.x > xm || s.b.x < xm) continue;
      Rat y = seg2_value_at(s, xm);
      if (env.side == EnvSide::Lower)
        REQUIRE(val <= y);
      else
        REQUIRE(val >= y);
    }
  }
}

std::mt19937_64 rng_fixture(uint64_t seed) { return std::mt19937_64(seed); }

Seg2 random_seg(std::mt19937_64& rng, int span) {
  std::uniform_int_distribution<int> d(-span, span);
  while (true) {
    P2 a{d(rng), d(rng)}, b{d(rng), d(rng)};
    if (a.x == b.x) continue;
    return a.x < b.x ? Seg2(a, b) : Seg2(b, a);
  }
}

SegFamily random_family(std::mt19937_64& rng, int n, int span) {
  SegFamily f;
  for (int i = 0; i < n; ++i) f.segments.push_back(random_seg(rng, span));
  return f;
}

// Greedy noncrossing family: reject candidates that cross accepted segments.
SegFamily random_noncrossing_family(std::mt19937_64& rng, int n, int span) {
  SegFamily f;
  int guard = 0;
  while (static_cast<int>(f.segments.size()) < n && guard < 1000) {
    ++guard;
    Seg2 c = random_seg(rng, span);
    SegFamily probe = f;
    probe.segments.push_back(c);
    if (family_noncrossing(probe)) f.segments.push_back(c);
  }
  return f;
}

// Independent filter: every pairwise transversal crossing, membership tested
// pointwise against the naive envelopes.
std::vector<P2> naive_cross_filter(const SegFamily& S1, EnvSide side1, const SegFamily& S2,
                                   EnvSide side2) {
  auto norm = [](Seg2 s) { return s.a.x < s.b.x ? s : Seg2(s.b, s.a); };
  Envelope e1 = naive_envelope(S1, side1);
  Envelope e2 = naive_envelope(S2, side2);
  std::vector<P2> out;
  for (auto& s1r : S1.segments)
    for (auto& s2r : S2.segments) {
      Seg2 s1 = norm(s1r), s2 = norm(s2r);
      auto r = seg2_intersect(s1, s2);
      if (!std::holds_alternative<Seg2Point>(r)) continue;
      P2 p = std::get<Seg2Point>(r).p;
      if (cross(s1.b - s1.a, s2.b - s2.a) == 0) continue;
      if (!(s1.a.x < p.x && p.x < s1.b.x)) continue;
      if (!(s2.a.x < p.x && p.x < s2.b.x)) continue;
      auto v1 = envelope_value(e1, p.x);
      auto v2 = envelope_value(e2, p.x);
      if (!v1 || *v1 != p.y) continue;
      if (!v2 || *v2 != p.y) continue;
      out.push_back(p);
    }
  std::sort(out.begin(), out.end(), [](const P2& a, const P2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

TEST_CASE("empty and single-segment envelopes") {
  SegFamily empty;
  auto e = envelope(empty, EnvSide::Lower);
  CHECK(e.pieces.empty());
  CHECK(e.breakpoints.empty());

  SegFamily one;
  one.segments.push_back({{0, 0}, {4, 2}});
  auto e1 = naive_envelope(one, EnvSide::Lower);
  REQUIRE(e1.pieces.size() == 1);
  CHECK(e1.pieces[0].x0 == 0);
  CHECK(e1.pieces[0].x1 == 4);
  CHECK(e1.pieces[0].seg == 0);
  CHECK(e1.breakpoints.empty());
  CHECK(same_env(envelope(one, EnvSide::Lower), e1));
}

TEST_CASE("two-segment crossing envelope") {
  SegFamily f;
  f.segments.push_back({{0, 5}, {10, 5}});   // horizontal
  f.segments.push_back({{0, 0}, {10, 10}});  // diagonal
  auto e = envelope(f, EnvSide::Lower);
  REQUIRE(e.pieces.size() == 2);
  CHECK(e.pieces[0].seg == 1);
  CHECK(e.pieces[0].x0 == 0);
  CHECK(e.pieces[0].x1 == 5);
  CHECK(e.pieces[1].seg == 0);
  CHECK(e.pieces[1].x1 == 10);
  REQUIRE(e.breakpoints.size() == 1);
  CHECK(e.breakpoints[0].p == P2(5, 5));
  CHECK(e.breakpoints[0].kind == BreakKind::Crossing);

  auto u = envelope(f, EnvSide::Upper);
  REQUIRE(u.pieces.size() == 2);
  CHECK(u.pieces[0].seg == 0);
  CHECK(u.pieces[1].seg == 1);

  CHECK(same_env(e, naive_envelope(f, EnvSide::Lower)));
  CHECK(same_env(u, naive_envelope(f, EnvSide::Upper)));
}

TEST_CASE("stacked segments hide the far one") {
  SegFamily f;
  f.segments.push_back({{0, 3}, {10, 3}});
  f.segments.push_back({{0, 0}, {10, 0}});
  auto e = envelope(f, EnvSide::Lower);
  REQUIRE(e.pieces.size() == 1);
  CHECK(e.pieces[0].seg == 1);
  CHECK(e.breakpoints.empty());
  auto n = naive_envelope(f, EnvSide::Lower);
  CHECK(same_env(e, n));
}

TEST_CASE("gap between segments") {
  SegFamily f;
  f.segments.push_back({{0, 0}, {1, 0}});
  f.segments.push_back({{2, 1}, {3, 1}});
  auto e = envelope(f, EnvSide::Lower);
  REQUIRE(e.pieces.size() == 2);
  CHECK(e.pieces[0].x1 == 1);
  CHECK(e.pieces[1].x0 == 2);
  CHECK(e.breakpoints.empty());  // transitions across gaps are not breakpoints
  CHECK(!envelope_value(e, Q("3/2")).has_value());
  CHECK(envelope_value(e, Q("1/2")) == Rat(0));
}

TEST_CASE("endpoint-kind breakpoint") {
  SegFamily f;
  f.segments.push_back({{0, 0}, {5, 0}});
  f.segments.push_back({{5, 0}, {10, 2}});
  auto e = envelope(f, EnvSide::Lower);
  REQUIRE(e.pieces.size() == 2);
  REQUIRE(e.breakpoints.size() == 1);
  CHECK(e.breakpoints[0].p == P2(5, 0));
  CHECK(e.breakpoints[0].kind == BreakKind::Endpoint);
}

TEST_CASE("vertical segments are rejected") {
  SegFamily f;
  f.segments.push_back({{1, 0}, {1, 5}});
  CHECK_THROWS_AS(envelope(f, EnvSide::Lower), VerticalSegment);
  CHECK_THROWS_AS(naive_envelope(f, EnvSide::Upper), VerticalSegment);
  SegFamily g;
  g.segments.push_back({{2, 2}, {2, 2}});  // degenerate counts as vertical
  CHECK_THROWS_AS(envelope(g, EnvSide::Lower), VerticalSegment);
}

TEST_CASE("envelope matches naive oracle on fuzz corpus") {
  std::mt19937_64 rng = rng_fixture(20260816);
  long long worst_ratio_num = 0, worst_n = 1;
  for (int it = 0; it < 500; ++it) {
    int n = 1 + static_cast<int>(rng() % 10);
    SegFamily f = random_family(rng, n, 12);
    for (EnvSide side : {EnvSide::Lower, EnvSide::Upper}) {
      Envelope a = envelope(f, side);
      Envelope b = naive_envelope(f, side);
      REQUIRE(same_env(a, b));
      check_env_invariants(a);
      REQUIRE(static_cast<long long>(a.breakpoints.size()) <= 6 * n);
      if (static_cast<long long>(a.breakpoints.size()) * worst_n >
          worst_ratio_num * n) {
        worst_ratio_num = a.breakpoints.size();
        worst_n = n;
      }
    }
  }
  INFO("worst breakpoints/n = " << worst_ratio_num << "/" << worst_n);
  SUCCEED();
}

TEST_CASE("envelope matches naive oracle on a large family") {
  std::mt19937_64 rng = rng_fixture(99);
  SegFamily f = random_family(rng, 200, 40);
  Envelope a = envelope(f, EnvSide::Lower);
  Envelope b = naive_envelope(f, EnvSide::Lower);
  REQUIRE(same_env(a, b));
  check_env_invariants(a);
  CHECK(static_cast<long long>(a.breakpoints.size()) <= 6 * 200);
}

TEST_CASE("noncrossing family detection") {
  SegFamily f;
  f.segments.push_back({{0, 0}, {4, 4}});
  f.segments.push_back({{4, 4}, {8, 0}});  // endpoint touch allowed
  CHECK(family_noncrossing(f));
  f.segments.push_back({{0, 4}, {8, 2}});  // crosses both
  CHECK(!family_noncrossing(f));

  SegFamily g;
  g.segments.push_back({{0, 0}, {4, 0}});
  g.segments.push_back({{2, 0}, {6, 0}});  // overlap
  CHECK(!family_noncrossing(g));

  SegFamily h;
  h.segments.push_back({{0, 0}, {4, 0}});
  h.segments.push_back({{2, 0}, {6, 4}});  // endpoint of one interior to other
  CHECK(!family_noncrossing(h));
}

TEST_CASE("noncrossing envelope breakpoints are endpoint kind") {
  std::mt19937_64 rng = rng_fixture(5150);
  for (int it = 0; it < 60; ++it) {
    SegFamily f = random_noncrossing_family(rng, 2 + static_cast<int>(rng() % 7), 15);
    REQUIRE(family_noncrossing(f));
    for (EnvSide side : {EnvSide::Lower, EnvSide::Upper}) {
      Envelope e = envelope(f, side);
      for (auto& b : e.breakpoints) CHECK(b.kind == BreakKind::Endpoint);
    }
  }
}

TEST_CASE("visible crossings frozen example") {
  SegFamily S1;
  S1.segments.push_back({{0, 0}, {10, 0}});
  S1.segments.push_back({{0, 5}, {10, 5}});
  SegFamily S2;
  S2.segments.push_back({{0, -1}, {10, 9}});
  auto pts = cross_envelope_visible(S1, EnvSide::Lower, S2, EnvSide::Lower);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0] == P2(1, 0));

  auto detail = cross_envelope_visible_detail(S1, EnvSide::Lower, S2, EnvSide::Lower);
  REQUIRE(detail.size() == 1);
  CHECK(detail[0].id1 == 0);
  CHECK(detail[0].id2 == 0);
}

TEST_CASE("singleton families see their crossing from every side") {
  SegFamily S1, S2;
  S1.segments.push_back({{0, 0}, {4, 4}});
  S2.segments.push_back({{0, 4}, {4, 0}});
  for (EnvSide a : {EnvSide::Lower, EnvSide::Upper})
    for (EnvSide b : {EnvSide::Lower, EnvSide::Upper}) {
      auto pts = cross_envelope_visible(S1, a, S2, b);
      REQUIRE(pts.size() == 1);
      CHECK(pts[0] == P2(2, 2));
    }
}

TEST_CASE("endpoint touches are not visible crossings") {
  SegFamily S1, S2;
  S1.segments.push_back({{0, 0}, {4, 4}});
  S2.segments.push_back({{4, 4}, {8, 0}});
  for (EnvSide a : {EnvSide::Lower, EnvSide::Upper})
    for (EnvSide b : {EnvSide::Lower, EnvSide::Upper})
      CHECK(cross_envelope_visible(S1, a, S2, b).empty());
  // Interior-to-one endpoint touch without order exchange is also excluded.
  SegFamily S3;
  S3.segments.push_back({{2, 2}, {6, 6}});
  CHECK(cross_envelope_visible(S1, EnvSide::Lower, S3, EnvSide::Lower).empty());
}

TEST_CASE("visible crossings match the naive filter on fuzz corpus") {
  std::mt19937_64 rng = rng_fixture(777);
  for (int it = 0; it < 200; ++it) {
    SegFamily S1 = random_family(rng, 1 + static_cast<int>(rng() % 8), 10);
    SegFamily S2 = random_family(rng, 1 + static_cast<int>(rng() % 8), 10);
    EnvSide a = (rng() & 1) ? EnvSide::Lower : EnvSide::Upper;
    EnvSide b = (rng() & 1) ? EnvSide::Lower : EnvSide::Upper;
    auto got = cross_envelope_visible(S1, a, S2, b);
    auto want = naive_cross_filter(S1, a, S2, b);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) REQUIRE(got[i] == want[i]);
  }
}

TEST_CASE("visible crossing count bounds") {
  std::mt19937_64 rng = rng_fixture(31337);
  SECTION("both families noncrossing") {
    for (int it = 0; it < 80; ++it) {
      SegFamily S1 = random_noncrossing_family(rng, 2 + static_cast<int>(rng() % 6), 12);
      SegFamily S2 = random_noncrossing_family(rng, 2 + static_cast<int>(rng() % 6), 12);
      long long n = static_cast<long long>(S1.segments.size() + S2.segments.size());
      for (EnvSide a : {EnvSide::Lower, EnvSide::Upper})
        for (EnvSide b : {EnvSide::Lower, EnvSide::Upper}) {
          auto pts = cross_envelope_visible(S1, a, S2, b);
          REQUIRE(static_cast<long long>(pts.size()) <= crossing_bound_both_noncrossing(n));
        }
    }
  }
  SECTION("only S1 noncrossing") {
    for (int it = 0; it < 80; ++it) {
      SegFamily S1 = random_noncrossing_family(rng, 2 + static_cast<int>(rng() % 6), 12);
      SegFamily S2 = random_family(rng, 2 + static_cast<int>(rng() % 6), 12);
      long long n = static_cast<long long>(S1.segments.size() + S2.segments.size());
      for (EnvSide a : {EnvSide::Lower, EnvSide::Upper})
        for (EnvSide b : {EnvSide::Lower, EnvSide::Upper}) {
          auto pts = cross_envelope_visible(S1, a, S2, b);
          REQUIRE(static_cast<long long>(pts.size()) <= crossing_bound_one_noncrossing(n));
        }
    }
  }
}

TEST_CASE("inverse ackermann") {
  CHECK(inverse_ackermann(1) == 1);
  CHECK(inverse_ackermann(2) == 1);
  CHECK(inverse_ackermann(3) == 2);
  CHECK(inverse_ackermann(16) == 2);
  CHECK(inverse_ackermann(17) == 3);
  CHECK(inverse_ackermann(1000000) == 3);
  CHECK(inverse_ackermann(1000000000000ull) == 3);
  CHECK(inverse_ackermann(~0ull) == 3);
}
