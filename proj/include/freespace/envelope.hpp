#pragma once

#include <optional>
#include <stdexcept>

#include "freespace/geom.hpp"

namespace freespace {

struct VerticalSegment : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class EnvSide { Lower, Upper };

struct SegFamily {
  std::vector<Seg2> segments;
};

// One maximal interval on which a single segment attains the envelope.
struct EnvPiece {
  Rat x0, x1;
  int seg;
};

enum class BreakKind { Endpoint, Crossing };

struct EnvBreakpoint {
  P2 p;
  BreakKind kind;
};

struct Envelope {
  EnvSide side = EnvSide::Lower;
  std::vector<Seg2> segments;  // normalized copies (a.x < b.x), family order
  std::vector<EnvPiece> pieces;
  std::vector<EnvBreakpoint> breakpoints;
};

namespace detail {

inline std::vector<Seg2> normalize_family(const std::vector<Seg2>& in) {
  std::vector<Seg2> out;
  out.reserve(in.size());
  for (auto& s : in) {
    if (s.a.x == s.b.x) throw VerticalSegment("vertical segment in family");
    out.push_back(s.a.x < s.b.x ? s : Seg2(s.b, s.a));
  }
  return out;
}

inline void emit_piece(std::vector<EnvPiece>& out, const Rat& x0, const Rat& x1, int seg) {
  if (x0 >= x1) return;
  if (!out.empty() && out.back().seg == seg && out.back().x1 == x0) {
    out.back().x1 = x1;
    return;
  }
  out.push_back({x0, x1, seg});
}

// Lower-envelope merge of two piece lists over the same segment array.
inline std::vector<EnvPiece> merge_lower(const std::vector<Seg2>& segs,
                                         const std::vector<EnvPiece>& A,
                                         const std::vector<EnvPiece>& B) {
  if (A.empty()) return B;
  if (B.empty()) return A;
  std::vector<Rat> xs;
  for (auto& p : A) {
    xs.push_back(p.x0);
    xs.push_back(p.x1);
  }
  for (auto& p : B) {
    xs.push_back(p.x0);
    xs.push_back(p.x1);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::vector<EnvPiece> out;
  size_t ia = 0, ib = 0;
  for (size_t k = 0; k + 1 < xs.size(); ++k) {
    const Rat& xa = xs[k];
    const Rat& xb = xs[k + 1];
    while (ia < A.size() && A[ia].x1 <= xa) ++ia;
    while (ib < B.size() && B[ib].x1 <= xa) ++ib;
    bool hasA = ia < A.size() && A[ia].x0 <= xa;
    bool hasB = ib < B.size() && B[ib].x0 <= xa;
    if (!hasA && !hasB) continue;
    if (!hasB) {
      emit_piece(out, xa, xb, A[ia].seg);
      continue;
    }
    if (!hasA) {
      emit_piece(out, xa, xb, B[ib].seg);
      continue;
    }
    const Seg2& sa = segs[A[ia].seg];
    const Seg2& sb = segs[B[ib].seg];
    Rat ya0 = seg2_value_at(sa, xa), yb0 = seg2_value_at(sb, xa);
    Rat ya1 = seg2_value_at(sa, xb), yb1 = seg2_value_at(sb, xb);
    int c0 = sgn(ya0 - yb0), c1 = sgn(ya1 - yb1);
    if (c0 == 0 && c1 == 0) {
      // Identical over the slab; deterministic tie break.
      emit_piece(out, xa, xb, std::min(A[ia].seg, B[ib].seg));
    } else if (c0 <= 0 && c1 <= 0) {
      emit_piece(out, xa, xb, A[ia].seg);
    } else if (c0 >= 0 && c1 >= 0) {
      emit_piece(out, xa, xb, B[ib].seg);
    } else {
      // Transversal crossing strictly inside the slab.
      Rat ma = (sa.b.y - sa.a.y) / (sa.b.x - sa.a.x);
      Rat mb = (sb.b.y - sb.a.y) / (sb.b.x - sb.a.x);
      Rat ba = sa.a.y - ma * sa.a.x;
      Rat bb = sb.a.y - mb * sb.a.x;
      Rat xc = (bb - ba) / (ma - mb);
      int first = c0 < 0 ? A[ia].seg : B[ib].seg;
      int second = c0 < 0 ? B[ib].seg : A[ia].seg;
      emit_piece(out, xa, xc, first);
      emit_piece(out, xc, xb, second);
    }
  }
  return out;
}

inline std::vector<EnvPiece> lower_rec(const std::vector<Seg2>& segs, int lo, int hi) {
  if (hi - lo == 1) return {{segs[lo].a.x, segs[lo].b.x, lo}};
  int mid = (lo + hi) / 2;
  return merge_lower(segs, lower_rec(segs, lo, mid), lower_rec(segs, mid, hi));
}

}  // namespace detail

// Exact envelope via divide-and-conquer merge.
inline Envelope envelope(const SegFamily& fam, EnvSide side) {
  Envelope env;
  env.side = side;
  env.segments = detail::normalize_family(fam.segments);
  if (env.segments.empty()) return env;
  std::vector<Seg2> work = env.segments;
  if (side == EnvSide::Upper)
    for (auto& s : work) {
      s.a.y = -s.a.y;
      s.b.y = -s.b.y;
    }
  env.pieces = detail::lower_rec(work, 0, static_cast<int>(work.size()));
  for (size_t i = 0; i + 1 < env.pieces.size(); ++i) {
    const EnvPiece& p = env.pieces[i];
    const EnvPiece& q = env.pieces[i + 1];
    if (p.x1 != q.x0) continue;
    const Rat& x = p.x1;
    Rat y = seg2_value_at(env.segments[p.seg], x);
    const Seg2& s1 = env.segments[p.seg];
    const Seg2& s2 = env.segments[q.seg];
    bool interior1 = s1.a.x < x && x < s1.b.x;
    bool interior2 = s2.a.x < x && x < s2.b.x;
    env.breakpoints.push_back(
        {P2{x, y}, interior1 && interior2 ? BreakKind::Crossing : BreakKind::Endpoint});
  }
  return env;
}

// Independent oracle: slab-midpoint evaluation over all candidate x-values.
inline Envelope naive_envelope(const SegFamily& fam, EnvSide side) {
  Envelope env;
  env.side = side;
  env.segments = detail::normalize_family(fam.segments);
  int n = static_cast<int>(env.segments.size());
  if (n == 0) return env;
  std::vector<Rat> xs;
  for (auto& s : env.segments) {
    xs.push_back(s.a.x);
    xs.push_back(s.b.x);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto r = seg2_intersect(env.segments[i], env.segments[j]);
      if (std::holds_alternative<Seg2Point>(r)) {
        xs.push_back(std::get<Seg2Point>(r).p.x);
      } else if (std::holds_alternative<Seg2Overlap>(r)) {
        xs.push_back(std::get<Seg2Overlap>(r).s.a.x);
        xs.push_back(std::get<Seg2Overlap>(r).s.b.x);
      }
    }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<EnvPiece> pieces;
  for (size_t k = 0; k + 1 < xs.size(); ++k) {
    Rat xm = (xs[k] + xs[k + 1]) / 2;
    int best = -1;
    Rat besty;
    for (int i = 0; i < n; ++i) {
      const Seg2& s = env.segments[i];
      if (s.a.x > xm || s.b.x < xm) continue;
      Rat y = seg2_value_at(s, xm);
      if (side == EnvSide::Upper) y = -y;
      if (best < 0 || y < besty) {
        best = i;
        besty = y;
      }
    }
    if (best >= 0) detail::emit_piece(pieces, xs[k], xs[k + 1], best);
  }
  env.pieces = pieces;
  for (size_t i = 0; i + 1 < env.pieces.size(); ++i) {
    const EnvPiece& p = env.pieces[i];
    const EnvPiece& q = env.pieces[i + 1];
    if (p.x1 != q.x0) continue;
    const Rat& x = p.x1;
    Rat y = seg2_value_at(env.segments[p.seg], x);
    const Seg2& s1 = env.segments[p.seg];
    const Seg2& s2 = env.segments[q.seg];
    bool interior1 = s1.a.x < x && x < s1.b.x;
    bool interior2 = s2.a.x < x && x < s2.b.x;
    env.breakpoints.push_back(
        {P2{x, y}, interior1 && interior2 ? BreakKind::Crossing : BreakKind::Endpoint});
  }
  return env;
}

// Envelope value at x (vertical positions of gaps are undefined).
inline std::optional<Rat> envelope_value(const Envelope& env, const Rat& x) {
  for (auto& p : env.pieces)
    if (p.x0 <= x && x <= p.x1) return seg2_value_at(env.segments[p.seg], x);
  return std::nullopt;
}

// True when no two segments cross: shared points must be endpoints of both.
inline bool family_noncrossing(const SegFamily& fam) {
  auto segs = detail::normalize_family(fam.segments);
  int n = static_cast<int>(segs.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto r = seg2_intersect(segs[i], segs[j]);
      if (std::holds_alternative<Seg2Empty>(r)) continue;
      if (std::holds_alternative<Seg2Overlap>(r)) return false;
      const P2& p = std::get<Seg2Point>(r).p;
      bool end_i = p == segs[i].a || p == segs[i].b;
      bool end_j = p == segs[j].a || p == segs[j].b;
      if (!end_i || !end_j) return false;
    }
  return true;
}

struct CrossEvent {
  P2 p;
  int id1, id2;  // segment indices in S1 and S2
};

// Transversal crossings s1 x s2 that lie on both requested envelopes.
// A crossing counts only when the segments exchange vertical order there,
// i.e. the point is x-interior to both segments.
inline std::vector<CrossEvent> cross_envelope_visible_detail(const SegFamily& S1, EnvSide side1,
                                                             const SegFamily& S2,
                                                             EnvSide side2) {
  Envelope e1 = envelope(S1, side1);
  Envelope e2 = envelope(S2, side2);
  std::vector<Rat> xs;
  for (auto& p : e1.pieces) {
    xs.push_back(p.x0);
    xs.push_back(p.x1);
  }
  for (auto& p : e2.pieces) {
    xs.push_back(p.x0);
    xs.push_back(p.x1);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<CrossEvent> events;
  size_t ia = 0, ib = 0;
  for (size_t k = 0; k + 1 < xs.size(); ++k) {
    const Rat& xa = xs[k];
    const Rat& xb = xs[k + 1];
    while (ia < e1.pieces.size() && e1.pieces[ia].x1 <= xa) ++ia;
    while (ib < e2.pieces.size() && e2.pieces[ib].x1 <= xa) ++ib;
    if (ia >= e1.pieces.size() || e1.pieces[ia].x0 > xa) continue;
    if (ib >= e2.pieces.size() || e2.pieces[ib].x0 > xa) continue;
    int id1 = e1.pieces[ia].seg, id2 = e2.pieces[ib].seg;
    const Seg2& s1 = e1.segments[id1];
    const Seg2& s2 = e2.segments[id2];
    Seg2 c1(P2{xa, seg2_value_at(s1, xa)}, P2{xb, seg2_value_at(s1, xb)});
    Seg2 c2(P2{xa, seg2_value_at(s2, xa)}, P2{xb, seg2_value_at(s2, xb)});
    auto r = seg2_intersect(c1, c2);
    if (!std::holds_alternative<Seg2Point>(r)) continue;
    P2 p = std::get<Seg2Point>(r).p;
    if (cross(s1.b - s1.a, s2.b - s2.a) == 0) continue;
    if (!(s1.a.x < p.x && p.x < s1.b.x)) continue;
    if (!(s2.a.x < p.x && p.x < s2.b.x)) continue;
    bool dup = false;
    for (auto& e : events)
      if (e.p == p && e.id1 == id1 && e.id2 == id2) dup = true;
    if (!dup) events.push_back({p, id1, id2});
  }
  std::sort(events.begin(), events.end(), [](const CrossEvent& a, const CrossEvent& b) {
    if (a.p.x != b.p.x) return a.p.x < b.p.x;
    if (a.p.y != b.p.y) return a.p.y < b.p.y;
    return std::tie(a.id1, a.id2) < std::tie(b.id1, b.id2);
  });
  return events;
}

inline std::vector<P2> cross_envelope_visible(const SegFamily& S1, EnvSide side1,
                                              const SegFamily& S2, EnvSide side2) {
  auto events = cross_envelope_visible_detail(S1, side1, S2, side2);
  std::vector<P2> pts;
  for (auto& e : events)
    if (pts.empty() || !(pts.back() == e.p)) pts.push_back(e.p);
  return pts;
}

// Combinatorial ceilings asserted by the test suite.
inline long long crossing_bound_both_noncrossing(long long n) { return 4 * (2 * n - 1); }
inline long long crossing_bound_one_noncrossing(long long n) { return 12 * n; }

namespace detail {
constexpr unsigned long long kAckCap = 1ull << 62;

inline unsigned long long ack_capped(unsigned long long i, unsigned long long j) {
  if (i == 1) return j >= 62 ? kAckCap : (1ull << j);
  if (i == 2) {
    // A(2,1)=4, A(2,j)=2^A(2,j-1): evaluate iteratively to bound depth.
    unsigned long long t = 4;
    for (unsigned long long k = 2; k <= j; ++k) {
      if (t >= 62) return kAckCap;
      t = 1ull << t;
    }
    return t;
  }
  if (j == 1) return ack_capped(i - 1, 2);
  unsigned long long inner = ack_capped(i, j - 1);
  if (inner >= kAckCap) return kAckCap;
  return ack_capped(i - 1, inner);
}
}  // namespace detail

// Smallest i >= 1 with A(i,i) >= n. A(1,j)=2^j, A(i,1)=A(i-1,2),
// A(i,j)=A(i-1,A(i,j-1)). Values beyond 2^62 saturate, which cannot change
// the answer for any representable n.
inline unsigned inverse_ackermann(unsigned long long n) {
  if (n > detail::kAckCap) n = detail::kAckCap;
  for (unsigned i = 1;; ++i) {
    if (detail::ack_capped(i, i) >= n) return i;
  }
}

}  // namespace freespace
