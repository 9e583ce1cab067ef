#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace freespace {

// Exact rational scalar used throughout. GMP-backed; always canonical
// (gcd(num,den)==1, den>0), so equality is plain comparison.
using Rat = boost::multiprecision::mpq_rational;
using Int = boost::multiprecision::mpz_int;

inline Int rat_num(const Rat& q) { return numerator(q); }
inline Int rat_den(const Rat& q) { return denominator(q); }

inline int sgn(const Rat& q) {
  if (q > 0) return 1;
  if (q < 0) return -1;
  return 0;
}

inline Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

struct RatParseError : std::runtime_error {
  explicit RatParseError(const std::string& what) : std::runtime_error(what) {}
};

// Accepts "p", "-p", "p/q" with optional sign on p; q must be positive.
inline Rat parse_rat(const std::string& s) {
  if (s.empty()) throw RatParseError("empty rational literal");
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    try {
      return Rat(Int(s));
    } catch (const std::exception&) {
      throw RatParseError("malformed rational: " + s);
    }
  }
  std::string ns = s.substr(0, slash);
  std::string ds = s.substr(slash + 1);
  if (ns.empty() || ds.empty()) throw RatParseError("malformed rational: " + s);
  Int n, d;
  try {
    n = Int(ns);
    d = Int(ds);
  } catch (const std::exception&) {
    throw RatParseError("malformed rational: " + s);
  }
  if (d <= 0) throw RatParseError("nonpositive denominator: " + s);
  Rat r(n);
  r /= Rat(d);
  return r;
}

// Canonical serialization: always "num/den" (den is 1 for integers).
inline std::string rat_str(const Rat& q) {
  return rat_num(q).str() + "/" + rat_den(q).str();
}

inline double to_double(const Rat& q) { return q.convert_to<double>(); }

// Outward-rounded double enclosures. convert_to<double> rounds to nearest,
// so one step outward in each direction encloses the exact value.
inline double dbl_lo(const Rat& q) {
  double d = to_double(q);
  return std::nextafter(d, -std::numeric_limits<double>::infinity());
}
inline double dbl_hi(const Rat& q) {
  double d = to_double(q);
  return std::nextafter(d, std::numeric_limits<double>::infinity());
}

inline Int floor_rat(const Rat& q) {
  Int n = rat_num(q), d = rat_den(q);
  Int f = n / d;
  if (n < 0 && f * d != n) f -= 1;
  return f;
}

inline Int ceil_rat(const Rat& q) {
  Int n = rat_num(q), d = rat_den(q);
  Int c = n / d;
  if (n > 0 && c * d != n) c += 1;
  return c;
}

}  // namespace freespace
