#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace dyadisc {

// Exact arithmetic backbone. Every volume, count, and discrepancy value at
// dyadic arguments is an exact rational; floating point appears only when a
// q-th root or a non-integer exponent forces it.
using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Int pow2_int(unsigned e) { return Int(1) << e; }

// 2^e for signed e.
inline Rational pow2(long e) {
  if (e >= 0) return Rational(pow2_int(static_cast<unsigned>(e)));
  return Rational(Int(1), pow2_int(static_cast<unsigned>(-e)));
}

inline Rational rat_pow(const Rational& r, unsigned n) {
  Rational acc(1);
  Rational base = r;
  while (n > 0) {
    if (n & 1u) acc *= base;
    base *= base;
    n >>= 1;
  }
  return acc;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// Canonical lowest-terms "p/q" form; the denominator is kept even when 1 so
// the format round-trips through one parser.
inline std::string to_fraction_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace dyadisc
