#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rational.hpp"

namespace dyadisc {

inline constexpr unsigned kMaxPrecision = 64;
inline constexpr unsigned kDefaultPrecision = 64;

// Mask of the w low bits, valid for 0 <= w <= 64.
constexpr std::uint64_t low_bits(unsigned w) {
  return w >= 64 ? ~0ull : ((std::uint64_t{1} << w) - 1);
}

// A dyadic rational in [0,1): value = mantissa * 2^-precision. The binary
// expansion 0.b1 b2 ... b_w is the mantissa read from its most significant
// bit down, so bit a (1-based) is mantissa >> (precision - a) & 1.
struct DyadicScalar {
  std::uint64_t mantissa = 0;
  unsigned precision = kDefaultPrecision;
};

inline DyadicScalar make_scalar(std::uint64_t mantissa, unsigned precision) {
  if (precision > kMaxPrecision)
    throw std::invalid_argument("dyadic precision exceeds 64 bits");
  if (precision < 64 && (mantissa >> precision) != 0)
    throw std::invalid_argument("mantissa out of range for precision");
  return DyadicScalar{mantissa, precision};
}

// Mantissa rescaled to precision w >= y.precision. The shift can formally be
// 64 (precision 0), where the mantissa is necessarily 0.
inline std::uint64_t mantissa_at(const DyadicScalar& y, unsigned w) {
  unsigned shift = w - y.precision;
  return shift >= 64 ? 0 : (y.mantissa << shift);
}

// floor(y * 2^a) for any level a <= 64; exact for both coarser and finer a.
inline std::uint64_t floor_mantissa(const DyadicScalar& y, unsigned a) {
  if (a <= y.precision) return y.mantissa >> (y.precision - a);
  return mantissa_at(y, a);
}

inline bool equal_value(const DyadicScalar& a, const DyadicScalar& b) {
  unsigned w = std::max(a.precision, b.precision);
  return mantissa_at(a, w) == mantissa_at(b, w);
}

inline bool less_value(const DyadicScalar& a, const DyadicScalar& b) {
  unsigned w = std::max(a.precision, b.precision);
  return mantissa_at(a, w) < mantissa_at(b, w);
}

inline Rational to_rational(const DyadicScalar& y) {
  return Rational(Int(y.mantissa), pow2_int(y.precision));
}

inline double to_double(const DyadicScalar& y) {
  return static_cast<double>(y.mantissa) * std::pow(2.0, -double(y.precision));
}

// bit a of the expansion y = sum eta_a 2^-a, 1-based from the most
// significant fractional bit; 0 beyond the stored precision.
inline int bit(const DyadicScalar& y, unsigned a) {
  if (a == 0) throw std::invalid_argument("bit index is 1-based");
  if (a > y.precision) return 0;
  return static_cast<int>((y.mantissa >> (y.precision - a)) & 1u);
}

inline DyadicScalar xor_shift(const DyadicScalar& x, const DyadicScalar& t) {
  unsigned w = std::max(x.precision, t.precision);
  return DyadicScalar{mantissa_at(x, w) ^ mantissa_at(t, w), w};
}

// Truncation to the grid Q(2^s); the value is unchanged when s covers the
// whole mantissa, so the stored precision never grows.
inline DyadicScalar project(const DyadicScalar& y, unsigned s) {
  if (s >= y.precision) return y;
  return DyadicScalar{y.mantissa >> (y.precision - s), s};
}

// theta_s(y) = (y - y^(s)) * 2^s, the tail of the expansion rescaled to [0,1).
inline DyadicScalar remainder(const DyadicScalar& y, unsigned s) {
  if (s > y.precision)
    throw std::invalid_argument("remainder: s exceeds stored precision");
  unsigned r = y.precision - s;
  return DyadicScalar{y.mantissa & low_bits(r), r};
}

// Indicator of x and y sharing one cell of the 2^-s grid.
inline int kernel_delta(const DyadicScalar& x, const DyadicScalar& y, unsigned s) {
  if (s >= kMaxPrecision) return equal_value(x, y) ? 1 : 0;
  return floor_mantissa(x, s) == floor_mantissa(y, s) ? 1 : 0;
}

inline int rademacher(unsigned a, const DyadicScalar& y) {
  if (a == 0) return 1;
  return 1 - 2 * bit(y, a);
}

struct DyadicPoint {
  std::vector<DyadicScalar> coords;

  unsigned dim() const { return static_cast<unsigned>(coords.size()); }
};

inline DyadicPoint xor_shift(const DyadicPoint& x, const DyadicPoint& t) {
  if (x.coords.size() != t.coords.size())
    throw std::invalid_argument("xor_shift: dimension mismatch");
  DyadicPoint r;
  r.coords.reserve(x.coords.size());
  for (std::size_t j = 0; j < x.coords.size(); ++j)
    r.coords.push_back(xor_shift(x.coords[j], t.coords[j]));
  return r;
}

inline DyadicPoint project(const DyadicPoint& y, unsigned s) {
  DyadicPoint r;
  r.coords.reserve(y.coords.size());
  for (const auto& c : y.coords) r.coords.push_back(project(c, s));
  return r;
}

inline DyadicPoint remainder(const DyadicPoint& y, unsigned s) {
  DyadicPoint r;
  r.coords.reserve(y.coords.size());
  for (const auto& c : y.coords) r.coords.push_back(remainder(c, s));
  return r;
}

// r_A(Y) = prod_j r_{a_j}(y_j) over a level vector A (entries 0 allowed).
inline int rademacher_multi(const std::vector<unsigned>& levels, const DyadicPoint& y) {
  if (levels.size() != y.coords.size())
    throw std::invalid_argument("rademacher_multi: dimension mismatch");
  int sign = 1;
  for (std::size_t j = 0; j < levels.size(); ++j)
    sign *= rademacher(levels[j], y.coords[j]);
  return sign;
}

// Count of nonzero entries of a level vector.
inline unsigned kappa(const std::vector<unsigned>& levels) {
  return static_cast<unsigned>(
      std::count_if(levels.begin(), levels.end(), [](unsigned a) { return a != 0; }));
}

enum class BoxFlavor { Delta, Pi };

// Delta flavor: the box prod_j [m_j 2^-a_j, (m_j+1) 2^-a_j). Pi flavor: the
// binary shell prod_j Pi_{a_j} with Pi_0 = [0,1) and, for a >= 1,
// Pi_a = {z : bit a of z is 1, bits before a are 0} = [2^-a, 2^{1-a}).
// Offsets are ignored for the Pi flavor.
struct ElementaryBox {
  std::vector<unsigned> levels;
  std::vector<std::uint64_t> offsets;
  BoxFlavor flavor = BoxFlavor::Delta;
};

inline ElementaryBox make_delta_box(std::vector<unsigned> levels,
                                    std::vector<std::uint64_t> offsets) {
  if (levels.size() != offsets.size())
    throw std::invalid_argument("box: level/offset dimension mismatch");
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (levels[j] > kMaxPrecision)
      throw std::invalid_argument("box: level exceeds 64 bits");
    if (levels[j] < 64 && (offsets[j] >> levels[j]) != 0)
      throw std::invalid_argument("box: offset out of range for level");
  }
  return ElementaryBox{std::move(levels), std::move(offsets), BoxFlavor::Delta};
}

inline ElementaryBox make_pi_box(std::vector<unsigned> levels) {
  for (unsigned a : levels)
    if (a > kMaxPrecision) throw std::invalid_argument("box: level exceeds 64 bits");
  std::vector<std::uint64_t> offsets(levels.size(), 0);
  return ElementaryBox{std::move(levels), std::move(offsets), BoxFlavor::Pi};
}

// Membership of one coordinate in Pi_a; false for z = 0 whenever a >= 1.
inline bool pi_contains(unsigned a, const DyadicScalar& z) {
  if (a == 0) return true;
  return bit(z, a) == 1 && floor_mantissa(z, a - 1) == 0;
}

inline bool box_contains(const ElementaryBox& b, const DyadicPoint& x) {
  if (b.levels.size() != x.coords.size())
    throw std::invalid_argument("box_contains: dimension mismatch");
  for (std::size_t j = 0; j < b.levels.size(); ++j) {
    if (b.flavor == BoxFlavor::Pi) {
      if (!pi_contains(b.levels[j], x.coords[j])) return false;
    } else {
      if (floor_mantissa(x.coords[j], b.levels[j]) != b.offsets[j]) return false;
    }
  }
  return true;
}

inline Rational box_volume(const ElementaryBox& b) {
  long sum = 0;
  for (unsigned a : b.levels) sum += a;
  return pow2(-sum);
}

}  // namespace dyadisc
