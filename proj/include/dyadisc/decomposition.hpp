#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dyadic.hpp"
#include "pointset.hpp"
#include "rational.hpp"

namespace dyadisc {

// Truncated characteristic function of [0,y) at resolution s. Closed form of
// the level-s Rademacher series: 1/2 on the diagonal cell, else the true
// indicator of the projected comparison (the series has at most one surviving
// term, located at the first differing bit).
inline Rational chi_s_interval(const DyadicScalar& y, const DyadicScalar& x, unsigned s) {
  if (s > kMaxPrecision) throw std::invalid_argument("chi_s_interval: s exceeds 64");
  std::uint64_t xs = floor_mantissa(x, s);
  std::uint64_t ys = floor_mantissa(y, s);
  if (xs == ys) return Rational(1, 2);
  return xs < ys ? Rational(1) : Rational(0);
}

// Residual chi([0,y),x) - chi^(s)([0,y),x); vanishes unless x and y share
// their first s bits, and is bounded by 1/2 in absolute value.
inline Rational epsilon_interval(const DyadicScalar& y, const DyadicScalar& x, unsigned s) {
  Rational truth = less_value(x, y) ? Rational(1) : Rational(0);
  return truth - chi_s_interval(y, x, s);
}

inline Rational chi_s_box(const DyadicPoint& y, const DyadicPoint& x, unsigned s) {
  if (y.coords.size() != x.coords.size())
    throw std::invalid_argument("chi_s_box: dimension mismatch");
  Rational prod(1);
  for (std::size_t j = 0; j < y.coords.size(); ++j) {
    prod *= chi_s_interval(y.coords[j], x.coords[j], s);
    if (prod == 0) break;
  }
  return prod;
}

// Truncated volume of B_Y: the level-s series collapses coordinatewise to
// prod_j (y_j^(s) + 2^-(s+1)).
inline Rational vol_s(const DyadicPoint& y, unsigned s) {
  if (s > kMaxPrecision) throw std::invalid_argument("vol_s: s exceeds 64");
  Rational prod(1);
  Rational half_cell = pow2(-long(s) - 1);
  for (const auto& c : y.coords) prod *= to_rational(project(c, s)) + half_cell;
  return prod;
}

namespace detail {

inline void require_on_grid(const DyadicPoint& z, unsigned s, const char* who) {
  for (const auto& c : z.coords)
    if (!equal_value(project(c, s), c))
      throw std::invalid_argument(std::string(who) + ": shift is not on the level-s grid");
}

// Index of the first 1-bit of a coordinate (1-based), or 0 for value zero.
inline unsigned first_bit(const DyadicScalar& c) {
  if (c.mantissa == 0) return 0;
  return c.precision - static_cast<unsigned>(std::bit_width(c.mantissa)) + 1;
}

}  // namespace detail

// All micro-local discrepancies of D + Z at level s: values over the
// (s+1)^d level vectors A, entry A at flat index sum a_j (s+1)^(d-1-j).
struct MicroLocalTable {
  unsigned s = 0;
  unsigned d = 1;
  DyadicPoint z;
  std::vector<Rational> values;

  std::size_t index_of(const std::vector<unsigned>& levels) const {
    if (levels.size() != d) throw std::invalid_argument("micro-local table: bad level count");
    std::size_t idx = 0;
    for (unsigned a : levels) {
      if (a > s) throw std::invalid_argument("micro-local table: level out of range");
      idx = idx * (s + 1) + a;
    }
    return idx;
  }

  std::vector<unsigned> levels_of(std::size_t idx) const {
    std::vector<unsigned> levels(d);
    for (unsigned j = d; j-- > 0;) {
      levels[j] = static_cast<unsigned>(idx % (s + 1));
      idx /= (s + 1);
    }
    return levels;
  }

  const Rational& at(const std::vector<unsigned>& levels) const { return values[index_of(levels)]; }
};

inline MicroLocalTable micro_local_table(const PointSet& D, unsigned s, const DyadicPoint& Z) {
  if (Z.coords.size() != D.d) throw std::invalid_argument("micro_local: dimension mismatch");
  if (s > kMaxPrecision) throw std::invalid_argument("micro_local: s exceeds 64");
  detail::require_on_grid(Z, s, "micro_local");
  MicroLocalTable table;
  table.s = s;
  table.d = D.d;
  table.z = Z;
  std::size_t cells = 1;
  for (unsigned j = 0; j < D.d; ++j) cells *= (s + 1);
  std::vector<Int> counts(cells, Int(0));

  PointSet shifted = shift_set(D, Z);
  // Each coordinate of a point is a member of Pi_0 and of at most one other
  // shell Pi_nu; a point therefore contributes to 2^(active) entries.
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    std::vector<std::size_t> options;  // flat-index offset of choosing shell nu at j
    std::size_t stride = 1;
    for (unsigned j = D.d; j-- > 0;) {
      unsigned nu = detail::first_bit(DyadicScalar{shifted.mantissa(i, j), shifted.w});
      if (nu >= 1 && nu <= s) options.push_back(stride * nu);
      stride *= (s + 1);
    }
    unsigned active = static_cast<unsigned>(options.size());
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << active); ++mask) {
      std::size_t idx = 0;
      for (unsigned b = 0; b < active; ++b)
        if ((mask >> b) & 1u) idx += options[b];
      counts[idx] += 1;
    }
  }

  table.values.resize(cells);
  Int n(static_cast<long long>(D.size()));
  for (std::size_t idx = 0; idx < cells; ++idx) {
    unsigned level_sum = 0;
    std::size_t rest = idx;
    for (unsigned j = 0; j < D.d; ++j) {
      level_sum += static_cast<unsigned>(rest % (s + 1));
      rest /= (s + 1);
    }
    table.values[idx] = Rational(counts[idx]) - Rational(n, pow2_int(level_sum));
  }
  return table;
}

inline Rational micro_local(const PointSet& D, unsigned s, const DyadicPoint& Z,
                            const std::vector<unsigned>& levels) {
  if (Z.coords.size() != D.d || levels.size() != D.d)
    throw std::invalid_argument("micro_local: dimension mismatch");
  if (s > kMaxPrecision) throw std::invalid_argument("micro_local: s exceeds 64");
  for (unsigned a : levels)
    if (a > s) throw std::invalid_argument("micro_local: level out of range");
  detail::require_on_grid(Z, s, "micro_local");
  PointSet shifted = shift_set(D, Z);
  ElementaryBox box = make_pi_box(levels);
  Int count(0);
  for (std::size_t i = 0; i < shifted.size(); ++i)
    if (box_contains(box, shifted.point(i))) count += 1;
  unsigned level_sum = 0;
  for (unsigned a : levels) level_sum += a;
  return Rational(count) - Rational(Int(static_cast<long long>(D.size())), pow2_int(level_sum));
}

// L^(s)[D,Y]: the level-s truncation of the local discrepancy. Coordinate
// comparisons happen on the projected grid with weight 1/2 on ties, matching
// the Rademacher series assembled from the micro-local table.
inline Rational truncated_discrepancy(const PointSet& D, unsigned s, const DyadicPoint& Y) {
  if (Y.coords.size() != D.d)
    throw std::invalid_argument("truncated_discrepancy: dimension mismatch");
  if (s > kMaxPrecision) throw std::invalid_argument("truncated_discrepancy: s exceeds 64");
  if (D.d > 62) throw std::invalid_argument("truncated_discrepancy: dimension too large");
  std::vector<std::uint64_t> ys(D.d);
  for (unsigned j = 0; j < D.d; ++j) ys[j] = floor_mantissa(Y.coords[j], s);
  Int doubled(0);  // sum over points of prod_j (2 chi^(s)) in {0,1,2}
  for (std::size_t i = 0; i < D.size(); ++i) {
    std::uint64_t prod = 1;
    for (unsigned j = 0; j < D.d; ++j) {
      std::uint64_t xs = floor_mantissa(DyadicScalar{D.mantissa(i, j), D.w}, s);
      if (xs < ys[j])
        prod <<= 1;
      else if (xs > ys[j]) {
        prod = 0;
        break;
      }
    }
    doubled += prod;
  }
  return Rational(doubled, pow2_int(D.d)) -
         Rational(Int(static_cast<long long>(D.size()))) * vol_s(Y, s);
}

// Per-column cell occupancies N_{j,m} at level s, as sorted (cell, count)
// runs; avoids a 2^s histogram.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> column_cells(const PointSet& D,
                                                                         unsigned s, unsigned j) {
  if (j >= D.d) throw std::invalid_argument("column_cells: coordinate out of range");
  std::vector<std::uint64_t> floors;
  floors.reserve(D.size());
  for (std::size_t i = 0; i < D.size(); ++i)
    floors.push_back(floor_mantissa(DyadicScalar{D.mantissa(i, j), D.w}, s));
  std::sort(floors.begin(), floors.end());
  std::vector<std::pair<std::uint64_t, std::uint64_t>> runs;
  for (std::size_t i = 0; i < floors.size();) {
    std::size_t k = i;
    while (k < floors.size() && floors[k] == floors[i]) ++k;
    runs.push_back({floors[i], k - i});
    i = k;
  }
  return runs;
}

inline std::uint64_t max_column_count(const PointSet& D, unsigned s, unsigned j) {
  std::uint64_t best = 0;
  for (const auto& run : column_cells(D, s, j)) best = std::max(best, run.second);
  return best;
}

// Pointwise bound on |L - L^(s)| at Y: half the sum of per-coordinate
// coincidence counts plus the volume tail d N 2^-s.
inline Rational error_term_bound(const PointSet& D, unsigned s, const DyadicPoint& Y) {
  if (Y.coords.size() != D.d)
    throw std::invalid_argument("error_term_bound: dimension mismatch");
  Int coincidences(0);
  for (unsigned j = 0; j < D.d; ++j) {
    std::uint64_t ys = floor_mantissa(Y.coords[j], s);
    for (std::size_t i = 0; i < D.size(); ++i)
      if (floor_mantissa(DyadicScalar{D.mantissa(i, j), D.w}, s) == ys) coincidences += 1;
  }
  Rational tail = Rational(Int(D.d) * Int(static_cast<long long>(D.size())), pow2_int(s));
  return (Rational(coincidences) + tail) / 2;
}

// Uniform-in-Y variant: coincidence counts replaced by per-column maxima.
inline Rational error_term_bound_uniform(const PointSet& D, unsigned s) {
  Int worst(0);
  for (unsigned j = 0; j < D.d; ++j) worst += Int(max_column_count(D, s, j));
  Rational tail = Rational(Int(D.d) * Int(static_cast<long long>(D.size())), pow2_int(s));
  return (Rational(worst) + tail) / 2;
}

}  // namespace dyadisc
