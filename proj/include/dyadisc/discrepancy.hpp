#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "decomposition.hpp"
#include "dyadic.hpp"
#include "errors.hpp"
#include "pointset.hpp"
#include "rational.hpp"

namespace dyadisc {

inline constexpr double kInfiniteQ = std::numeric_limits<double>::infinity();

enum class DiscrepancyMethod { ExactClosedForm, ExactCriticalGrid, GridDecomposition };

inline const char* method_name(DiscrepancyMethod m) {
  switch (m) {
    case DiscrepancyMethod::ExactClosedForm: return "exact-closed-form";
    case DiscrepancyMethod::ExactCriticalGrid: return "exact-critical-grid";
    default: return "grid-decomposition";
  }
}

// One computed L_q value. The true L_q always lies in
// [value - error_radius, value + error_radius]; exact methods report radius 0.
// When the q-th power of the value is rational it is carried exactly:
// exact_power = value^power (power = 0 means absent).
struct DiscrepancyResult {
  double q = 2;
  double value = 0;
  DiscrepancyMethod method = DiscrepancyMethod::ExactClosedForm;
  double error_radius = 0;
  unsigned s_used = 0;
  unsigned power = 0;
  Rational exact_power;
  double lo = 0, hi = 0;  // the bracket [value - radius, value + radius], clamped at 0
};

// Exact local discrepancy: strict-dominance count minus N vol B_Y.
inline Rational local_discrepancy(const PointSet& D, const DyadicPoint& Y) {
  if (Y.coords.size() != D.d)
    throw std::invalid_argument("local_discrepancy: dimension mismatch");
  Int count(0);
  for (std::size_t i = 0; i < D.size(); ++i) {
    bool inside = true;
    for (unsigned j = 0; j < D.d; ++j)
      if (!less_value(DyadicScalar{D.mantissa(i, j), D.w}, Y.coords[j])) {
        inside = false;
        break;
      }
    if (inside) count += 1;
  }
  Rational vol(1);
  for (const auto& c : Y.coords) vol *= to_rational(c);
  return Rational(count) - Rational(Int(static_cast<long long>(D.size()))) * vol;
}

namespace detail {

using u128 = unsigned __int128;
using i128 = __int128;

// Exact sum of |term|^p over a stream of 64-bit magnitudes. Terms accumulate
// in a 128-bit partial that spills into the arbitrary-precision total before
// it can overflow, so any magnitude profile is safe.
struct PowerSumAcc {
  unsigned p = 1;
  u128 partial = 0;
  Int total = Int(0);

  void add(std::uint64_t a) {
    if (a == 0) return;
    unsigned bits = static_cast<unsigned>(std::bit_width(a));
    if (bits * p <= 126) {
      u128 term = 1;
      for (unsigned i = 0; i < p; ++i) term *= a;
      if (partial > (~u128{0}) - term) {
        spill();
      }
      partial += term;
    } else {
      spill();
      total += boost::multiprecision::pow(Int(a), p);
    }
  }

  void spill() {
    if (partial == 0) return;
    total += Int(std::uint64_t(partial >> 64)) << 64;
    total += Int(std::uint64_t(partial));
    partial = 0;
  }

  Int finish() {
    spill();
    return total;
  }
};

struct GridNormSpec {
  std::vector<unsigned> int_powers;
  std::vector<double> real_powers;
  bool want_max = false;
};

struct GridNormSums {
  std::vector<Int> int_sums;
  std::vector<double> real_sums;
  std::uint64_t max_abs = 0;
};

// Level-s cell indices of every coordinate, row-major N x d.
inline std::vector<std::uint64_t> truncated_floors(const PointSet& D, unsigned s) {
  std::vector<std::uint64_t> f(D.mantissas.size());
  for (std::size_t i = 0; i < D.mantissas.size(); ++i)
    f[i] = floor_mantissa(DyadicScalar{D.mantissas[i], D.w}, s);
  return f;
}

// Power sums of Lambda(Y) = 2^{d(s+1)} L^(s)[D,Y] over the full level-s grid.
// Lambda is integral: 2^{ds} G(Y) - N prod_j (2 m_j + 1), where G counts
// points with factor 2 per strictly-below coordinate and 1 per tie.
//
// d = 1: one sorted sweep. d = 2: row sweep with a column histogram, no
// 2^{2s} table. d >= 3: separable prefix transform over a cell histogram.
inline GridNormSums grid_power_sums(const std::vector<std::uint64_t>& floors, unsigned d,
                                    std::size_t n, unsigned s, const GridNormSpec& spec) {
  if (d == 0) throw std::invalid_argument("grid sums: dimension must be positive");
  if (std::uint64_t(d) * s > 26)
    throw feasibility_error("grid sums: 2^(d s) cells exceed the 2^26 enumeration guard");
  std::vector<PowerSumAcc> accs;
  for (unsigned p : spec.int_powers) {
    if (p == 0) throw std::invalid_argument("grid sums: power must be positive");
    accs.push_back(PowerSumAcc{p});
  }
  GridNormSums out;
  out.real_sums.assign(spec.real_powers.size(), 0.0);
  // Guard the shifted-G magnitude: |Lambda| < 2^{ds + d + bits(N)} must fit 62 bits
  // for the 64-bit fast paths below (the d >= 3 path computes in 128 bits).
  unsigned nbits = n == 0 ? 1 : static_cast<unsigned>(std::bit_width(std::uint64_t(n)));
  if (d <= 2 && d * s + d + nbits > 62)
    throw feasibility_error("grid sums: point count too large for the 64-bit sweep");

  auto consume = [&](std::int64_t lambda) {
    std::uint64_t a = lambda < 0 ? std::uint64_t(-lambda) : std::uint64_t(lambda);
    for (auto& acc : accs) acc.add(a);
    if (!out.real_sums.empty()) {
      double da = double(a);
      for (std::size_t i = 0; i < spec.real_powers.size(); ++i)
        out.real_sums[i] += std::pow(da, spec.real_powers[i]);
    }
    if (a > out.max_abs) out.max_abs = a;
  };

  std::uint64_t cells = std::uint64_t{1} << s;
  if (d == 1) {
    std::vector<std::uint64_t> f = floors;
    std::sort(f.begin(), f.end());
    std::size_t ptr = 0;
    std::uint64_t below = 0;
    std::uint64_t twoN = 2 * std::uint64_t(n);
    std::uint64_t t = n;  // N (2m+1)
    for (std::uint64_t m = 0; m < cells; ++m) {
      std::uint64_t eq = 0;
      while (ptr < f.size() && f[ptr] == m) ++ptr, ++eq;
      std::uint64_t g = 2 * below + eq;
      consume(std::int64_t(g << s) - std::int64_t(t));
      below += eq;
      t += twoN;
    }
  } else if (d == 2) {
    // CSR rows by u-cell with the v-cells of each row sorted.
    std::vector<std::uint32_t> row_len(cells + 1, 0);
    for (std::size_t i = 0; i < n; ++i) row_len[floors[2 * i] + 1]++;
    std::vector<std::uint32_t> start(cells + 1, 0);
    for (std::uint64_t m = 0; m < cells; ++m) start[m + 1] = start[m] + row_len[m + 1];
    std::vector<std::uint32_t> rows(n);
    {
      std::vector<std::uint32_t> cursor(start.begin(), start.end() - 1);
      for (std::size_t i = 0; i < n; ++i)
        rows[cursor[floors[2 * i]]++] = std::uint32_t(floors[2 * i + 1]);
      for (std::uint64_t m = 0; m < cells; ++m)
        std::sort(rows.begin() + start[m], rows.begin() + start[m + 1]);
    }
    std::vector<std::uint32_t> colcum(cells, 0);  // points with u < m1, by v-cell
    for (std::uint64_t m1 = 0; m1 < cells; ++m1) {
      std::uint64_t c = std::uint64_t(n) * (2 * m1 + 1);
      std::uint64_t t = c;
      std::uint64_t twoC = 2 * c;
      std::uint32_t prefA = 0, prefB = 0;
      std::uint32_t bi = start[m1];
      const std::uint32_t bend = start[m1 + 1];
      for (std::uint64_t m2 = 0; m2 < cells; ++m2) {
        std::uint32_t eq = 0;
        while (bi < bend && rows[bi] == m2) ++bi, ++eq;
        std::uint32_t aHere = colcum[m2];
        std::uint64_t g = 4ull * prefA + 2ull * aHere + 2ull * prefB + eq;
        consume(std::int64_t(g << (2 * s)) - std::int64_t(t));
        prefA += aHere;
        prefB += eq;
        t += twoC;
      }
      for (std::uint32_t k = start[m1]; k < bend; ++k) colcum[rows[k]]++;
    }
  } else {
    if (std::uint64_t(d) * s > 24)
      throw feasibility_error("grid sums: cell histogram exceeds the 2^24 memory guard");
    std::uint64_t total = std::uint64_t{1} << (d * s);
    std::vector<std::int64_t> hist(total, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t idx = 0;
      for (unsigned j = 0; j < d; ++j) idx = (idx << s) | floors[i * d + j];
      hist[idx]++;
    }
    // G = T_1 ... T_d hist with (T v)[m] = 2 sum_{k<m} v[k] + v[m], per axis.
    for (unsigned axis = 0; axis < d; ++axis) {
      std::uint64_t inner = std::uint64_t{1} << (s * (d - 1 - axis));
      std::uint64_t outer = total / (inner << s);
      for (std::uint64_t o = 0; o < outer; ++o)
        for (std::uint64_t in = 0; in < inner; ++in) {
          std::uint64_t base = (o << (s * (d - axis))) + in;
          std::int64_t pref = 0;
          for (std::uint64_t m = 0; m < cells; ++m) {
            std::int64_t& cell = hist[base + m * inner];
            std::int64_t cur = cell;
            cell = 2 * pref + cur;
            pref += cur;
          }
        }
    }
    // Odometer over cells tracking prod_j (2 m_j + 1).
    std::vector<std::uint64_t> digit(d, 0);
    std::vector<i128> prods(d + 1);
    prods[0] = 1;
    for (unsigned j = 0; j < d; ++j) prods[j + 1] = prods[j];
    auto refresh = [&](unsigned from) {
      for (unsigned j = from; j < d; ++j) prods[j + 1] = prods[j] * i128(2 * digit[j] + 1);
    };
    refresh(0);
    for (std::uint64_t idx = 0;; ++idx) {
      i128 lambda = (i128(hist[idx]) << (d * s)) - i128(std::uint64_t(n)) * prods[d];
      std::int64_t clipped;
      if (lambda >= 0)
        clipped = lambda > i128(std::numeric_limits<std::int64_t>::max())
                      ? std::numeric_limits<std::int64_t>::max()
                      : std::int64_t(lambda);
      else
        clipped = -lambda > i128(std::numeric_limits<std::int64_t>::max())
                      ? std::numeric_limits<std::int64_t>::min()
                      : std::int64_t(lambda);
      consume(clipped);
      if (idx + 1 == total) break;
      unsigned j = d;
      while (j-- > 0) {
        if (++digit[j] < cells) break;
        digit[j] = 0;
      }
      refresh(j);
    }
  }

  for (auto& acc : accs) out.int_sums.push_back(acc.finish());
  return out;
}

inline bool is_integer_exponent(double q) {
  return q >= 1 && q <= 64 && q == std::floor(q);
}

}  // namespace detail

// ---- exact L2 (closed form) ----
// Expand the square of L(Y) = sum_x chi([0,Y), x) - N vol B_Y and integrate
// each term over Y in U^d:
//   int sum_{x,x'} chi chi = sum_{x,x'} prod_j (1 - max(x_j, x'_j)),
//   int sum_x chi . vol    = sum_x prod_j (1 - x_j^2)/2,
//   int (vol B_Y)^2        = prod_j int y^2 dy = 3^-d,
// so L2^2 = S1 - 2 N' S2 + N^2 3^-d with N' = 1 (the N sits inside S2's
// prefactor below). All three pieces are rational with power-of-two scaling.
inline Rational l2_squared_exact(const PointSet& D) {
  const unsigned d = D.d, w = D.w;
  const std::size_t n = D.size();
  Int pair_sum(0);  // scaled by 2^(d w)

  bool fenwick_ok = d == 2 && n > 0 &&
                    2 * w + 2 * std::bit_width(std::uint64_t(n)) + 2 <= 120;
  if (fenwick_ok) {
    // Sort by u; then sum_{i<j} (2^w - u_j)(c (2^w - v_j) + sum_{v_i > v_j}(2^w - v_i))
    // with a Fenwick tree over compressed v holding counts and (2^w - v) sums.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {D.mantissa(i, 0), D.mantissa(i, 1)};
    std::sort(pts.begin(), pts.end());
    std::vector<std::uint64_t> vs(n);
    for (std::size_t i = 0; i < n; ++i) vs[i] = pts[i].second;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    std::size_t m = vs.size();
    std::vector<std::uint64_t> cnt(m + 1, 0);
    std::vector<detail::u128> sum(m + 1, 0);
    const detail::u128 one = detail::u128{1} << w;
    detail::u128 total_sum = 0;
    detail::u128 acc = 0;  // pair part, scaled by 2^{2w}
    Int acc_hi(0);
    auto flush = [&]() {
      acc_hi += Int(std::uint64_t(acc >> 64)) << 64;
      acc_hi += Int(std::uint64_t(acc));
      acc = 0;
    };
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t r = std::size_t(std::lower_bound(vs.begin(), vs.end(), pts[j].second) -
                                  vs.begin()) + 1;
      std::uint64_t c = 0;
      detail::u128 le_sum = 0;
      for (std::size_t k = r; k > 0; k &= k - 1) {
        c += cnt[k];
        le_sum += sum[k];
      }
      detail::u128 diag = (one - pts[j].first) * (one - pts[j].second);
      detail::u128 inner = detail::u128(c) * (one - pts[j].second) + (total_sum - le_sum);
      detail::u128 term = diag + 2 * (one - pts[j].first) * inner;
      if (acc > ~detail::u128{0} - term) flush();
      acc += term;
      detail::u128 add = one - pts[j].second;
      total_sum += add;
      for (std::size_t k = r; k <= m; k += k & (~k + 1)) {
        cnt[k] += 1;
        sum[k] += add;
      }
    }
    flush();
    pair_sum = acc_hi;
  } else {
    // Generic O(N^2 d) expansion in big integers.
    const Int one = pow2_int(w);
    for (std::size_t i = 0; i < n; ++i) {
      {
        Int prod(1);
        for (unsigned j = 0; j < d; ++j) prod *= one - Int(D.mantissa(i, j));
        pair_sum += prod;
      }
      for (std::size_t k = i + 1; k < n; ++k) {
        Int prod(2);
        for (unsigned j = 0; j < d; ++j)
          prod *= one - Int(std::max(D.mantissa(i, j), D.mantissa(k, j)));
        pair_sum += prod;
      }
    }
  }

  Int cross(0);  // sum_x prod_j (2^{2w} - m_j^2), scaled by 2^{2 d w}; /2^d applied below
  for (std::size_t i = 0; i < n; ++i) {
    Int prod(1);
    for (unsigned j = 0; j < d; ++j) {
      Int mj(D.mantissa(i, j));
      prod *= (Int(1) << (2 * w)) - mj * mj;
    }
    cross += prod;
  }

  Rational s1(pair_sum, pow2_int(d * w));
  Rational s2(cross, pow2_int(2 * d * w + d));  // the /2 per coordinate
  Rational nn(Int(static_cast<long long>(n)));
  Rational third = rat_pow(Rational(1, 3), d);
  return s1 - 2 * nn * s2 + nn * nn * third;
}

inline DiscrepancyResult l2_exact(const PointSet& D) {
  DiscrepancyResult r;
  r.q = 2;
  r.method = DiscrepancyMethod::ExactClosedForm;
  r.power = 2;
  r.exact_power = l2_squared_exact(D);
  r.value = std::sqrt(to_double(r.exact_power));
  r.lo = r.hi = r.value;
  return r;
}

// ---- exact L_infinity (critical grid) ----
// The supremum over the closure is attained against the grid of coordinate
// values plus 1: at each candidate the closed count C_le gives the inner
// limit of C - N vol and the strict count C_lt gives the outer one.
inline DiscrepancyResult linf_exact(const PointSet& D) {
  const unsigned d = D.d, w = D.w;
  const std::size_t n = D.size();
  double cand_count = 1;
  for (unsigned j = 0; j < d; ++j) cand_count *= double(n + 1);
  if (cand_count > 1e7)
    throw feasibility_error("linf_exact: candidate grid exceeds 10^7; use the grid method");

  // Per-axis sorted unique candidates, scaled by 2^w with 2^w standing for 1
  // (held in 128 bits since w may be 64).
  std::vector<std::vector<detail::u128>> cands(d);
  for (unsigned j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) cands[j].push_back(D.mantissa(i, j));
    cands[j].push_back(detail::u128{1} << w);
    std::sort(cands[j].begin(), cands[j].end());
    cands[j].erase(std::unique(cands[j].begin(), cands[j].end()), cands[j].end());
  }
  auto widen = [](detail::u128 v) {
    return (Int(std::uint64_t(v >> 64)) << 64) | Int(std::uint64_t(v));
  };

  Rational best(0);
  std::vector<std::size_t> pick(d, 0);
  std::vector<detail::u128> gamma(d);
  const Rational scale(Int(1), pow2_int(d * w));
  for (;;) {
    for (unsigned j = 0; j < d; ++j) gamma[j] = cands[j][pick[j]];
    Int lt(0), le(0);
    for (std::size_t i = 0; i < n; ++i) {
      bool all_lt = true, all_le = true;
      for (unsigned j = 0; j < d; ++j) {
        detail::u128 mj = D.mantissa(i, j);
        if (mj >= gamma[j]) all_lt = false;
        if (mj > gamma[j]) {
          all_le = false;
          break;
        }
      }
      if (all_lt) lt += 1;
      if (all_le) le += 1;
    }
    Int volnum(1);
    for (unsigned j = 0; j < d; ++j) volnum *= widen(gamma[j]);
    Rational nvol = Rational(Int(static_cast<long long>(n)) * volnum) * scale;
    Rational up = Rational(le) - nvol;   // closed-box inner limit
    Rational down = nvol - Rational(lt); // open-box outer limit
    if (up > best) best = up;
    if (down > best) best = down;
    unsigned j = d;
    bool done = true;
    while (j-- > 0) {
      if (++pick[j] < cands[j].size()) {
        done = false;
        break;
      }
      pick[j] = 0;
    }
    if (done) break;
  }

  DiscrepancyResult r;
  r.q = kInfiniteQ;
  r.method = DiscrepancyMethod::ExactCriticalGrid;
  r.power = 1;
  r.exact_power = best;
  r.value = to_double(best);
  r.lo = r.hi = r.value;
  return r;
}

// ---- grid L_q with certified radius ----
// Computes ||L^(s)[D,.]||_{s,q} exactly on the level-s grid (equal to the
// function-space norm of the truncation, which is piecewise constant) and
// wraps it in the uniform bound R on |L - L^(s)|: a norm bracket for q >= 1,
// a q-th-power bracket for q <= 1.
inline DiscrepancyResult lq_grid(const PointSet& D, double q, unsigned s) {
  if (!(q > 0) || q == kInfiniteQ)
    throw std::invalid_argument("lq_grid: q must be finite and positive");
  DiscrepancyResult r;
  r.q = q;
  r.method = DiscrepancyMethod::GridDecomposition;
  r.s_used = s;

  detail::GridNormSpec spec;
  bool integral = detail::is_integer_exponent(q);
  unsigned p = integral ? unsigned(q) : 0;
  if (integral)
    spec.int_powers.push_back(p);
  else
    spec.real_powers.push_back(q);
  auto floors = detail::truncated_floors(D, s);
  auto sums = detail::grid_power_sums(floors, D.d, D.size(), s, spec);

  const unsigned d = D.d;
  double norm_q_pow;  // ||L^(s)||^q
  if (integral) {
    r.power = p;
    r.exact_power = Rational(sums.int_sums[0], pow2_int(d * s + p * d * (s + 1)));
    norm_q_pow = to_double(r.exact_power);
  } else {
    norm_q_pow = sums.real_sums[0] * std::exp2(-double(d) * s - q * d * (s + 1));
  }
  r.value = std::pow(norm_q_pow, 1.0 / q);

  Rational radius = error_term_bound_uniform(D, s);
  double rad = to_double(radius);
  if (q >= 1) {
    r.error_radius = rad;
    r.lo = std::max(0.0, r.value - rad);
    r.hi = r.value + rad;
  } else {
    double lo_pow = std::max(0.0, norm_q_pow - std::pow(rad, q));
    double hi_pow = norm_q_pow + std::pow(rad, q);
    r.lo = std::pow(lo_pow, 1.0 / q);
    r.hi = std::pow(hi_pow, 1.0 / q);
    r.error_radius = std::max(r.hi - r.value, r.value - r.lo);
  }
  return r;
}

// ---- Lemma-style norm chain check ----
// lower: L_q <= L_inf; upper: L_inf <= 2^(ds/q) (L_q + 2 E_inf bound).
// Verified through the sound bracket directions so a pass is a theorem about
// the true values.
struct NormChainReport {
  double q = 1;
  unsigned s = 0;
  double linf = 0;
  double lq_lo = 0, lq_hi = 0;
  double e_inf_bound = 0;
  double rhs_hi = 0;
  bool lower_ok = false;
  bool upper_ok = false;
  bool holds = false;
};

inline NormChainReport lemma62_check(const PointSet& D, double q, unsigned s) {
  if (!(q >= 1)) throw std::invalid_argument("lemma62_check: q must be >= 1");
  NormChainReport rep;
  rep.q = q;
  rep.s = s;
  DiscrepancyResult inf = linf_exact(D);
  DiscrepancyResult lq = lq_grid(D, q, s);
  rep.linf = inf.value;
  rep.lq_lo = lq.lo;
  rep.lq_hi = lq.hi;
  rep.e_inf_bound = to_double(error_term_bound_uniform(D, s));
  double factor = std::exp2(double(D.d) * s / q);
  rep.rhs_hi = factor * (lq.hi + 2 * rep.e_inf_bound);
  rep.lower_ok = rep.lq_lo <= rep.linf + 1e-12;
  rep.upper_ok = rep.linf <= rep.rhs_hi + 1e-12;
  rep.holds = rep.lower_ok && rep.upper_ok;
  return rep;
}

}  // namespace dyadisc
