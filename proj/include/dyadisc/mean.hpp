#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadisc/decomposition.hpp"
#include "dyadisc/discrepancy.hpp"
#include "dyadisc/dyadic.hpp"
#include "dyadisc/errors.hpp"
#include "dyadisc/parallel.hpp"
#include "dyadisc/pointset.hpp"
#include "dyadisc/rademacher.hpp"
#include "dyadisc/rational.hpp"
#include "dyadisc/rng.hpp"

namespace dyadisc {

enum class MeanMode { Exact, Sampled };

inline const char* mode_name(MeanMode m) {
  return m == MeanMode::Exact ? "exact-enumeration" : "sampled";
}

struct SampleSpec {
  std::uint64_t count = 1024;
  std::uint64_t seed = 0;
};

// Shift-averaged L_q discrepancy over the level-s dyadic shift group.
//
// `value` is the q-mean of per-shift norms over the examined shifts.  For
// q = 2 and q = infinity the per-shift norms are exact closed forms and
// inner_level is 0; otherwise each shift is measured by its level
// `inner_level` grid norm and [lo, hi] brackets the same mean taken with
// true per-shift norms (error_radius is the worst per-shift truncation
// bound, combined across shifts by the triangle inequality in the weighted
// l_q norm for q >= 1 and termwise in the power domain for q < 1).
//
// When `power` > 0, exact_power is the exact rational mean of the examined
// per-shift norms raised to `power`.  Sampled sup estimates are certified
// lower bounds for the full-group sup: lower_confidence repeats the value.
struct MeanDiscrepancyEstimate {
  double q = 2;
  double value = 0;
  MeanMode mode = MeanMode::Exact;
  unsigned s = 0;
  std::uint64_t shifts_examined = 0;
  std::uint64_t seed = 0;
  unsigned inner_level = 0;
  double error_radius = 0;
  double lo = 0;
  double hi = 0;
  bool per_shift_exact = true;
  unsigned power = 0;
  Rational exact_power = Rational(0);
  double lower_confidence = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Shift with rank `idx` in lexicographic mantissa order, coordinate 0 in
// the highest bits.
inline DyadicPoint unrank_shift(std::uint64_t idx, unsigned d, unsigned s) {
  DyadicPoint p;
  p.coords.reserve(d);
  for (unsigned j = 0; j < d; ++j) {
    unsigned pos = (d - 1 - j) * s;
    p.coords.push_back(DyadicScalar{(idx >> pos) & low_bits(s), s});
  }
  return p;
}

inline std::uint64_t exact_shift_count(unsigned d, unsigned s, const char* who) {
  if (std::uint64_t(d) * s > 24)
    throw feasibility_error(std::string(who) +
                            ": exact enumeration of 2^(d*s) shifts exceeds the "
                            "2^24 guard; use sampled mode");
  return std::uint64_t{1} << (std::uint64_t(d) * s);
}

inline std::uint64_t anchor_enum_count(unsigned d, unsigned s, const char* who) {
  if (2 * std::uint64_t(d) * s > 28)
    throw feasibility_error(std::string(who) +
                            ": exact enumeration of 2^(2*d*s) shift pairs exceeds "
                            "the 2^28 guard; use sampled mode");
  return std::uint64_t{1} << (std::uint64_t(d) * s);
}

// Truncation level for per-shift grid norms: fine enough that the volume
// tail N d 2^-L is a sixteenth of that at level s, capped by the sweep
// guards and a ~2^31-cell budget across all shifts, never coarser than s.
inline unsigned auto_inner_level(unsigned d, std::size_t n, unsigned s,
                                 std::uint64_t shifts) {
  unsigned nbits = 0;
  while (nbits < 63 && (std::uint64_t{1} << nbits) < n) ++nbits;
  unsigned level = std::max(s, nbits + 4);
  unsigned vbits = n == 0 ? 1 : static_cast<unsigned>(std::bit_width(std::uint64_t(n)));
  unsigned cap = (d <= 2 ? 26u : 24u) / d;
  if (d <= 2 && 62 > d + vbits) cap = std::min(cap, (62 - d - vbits) / d);
  if (level > cap) level = cap;
  while (level > s &&
         double(shifts) * std::exp2(double(d) * level) > 2147483648.0)
    --level;
  if (level < s) level = s;
  if (std::uint64_t(d) * level > (d <= 2 ? 26u : 24u) ||
      (d <= 2 && std::uint64_t(d) * level + d + vbits > 62))
    throw feasibility_error(
        "mean: the truncation grid at level s is out of range for this "
        "dimension and point count; lower s");
  return level;
}

// Slot routing for a batch of exponents sharing one pass over the shifts.
struct MeanPlan {
  std::vector<double> qs;
  bool want_sup = false;
  bool want_l2 = false;
  std::vector<unsigned> sweep_int;
  std::vector<double> sweep_real;
  struct Route {
    int kind = 0;  // 0 sup, 1 l2, 2 sweep integer, 3 sweep fractional
    std::size_t idx = 0;
  };
  std::vector<Route> routes;
  unsigned level = 0;
  bool needs_sweep() const { return !sweep_int.empty() || !sweep_real.empty(); }
};

inline MeanPlan make_plan(const std::vector<double>& qs) {
  if (qs.empty()) throw std::invalid_argument("mean: at least one exponent required");
  MeanPlan plan;
  plan.qs = qs;
  for (double q : qs) {
    if (std::isnan(q) || !(q > 0))
      throw std::invalid_argument("mean: exponents must be positive");
    MeanPlan::Route r;
    if (q == kInfiniteQ) {
      plan.want_sup = true;
      r.kind = 0;
    } else if (q == 2.0) {
      plan.want_l2 = true;
      r.kind = 1;
    } else if (is_integer_exponent(q)) {
      r.kind = 2;
      r.idx = plan.sweep_int.size();
      plan.sweep_int.push_back(static_cast<unsigned>(q));
    } else {
      r.kind = 3;
      r.idx = plan.sweep_real.size();
      plan.sweep_real.push_back(q);
    }
    plan.routes.push_back(r);
  }
  return plan;
}

struct ShiftAgg {
  std::vector<Rational> rat_sums;
  std::vector<double> dbl_sums;
  Rational sup = Rational(0);
  bool has_sup = false;
  Rational radius = Rational(0);
};

template <class Provider>
std::vector<MeanDiscrepancyEstimate> mean_engine(const PointSet& D, unsigned s,
                                                 MeanPlan plan, MeanMode mode,
                                                 std::uint64_t seed,
                                                 std::uint64_t count,
                                                 Provider&& shift_at,
                                                 unsigned inner_level,
                                                 unsigned threads) {
  if (count == 0) throw std::invalid_argument("mean: sample count must be positive");
  if (plan.needs_sweep()) {
    plan.level = inner_level > 0 ? inner_level
                                 : auto_inner_level(D.d, D.size(), s, count);
    if (plan.level < s)
      throw std::invalid_argument("mean: the truncation level must be at least s");
  }

  const unsigned d = D.d;
  const std::size_t rat_slots = (plan.want_l2 ? 1 : 0) + plan.sweep_int.size();
  const std::size_t int_base = plan.want_l2 ? 1 : 0;
  GridNormSpec spec;
  spec.int_powers = plan.sweep_int;
  spec.real_powers = plan.sweep_real;

  auto block_fn = [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
    ShiftAgg agg;
    agg.rat_sums.assign(rat_slots, Rational(0));
    agg.dbl_sums.assign(plan.sweep_real.size(), 0.0);
    for (std::uint64_t i = lo; i < hi; ++i) {
      PointSet shifted = shift_set(D, shift_at(i));
      if (plan.want_sup) {
        Rational v = linf_exact(shifted).exact_power;
        if (!agg.has_sup || v > agg.sup) {
          agg.sup = v;
          agg.has_sup = true;
        }
      }
      if (plan.want_l2) agg.rat_sums[0] += l2_squared_exact(shifted);
      if (plan.needs_sweep()) {
        auto floors = truncated_floors(shifted, plan.level);
        auto sums = grid_power_sums(floors, d, shifted.size(), plan.level, spec);
        for (std::size_t k = 0; k < plan.sweep_int.size(); ++k) {
          unsigned p = plan.sweep_int[k];
          agg.rat_sums[int_base + k] +=
              Rational(sums.int_sums[k],
                       pow2_int(d * plan.level + p * d * (plan.level + 1)));
        }
        for (std::size_t k = 0; k < plan.sweep_real.size(); ++k)
          agg.dbl_sums[k] += sums.real_sums[k] *
                             std::exp2(-double(d) * plan.level -
                                       plan.sweep_real[k] * d * (plan.level + 1));
        Rational r = error_term_bound_uniform(shifted, plan.level);
        if (r > agg.radius) agg.radius = r;
      }
    }
    return agg;
  };

  auto blocks = map_blocks<ShiftAgg>(count, threads, block_fn);

  std::vector<Rational> rat_sums(rat_slots, Rational(0));
  std::vector<double> dbl_sums(plan.sweep_real.size(), 0.0);
  Rational sup(0);
  bool has_sup = false;
  Rational radius(0);
  for (const auto& b : blocks) {
    for (std::size_t k = 0; k < rat_slots; ++k) rat_sums[k] += b.rat_sums[k];
    for (std::size_t k = 0; k < dbl_sums.size(); ++k) dbl_sums[k] += b.dbl_sums[k];
    if (b.has_sup && (!has_sup || b.sup > sup)) {
      sup = b.sup;
      has_sup = true;
    }
    if (b.radius > radius) radius = b.radius;
  }

  const Rational denom = Rational(Int(count));
  const double rad = to_double(radius);
  std::vector<MeanDiscrepancyEstimate> out;
  out.reserve(plan.qs.size());
  for (std::size_t qi = 0; qi < plan.qs.size(); ++qi) {
    const double q = plan.qs[qi];
    const auto route = plan.routes[qi];
    MeanDiscrepancyEstimate e;
    e.q = q;
    e.mode = mode;
    e.s = s;
    e.shifts_examined = count;
    e.seed = mode == MeanMode::Sampled ? seed : 0;
    if (route.kind == 0) {
      e.value = to_double(sup);
      e.power = 1;
      e.exact_power = sup;
      e.lo = e.hi = e.value;
      if (mode == MeanMode::Sampled) e.lower_confidence = e.value;
    } else if (route.kind == 1) {
      Rational mean_pow = rat_sums[0] / denom;
      e.power = 2;
      e.exact_power = mean_pow;
      e.value = std::sqrt(to_double(mean_pow));
      e.lo = e.hi = e.value;
    } else if (route.kind == 2) {
      const unsigned p = plan.sweep_int[route.idx];
      Rational mean_pow = rat_sums[int_base + route.idx] / denom;
      e.power = p;
      e.exact_power = mean_pow;
      e.value = std::pow(to_double(mean_pow), 1.0 / p);
      e.inner_level = plan.level;
      e.per_shift_exact = radius == 0;
      e.error_radius = rad;
      e.lo = std::max(0.0, e.value - rad);
      e.hi = e.value + rad;
    } else {
      const double mean_pow = dbl_sums[route.idx] / double(count);
      e.value = std::pow(mean_pow, 1.0 / q);
      e.inner_level = plan.level;
      e.per_shift_exact = radius == 0;
      if (q >= 1) {
        e.error_radius = rad;
        e.lo = std::max(0.0, e.value - rad);
        e.hi = e.value + rad;
      } else {
        double lo_pow = std::max(0.0, mean_pow - std::pow(rad, q));
        double hi_pow = mean_pow + std::pow(rad, q);
        e.lo = std::pow(lo_pow, 1.0 / q);
        e.hi = std::pow(hi_pow, 1.0 / q);
        e.error_radius = std::max(e.hi - e.value, e.value - e.lo);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace detail

// Batch form: one pass over the shifts serves every requested exponent.
inline std::vector<MeanDiscrepancyEstimate> mean_lq_multi(
    const PointSet& D, unsigned s, const std::vector<double>& qs,
    MeanMode mode = MeanMode::Exact, SampleSpec sample = {},
    unsigned inner_level = 0, unsigned threads = 0) {
  auto plan = detail::make_plan(qs);
  if (mode == MeanMode::Exact) {
    std::uint64_t count = detail::exact_shift_count(D.d, s, "mean");
    auto provider = [d = D.d, s](std::uint64_t i) {
      return detail::unrank_shift(i, d, s);
    };
    return detail::mean_engine(D, s, std::move(plan), mode, 0, count, provider,
                               inner_level, threads);
  }
  auto provider = [seed = sample.seed, d = D.d, s](std::uint64_t i) {
    return random_grid_point(seed, i, d, s);
  };
  return detail::mean_engine(D, s, std::move(plan), mode, sample.seed,
                             sample.count, provider, inner_level, threads);
}

inline MeanDiscrepancyEstimate mean_lq(const PointSet& D, unsigned s, double q,
                                       MeanMode mode = MeanMode::Exact,
                                       SampleSpec sample = {},
                                       unsigned inner_level = 0,
                                       unsigned threads = 0) {
  return mean_lq_multi(D, s, {q}, mode, sample, inner_level, threads)[0];
}

// Mean restricted to an explicit multiset of level-s shifts.
inline MeanDiscrepancyEstimate conditional_mean(const PointSet& D, unsigned s,
                                                double q,
                                                const std::vector<DyadicPoint>& V,
                                                unsigned inner_level = 0,
                                                unsigned threads = 0) {
  if (V.empty())
    throw std::invalid_argument("conditional mean: the shift subset must be nonempty");
  for (const auto& T : V) {
    if (T.dim() != D.d)
      throw std::invalid_argument("conditional mean: shift dimension mismatch");
    detail::require_on_grid(T, s, "conditional mean");
  }
  auto plan = detail::make_plan({q});
  auto provider = [&V](std::uint64_t i) { return V[i]; };
  return detail::mean_engine(D, s, std::move(plan), MeanMode::Exact, 0, V.size(),
                             provider, inner_level, threads)[0];
}

// Coefficient view of a local table: the polynomial whose value at a grid
// point Y is the level-s truncated discrepancy of the table's shifted set
// re-anchored at Y.  Coefficient of the level vector A is the table entry
// scaled by 2^-d and signed by the parity of nonzero levels.
inline RademacherPolynomial table_polynomial(const MicroLocalTable& tbl) {
  RademacherPolynomial f = zero_polynomial(tbl.d, tbl.s);
  const Rational scale = pow2(-long(tbl.d));
  std::vector<unsigned> lv(tbl.d, 0);
  unsigned nonzero = 0;
  for (std::size_t idx = 0; idx < tbl.values.size(); ++idx) {
    if (tbl.values[idx] != 0)
      f.coefficients[idx] =
          (nonzero % 2 ? -scale : scale) * tbl.values[idx];
    for (unsigned j = tbl.d; j-- > 0;) {
      ++lv[j];
      if (lv[j] == 1) ++nonzero;
      if (lv[j] <= tbl.s) break;
      lv[j] = 0;
      --nonzero;
    }
  }
  return f;
}

namespace detail {

template <class Provider>
Rational principal_power_over(const PointSet& D, unsigned s, unsigned p,
                              std::uint64_t count, Provider&& z_at,
                              unsigned threads) {
  auto block_fn = [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
    Rational sum(0);
    for (std::uint64_t i = lo; i < hi; ++i) {
      auto f = table_polynomial(micro_local_table(D, s, z_at(i)));
      sum += p == 2 ? q2_squared(f) : norm_grid_power(f, p);
    }
    return sum;
  };
  auto blocks = map_blocks<Rational>(count, threads, block_fn);
  Rational total(0);
  for (const auto& b : blocks) total += b;
  return total / Rational(Int(count));
}

template <class Provider>
double principal_real_over(const PointSet& D, unsigned s, double q,
                           std::uint64_t count, Provider&& z_at,
                           unsigned threads) {
  auto block_fn = [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
    double sum = 0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      auto f = table_polynomial(micro_local_table(D, s, z_at(i)));
      sum += std::pow(norm_grid(f, q), q);
    }
    return sum;
  };
  auto blocks = map_blocks<double>(count, threads, block_fn);
  double total = 0;
  for (double b : blocks) total += b;
  return total / double(count);
}

template <class Provider>
Rational principal_sup_over(const PointSet& D, unsigned s, std::uint64_t count,
                            Provider&& z_at, unsigned threads) {
  auto block_fn = [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
    Rational sum(0);
    for (std::uint64_t i = lo; i < hi; ++i)
      sum += norm_grid_sup(table_polynomial(micro_local_table(D, s, z_at(i))));
    return sum;
  };
  auto blocks = map_blocks<Rational>(count, threads, block_fn);
  Rational total(0);
  for (const auto& b : blocks) total += b;
  return total / Rational(Int(count));
}

}  // namespace detail

// Mean over all level-s anchors Z of the grid p-th power of the local table
// polynomial, exact.  p = 2 uses the coefficient identity; other powers
// enumerate the grid per anchor, which costs O(4^(d s) (s + 1)) rational
// operations in total.
inline Rational principal_term_power(const PointSet& D, unsigned s, unsigned p,
                                     unsigned threads = 0) {
  if (p == 0) throw std::invalid_argument("principal term: power must be positive");
  std::uint64_t count = detail::anchor_enum_count(D.d, s, "principal term");
  auto z_at = [d = D.d, s](std::uint64_t i) { return detail::unrank_shift(i, d, s); };
  return detail::principal_power_over(D, s, p, count, z_at, threads);
}

// q-mean over anchors of the table polynomial's grid q-norm.  Use the sup
// variants below for the q = infinity statistic.
inline double principal_term_mq(const PointSet& D, unsigned s, double q,
                                unsigned threads = 0) {
  if (q == kInfiniteQ)
    throw std::invalid_argument(
        "principal term: the sup statistic is principal_term_finf");
  if (std::isnan(q) || !(q > 0))
    throw std::invalid_argument("principal term: q must be positive");
  if (detail::is_integer_exponent(q)) {
    unsigned p = static_cast<unsigned>(q);
    return std::pow(to_double(principal_term_power(D, s, p, threads)), 1.0 / p);
  }
  std::uint64_t count = detail::anchor_enum_count(D.d, s, "principal term");
  auto z_at = [d = D.d, s](std::uint64_t i) { return detail::unrank_shift(i, d, s); };
  return std::pow(detail::principal_real_over(D, s, q, count, z_at, threads), 1.0 / q);
}

inline double principal_term_mq(const PointSet& D, unsigned s, double q,
                                SampleSpec zs, unsigned threads = 0) {
  if (q == kInfiniteQ)
    throw std::invalid_argument(
        "principal term: the sup statistic is principal_term_finf");
  if (std::isnan(q) || !(q > 0))
    throw std::invalid_argument("principal term: q must be positive");
  if (zs.count == 0)
    throw std::invalid_argument("principal term: sample count must be positive");
  auto z_at = [seed = zs.seed, d = D.d, s](std::uint64_t i) {
    return random_grid_point(seed, i, d, s);
  };
  if (detail::is_integer_exponent(q)) {
    unsigned p = static_cast<unsigned>(q);
    return std::pow(
        to_double(detail::principal_power_over(D, s, p, zs.count, z_at, threads)),
        1.0 / p);
  }
  return std::pow(detail::principal_real_over(D, s, q, zs.count, z_at, threads),
                  1.0 / q);
}

// Mean over anchors of the table polynomial's grid sup, exact.
inline Rational principal_term_finf_exact(const PointSet& D, unsigned s,
                                          unsigned threads = 0) {
  std::uint64_t count = detail::anchor_enum_count(D.d, s, "principal term");
  auto z_at = [d = D.d, s](std::uint64_t i) { return detail::unrank_shift(i, d, s); };
  return detail::principal_sup_over(D, s, count, z_at, threads);
}

inline double principal_term_finf(const PointSet& D, unsigned s,
                                  unsigned threads = 0) {
  return to_double(principal_term_finf_exact(D, s, threads));
}

inline double principal_term_finf(const PointSet& D, unsigned s, SampleSpec zs,
                                  unsigned threads = 0) {
  if (zs.count == 0)
    throw std::invalid_argument("principal term: sample count must be positive");
  auto z_at = [seed = zs.seed, d = D.d, s](std::uint64_t i) {
    return random_grid_point(seed, i, d, s);
  };
  return to_double(detail::principal_sup_over(D, s, zs.count, z_at, threads));
}

namespace detail {

// Certification gate shared by the bound selectors: net quality is only
// probed when the set size matches the level and the check stays cheap.
inline bool certified_net_delta(const PointSet& D, unsigned s, unsigned* delta) {
  if (s > 16 || D.size() == 0) return false;
  if (D.size() != (std::size_t{1} << s)) return false;
  *delta = check_net(D, 0).minimal_delta;
  return true;
}

}  // namespace detail

// Bounds on the level-s residual functional.  uniform_bound holds for every
// exponent; generic_bound holds for exponents at most 1 and for the
// shiftwise-sup functional; net_bound applies when the set is a certified
// net of 2^s points at quality net_delta.  eq_bound and e1inf_bound are the
// best bounds valid at exponent q and for the shiftwise-sup functional.
struct ErrorTermNorms {
  double q = 1;
  unsigned s = 0;
  double uniform_bound = 0;
  double generic_bound = 0;
  bool is_net = false;
  unsigned net_delta = 0;
  double net_bound = 0;
  double eq_bound = 0;
  double e1inf_bound = 0;
};

inline ErrorTermNorms error_term_norms(const PointSet& D, unsigned s, double q = 1) {
  if (std::isnan(q) || !(q > 0))
    throw std::invalid_argument("error term norms: q must be positive");
  ErrorTermNorms r;
  r.q = q;
  r.s = s;
  r.uniform_bound = to_double(error_term_bound_uniform(D, s));
  r.generic_bound = to_double(Rational(Int(D.d) * Int(D.size()), pow2_int(s)));
  unsigned delta = 0;
  if (detail::certified_net_delta(D, s, &delta)) {
    r.is_net = true;
    r.net_delta = delta;
    r.net_bound = double(D.d) * std::exp2(double(delta));
  }
  r.eq_bound = r.uniform_bound;
  if (q <= 1) r.eq_bound = std::min(r.eq_bound, r.generic_bound);
  if (r.is_net) r.eq_bound = std::min(r.eq_bound, r.net_bound);
  r.e1inf_bound = std::min(r.uniform_bound, r.generic_bound);
  if (r.is_net) r.e1inf_bound = std::min(r.e1inf_bound, r.net_bound);
  return r;
}

// Distance from t to the nearest integer.
inline double nearest_int_dist(double t) {
  return std::abs(t - std::nearbyint(t));
}

namespace detail {

// Number of level vectors with `parts` entries in [0, max_part] summing to
// `total`.
inline Int composition_count(unsigned parts, unsigned total, unsigned max_part) {
  std::vector<Int> ways(std::size_t(total) + 1, Int(0));
  ways[0] = 1;
  for (unsigned j = 0; j < parts; ++j) {
    std::vector<Int> nxt(std::size_t(total) + 1, Int(0));
    for (unsigned t = 0; t <= total; ++t) {
      if (ways[t] == 0) continue;
      for (unsigned a = 0; a <= max_part && t + a <= total; ++a)
        nxt[t + a] += ways[t];
    }
    ways = std::move(nxt);
  }
  return ways[total];
}

}  // namespace detail

// Size of the index slice {A in {0..s}^k : |A| = sigma} together with the
// (sigma / (k-1))^(k-1) lower bound, which applies once s >= sigma.
struct JSigmaReport {
  unsigned k = 2;
  unsigned sigma = 0;
  unsigned s = 0;
  Int count = Int(0);
  double lower_bound = 0;
  bool applicable = false;
  bool bound_ok = false;
};

inline JSigmaReport j_sigma(unsigned k, unsigned sigma, unsigned s) {
  if (k < 2) throw std::invalid_argument("j_sigma: needs at least two coordinates");
  JSigmaReport r;
  r.k = k;
  r.sigma = sigma;
  r.s = s;
  r.count = detail::composition_count(k, sigma, std::min(s, sigma));
  r.lower_bound = std::pow(double(sigma) / (k - 1), double(k - 1));
  r.applicable = s >= sigma;
  r.bound_ok =
      r.applicable && Rational(r.count) >= rat_pow(Rational(sigma) / (k - 1), k - 1);
  return r;
}

enum class TheoremId { T21, T22, T23 };

inline const char* theorem_name(TheoremId t) {
  switch (t) {
    case TheoremId::T21: return "2.1";
    case TheoremId::T22: return "2.2";
    default: return "2.3";
  }
}

enum class Verdict { None, Holds, Violated, InconclusiveSampled };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::None: return "none";
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    default: return "inconclusive-sampled";
  }
}

struct TheoremReport {
  TheoremId theorem = TheoremId::T21;
  std::uint64_t n = 0;
  unsigned d = 1;
  double q = 2;
  unsigned delta = 0;
  unsigned s = 0;
  double bound_value = 0;
  double threshold_s = 0;
  unsigned minimal_s = 0;
  bool threshold_met = true;
  bool has_measurement = false;
  MeanDiscrepancyEstimate measured;
  Verdict verdict = Verdict::None;
};

// Closed-form bound and level threshold, logarithms base 2.  2.1 is the
// upper bound for nets of 2^s points at quality delta; 2.2 and 2.3 are the
// lower bounds, whose constants carry the exponent-dependent prefactor.
inline TheoremReport theorem_bounds(TheoremId t, std::uint64_t n, unsigned d,
                                    double q, unsigned delta, unsigned s) {
  TheoremReport r;
  r.theorem = t;
  r.n = n;
  r.d = d;
  r.q = q;
  r.delta = delta;
  r.s = s;
  switch (t) {
    case TheoremId::T21: {
      if (d < 1) throw std::invalid_argument("theorem 2.1: dimension must be positive");
      if (std::isnan(q) || !(q > 0) || q == kInfiniteQ)
        throw std::invalid_argument("theorem 2.1: q must be finite and positive");
      if (delta > s) throw std::invalid_argument("theorem 2.1: delta must not exceed s");
      const double half = std::ceil(q / 2.0);
      r.bound_value = std::exp2(double(delta) + 1.0 - d) *
                          std::pow(half * (s + 1.0), (d - 1) / 2.0) +
                      d * std::exp2(double(delta));
      break;
    }
    case TheoremId::T22: {
      if (d < 2) throw std::invalid_argument("theorem 2.2: needs dimension at least 2");
      if (std::isnan(q) || !(q > 0) || q > 1)
        throw std::invalid_argument("theorem 2.2: q must lie in (0, 1]");
      if (n < 2) throw std::invalid_argument("theorem 2.2: needs at least two points");
      const double logn = std::log2(double(n));
      const double gamma = std::exp2(-(2.0 * d + 1.0) / q - d - 1.0) *
                           std::pow(double(d - 1), -(d - 1) / 2.0);
      r.bound_value = gamma * std::pow(logn, (d - 1) / 2.0);
      r.threshold_s = logn + (2.0 * d + 1.0) / q +
                      0.5 * (d - 1) * std::log2(double(d - 1)) + d + 1.0 +
                      std::log2(double(d));
      break;
    }
    case TheoremId::T23: {
      if (d < 3) throw std::invalid_argument("theorem 2.3: needs dimension at least 3");
      if (n < 2) throw std::invalid_argument("theorem 2.3: needs at least two points");
      r.q = kInfiniteQ;
      const double logn = std::log2(double(n));
      const double gamma =
          std::exp2(-2.0 * d - 1.0) * std::pow(double(d - 2), -(d - 2) / 2.0);
      r.bound_value = gamma * std::pow(logn, d / 2.0);
      r.threshold_s = logn + 0.5 * (d - 2) * std::log2(double(d - 2)) + 2.0 * d +
                      std::log2(double(d));
      break;
    }
  }
  if (t != TheoremId::T21) {
    r.minimal_s = static_cast<unsigned>(std::ceil(r.threshold_s - 1e-9));
    r.threshold_met = double(s) >= r.threshold_s - 1e-9;
  }
  return r;
}

// Measures the shift-averaged discrepancy and compares it with the closed
// form.  2.1 requires a certified net of exactly 2^s points: with
// claimed_delta < 0 the minimal quality is certified and used, otherwise
// the claim is checked.  2.3 always measures the sup statistic.  A failed
// comparison in sampled mode is inconclusive; a passed one is recorded as
// holding, its mode preserved in `measured` (for 2.3 a sampled pass is
// certified, since the sampled sup is a lower bound for the full sup).
inline TheoremReport verify_theorem(const PointSet& D, TheoremId t, double q,
                                    unsigned s, MeanMode mode = MeanMode::Exact,
                                    SampleSpec sample = {}, int claimed_delta = -1,
                                    unsigned inner_level = 0, unsigned threads = 0) {
  unsigned delta = 0;
  if (t == TheoremId::T21) {
    if (s >= 64 || D.size() != (std::size_t{1} << s))
      throw std::invalid_argument("theorem 2.1: needs a set of exactly 2^s points");
    if (claimed_delta < 0) {
      delta = check_net(D, 0).minimal_delta;
    } else {
      if (static_cast<unsigned>(claimed_delta) > s)
        throw std::invalid_argument("theorem 2.1: delta must not exceed s");
      if (!check_net(D, static_cast<unsigned>(claimed_delta)).is_net)
        throw std::invalid_argument(
            "theorem 2.1: net certification failed at the claimed quality");
      delta = static_cast<unsigned>(claimed_delta);
    }
  }
  if (t == TheoremId::T23) q = kInfiniteQ;
  TheoremReport r = theorem_bounds(t, D.size(), D.d, q, delta, s);
  r.measured = mean_lq(D, s, r.q, mode, sample, inner_level, threads);
  r.has_measurement = true;
  const bool exact = mode == MeanMode::Exact;
  const bool ok = t == TheoremId::T21 ? r.measured.value < r.bound_value
                                      : r.measured.value > r.bound_value;
  r.verdict = ok ? Verdict::Holds
                 : (exact ? Verdict::Violated : Verdict::InconclusiveSampled);
  return r;
}

enum class SearchObjective { MinimizeLq, MaximizeLq, MaximizeLinf };

inline const char* objective_name(SearchObjective o) {
  switch (o) {
    case SearchObjective::MinimizeLq: return "minimize-lq";
    case SearchObjective::MaximizeLq: return "maximize-lq";
    default: return "maximize-linf";
  }
}

// Best shift found under the objective.  best_value is recomputed from
// scratch for the winning shift; ties keep the first shift in enumeration
// order (lexicographic mantissa order when exhaustive, draw order when
// sampled).
struct ShiftSearchResult {
  DyadicPoint best_shift;
  double best_value = 0;
  SearchObjective objective = SearchObjective::MinimizeLq;
  std::uint64_t shifts_examined = 0;
  double q = 2;
  unsigned s = 0;
  std::uint64_t best_index = 0;
  bool exhaustive = false;
  std::uint64_t seed = 0;
  unsigned inner_level = 0;
};

inline ShiftSearchResult shift_search(const PointSet& D, unsigned s,
                                      SearchObjective objective,
                                      std::uint64_t budget, double q = 2,
                                      std::uint64_t seed = 0,
                                      unsigned inner_level = 0,
                                      unsigned threads = 0) {
  if (budget == 0) throw std::invalid_argument("shift search: budget must be positive");
  if (objective == SearchObjective::MaximizeLinf) q = kInfiniteQ;
  if (std::isnan(q) || !(q > 0))
    throw std::invalid_argument("shift search: q must be positive");

  ShiftSearchResult res;
  res.objective = objective;
  res.q = q;
  res.s = s;
  res.seed = seed;

  const unsigned d = D.d;
  const bool whole_group =
      std::uint64_t(d) * s < 63 && (std::uint64_t{1} << (std::uint64_t(d) * s)) <= budget;
  const std::uint64_t count =
      whole_group ? (std::uint64_t{1} << (std::uint64_t(d) * s)) : budget;
  res.exhaustive = whole_group;
  res.shifts_examined = count;

  const bool sup_key = q == kInfiniteQ;
  const bool l2_key = !sup_key && q == 2.0;
  const bool int_key = !sup_key && !l2_key && detail::is_integer_exponent(q);
  unsigned level = 0;
  if (!sup_key && !l2_key) {
    level = inner_level > 0 ? inner_level
                            : detail::auto_inner_level(d, D.size(), s, count);
    if (level < s)
      throw std::invalid_argument("shift search: the truncation level must be at least s");
  }
  res.inner_level = level;

  auto shift_at = [&](std::uint64_t i) {
    return whole_group ? detail::unrank_shift(i, d, s)
                       : random_grid_point(seed, i, d, s);
  };

  struct Best {
    Rational rkey = Rational(0);
    double dkey = 0;
    std::uint64_t index = 0;
    bool has = false;
  };
  const bool maximize = objective != SearchObjective::MinimizeLq;
  const bool rational_key = sup_key || l2_key || int_key;
  auto better = [maximize, rational_key](const Best& a, const Best& b) {
    if (!b.has) return a.has;
    if (!a.has) return false;
    if (rational_key) {
      if (a.rkey != b.rkey) return maximize ? a.rkey > b.rkey : a.rkey < b.rkey;
    } else if (a.dkey != b.dkey) {
      return maximize ? a.dkey > b.dkey : a.dkey < b.dkey;
    }
    return a.index < b.index;
  };

  detail::GridNormSpec spec;
  if (int_key)
    spec.int_powers.push_back(static_cast<unsigned>(q));
  else if (!sup_key && !l2_key)
    spec.real_powers.push_back(q);

  auto block_fn = [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
    Best best;
    for (std::uint64_t i = lo; i < hi; ++i) {
      PointSet shifted = shift_set(D, shift_at(i));
      Best cur;
      cur.index = i;
      cur.has = true;
      if (sup_key) {
        cur.rkey = linf_exact(shifted).exact_power;
      } else if (l2_key) {
        cur.rkey = l2_squared_exact(shifted);
      } else {
        auto sums = detail::grid_power_sums(detail::truncated_floors(shifted, level),
                                            d, shifted.size(), level, spec);
        if (int_key)
          cur.rkey = Rational(sums.int_sums[0],
                              pow2_int(d * level +
                                       static_cast<unsigned>(q) * d * (level + 1)));
        else
          cur.dkey = sums.real_sums[0];
      }
      if (better(cur, best)) best = cur;
    }
    return best;
  };

  auto blocks = map_blocks<Best>(count, threads, block_fn);
  Best best;
  for (const auto& b : blocks)
    if (better(b, best)) best = b;

  res.best_index = best.index;
  res.best_shift = shift_at(best.index);
  PointSet shifted = shift_set(D, res.best_shift);
  if (sup_key)
    res.best_value = linf_exact(shifted).value;
  else if (l2_key)
    res.best_value = std::sqrt(to_double(l2_squared_exact(shifted)));
  else
    res.best_value = lq_grid(shifted, q, level).value;
  return res;
}

// Inspection of the quantitative ingredients of the lower-bound machinery:
// the absolute coefficient mass per leading window against the net window
// cap, the coefficient l2 functional against its distance-to-integer floor,
// and the tail slack xi with its nominal <= 1/2 requirement.  Everything is
// reported, nothing is enforced.
struct ProofDiagnostics {
  unsigned d = 1;
  unsigned s = 0;
  std::uint64_t n = 0;
  double q = 1;
  MeanMode mode = MeanMode::Exact;
  std::uint64_t seed = 0;
  std::uint64_t z_examined = 0;
  bool is_net = false;
  unsigned delta = 0;
  bool has_window = false;
  double window_max = 0;
  double window_bound = 0;
  bool window_ok = false;
  double q2_min = 0;
  double q2_lower = 0;
  bool q2_ok = false;
  bool has_xi = false;
  double c_constant = std::numeric_limits<double>::quiet_NaN();
  double xi = std::numeric_limits<double>::quiet_NaN();
  bool xi_ok = false;
};

inline ProofDiagnostics proof_diagnostics(const PointSet& D, unsigned s, double q,
                                          MeanMode mode = MeanMode::Exact,
                                          SampleSpec zs = {}, unsigned threads = 0) {
  ProofDiagnostics r;
  r.d = D.d;
  r.s = s;
  r.n = D.size();
  r.q = q;
  r.mode = mode;

  unsigned delta = 0;
  if (detail::certified_net_delta(D, s, &delta)) {
    r.is_net = true;
    r.delta = delta;
  }

  std::uint64_t count;
  if (mode == MeanMode::Exact) {
    count = detail::anchor_enum_count(D.d, s, "proof diagnostics");
  } else {
    if (zs.count == 0)
      throw std::invalid_argument("proof diagnostics: sample count must be positive");
    count = zs.count;
    r.seed = zs.seed;
  }
  r.z_examined = count;

  const unsigned d = D.d;
  auto z_at = [&](std::uint64_t i) {
    return mode == MeanMode::Exact ? detail::unrank_shift(i, d, s)
                                   : random_grid_point(zs.seed, i, d, s);
  };

  struct ZAgg {
    Rational win_max = Rational(0);
    Rational q2sq_min = Rational(0);
    bool has = false;
  };
  const Rational q2_scale = pow2(-2 * long(d));
  auto block_fn = [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
    ZAgg agg;
    for (std::uint64_t i = lo; i < hi; ++i) {
      auto tbl = micro_local_table(D, s, z_at(i));
      if (d >= 2) {
        // per-window coefficient mass along the last axis; by the
        // one-dimensional sup identity this equals the window's grid sup
        const std::size_t stride = s + 1;
        for (std::size_t b = 0; b < tbl.values.size(); b += stride) {
          Rational m(0);
          for (std::size_t a = 0; a < stride; ++a) m += abs(tbl.values[b + a]);
          if (m > agg.win_max) agg.win_max = m;
        }
      }
      Rational q2sq(0);
      for (const auto& v : tbl.values) q2sq += v * v;
      q2sq *= q2_scale;
      if (!agg.has || q2sq < agg.q2sq_min) {
        agg.q2sq_min = q2sq;
        agg.has = true;
      }
    }
    return agg;
  };
  auto blocks = map_blocks<ZAgg>(count, threads, block_fn);
  Rational win(0), q2sq_min(0);
  bool has = false;
  for (const auto& b : blocks) {
    if (b.win_max > win) win = b.win_max;
    if (b.has && (!has || b.q2sq_min < q2sq_min)) {
      q2sq_min = b.q2sq_min;
      has = true;
    }
  }

  if (d >= 2) r.window_max = to_double(win);
  r.has_window = d >= 2 && r.is_net;
  if (r.has_window) {
    r.window_bound = std::exp2(double(r.delta) + 1.0);
    r.window_ok = win <= Rational(pow2_int(r.delta + 1));
  }

  // every coefficient is at least the distance of N 2^-t to the nearest
  // integer, t the level sum of its index
  Rational floor_sq(0);
  for (unsigned t = 0; t <= d * s; ++t) {
    Int cnt = detail::composition_count(d, t, s);
    if (cnt == 0) continue;
    Rational v = Rational(Int(D.size()), pow2_int(t));
    Rational frac = v - Rational(Int(D.size()) >> t);
    Rational other = Rational(1) - frac;
    Rational dist = frac < other ? frac : other;
    floor_sq += Rational(cnt) * dist * dist;
  }
  floor_sq *= q2_scale;
  r.q2_lower = std::sqrt(to_double(floor_sq));
  if (has) {
    r.q2_min = std::sqrt(to_double(q2sq_min));
    r.q2_ok = q2sq_min >= floor_sq;
  }

  if (q != kInfiniteQ && q > 0 && q <= 1 && d >= 2) {
    r.c_constant = std::exp2(-2.0 * d / q - d - 1.0) *
                   std::pow(double(d - 1), -(d - 1) / 2.0);
    const double tail = double(d) * double(D.size()) * std::exp2(-double(s));
    r.xi = std::pow(r.c_constant, -q) * std::pow(tail, q);
    r.has_xi = true;
  } else if (q == kInfiniteQ && d >= 3) {
    r.c_constant =
        std::exp2(-2.0 * d) * std::pow(double(d - 2), -(d - 2) / 2.0);
    const double tail = double(d) * double(D.size()) * std::exp2(-double(s));
    r.xi = tail / r.c_constant;
    r.has_xi = true;
  }
  if (r.has_xi) r.xi_ok = r.xi <= 0.5;
  return r;
}

}  // namespace dyadisc
