#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "dyadisc/discrepancy.hpp"
#include "dyadisc/rng.hpp"

using namespace dyadisc;

namespace {

PointSet from_mantissas(unsigned d, unsigned w, std::vector<std::uint64_t> ms) {
  return make_point_set(d, w, std::move(ms));
}

DyadicPoint grid_point(std::uint64_t idx, unsigned d, unsigned s) {
  DyadicPoint Y;
  for (unsigned j = 0; j < d; ++j) {
    unsigned sh = s * (d - 1 - j);
    Y.coords.push_back(make_scalar((idx >> sh) & low_bits(s), s));
  }
  return Y;
}

// Exact piecewise integral of (count - N y)^p over [0,1) for d = 1 and even p,
// plus the |.| variant for p = 1; independent of every library norm routine.
Rational segment_power_d1(const PointSet& D, unsigned p) {
  REQUIRE(D.d == 1);
  std::vector<Rational> bounds{Rational(0)};
  std::vector<std::uint64_t> ms(D.mantissas);
  std::sort(ms.begin(), ms.end());
  for (std::uint64_t m : ms) bounds.push_back(Rational(Int(m), pow2_int(D.w)));
  bounds.push_back(Rational(1));
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  Rational nn(Int(static_cast<long long>(D.size())));
  Rational total(0);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    Rational a = bounds[i], b = bounds[i + 1];
    Int c(0);
    for (std::uint64_t m : ms)
      if (Rational(Int(m), pow2_int(D.w)) <= a) c += 1;
    Rational cc(c);
    if (p % 2 == 0) {
      if (nn == 0) continue;  // integrand is 0 when the set is empty
      // antiderivative of (c - N y)^p is -(c - N y)^(p+1) / ((p+1) N)
      Rational fa = rat_pow(cc - nn * a, p + 1);
      Rational fb = rat_pow(cc - nn * b, p + 1);
      total += (fa - fb) / (Rational(p + 1) * nn);
    } else {
      REQUIRE(p == 1);
      auto piece = [&](Rational u, Rational v) {
        Rational val = cc * (v - u) - nn * (v * v - u * u) / 2;
        return val < 0 ? -val : val;
      };
      Rational root = nn == 0 ? b : cc / nn;
      if (root > a && root < b)
        total += piece(a, root) + piece(root, b);
      else
        total += piece(a, b);
    }
  }
  return total;
}

// Rigorous interval for the integral of |L|^p at cell width 2^-g: on each
// cell the dominated count and the box volume are bracketed by their corner
// values, so Lambda = 2^{dg} L is bracketed by integers.
struct PowerInterval {
  Rational lo, hi;
  Rational sup_hi;      // upper bound on the sup of |L|
  Rational sample_max;  // |L| at a lattice point, a certified lower bound
};

PowerInterval riemann_power_interval(const PointSet& D, unsigned g, unsigned p) {
  const unsigned d = D.d;
  const std::size_t n = D.size();
  REQUIRE(std::uint64_t(d) * g <= 26);
  const std::uint64_t cells = std::uint64_t{1} << g;
  detail::PowerSumAcc lo_acc{p}, hi_acc{p};
  std::uint64_t max_mag = 0;
  std::vector<std::uint64_t> a(d, 0);
  using u128 = detail::u128;
  for (;;) {
    std::uint64_t cmin = 0, cmax = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bool le = true, lt = true;
      for (unsigned j = 0; j < d; ++j) {
        u128 lhs = u128(D.mantissa(i, j)) << g;
        u128 corner_lo = u128(a[j]) << D.w;
        u128 corner_hi = u128(a[j] + 1) << D.w;
        if (lhs > corner_lo) le = false;
        if (lhs >= corner_hi) {
          lt = false;
          break;
        }
      }
      if (le) ++cmin;
      if (lt) ++cmax;
    }
    std::uint64_t volmin = 1, volmax = 1;
    for (unsigned j = 0; j < d; ++j) {
      volmin *= a[j];
      volmax *= a[j] + 1;
    }
    std::int64_t lam_lo =
        std::int64_t(cmin << (d * g)) - std::int64_t(n * volmax);
    std::int64_t lam_hi =
        std::int64_t(cmax << (d * g)) - std::int64_t(n * volmin);
    REQUIRE(lam_lo <= lam_hi);
    std::uint64_t mlo = lam_lo < 0 ? std::uint64_t(-lam_lo) : std::uint64_t(lam_lo);
    std::uint64_t mhi = lam_hi < 0 ? std::uint64_t(-lam_hi) : std::uint64_t(lam_hi);
    std::uint64_t big = std::max(mlo, mhi);
    if (lam_lo >= 0)
      lo_acc.add(mlo);
    else if (lam_hi <= 0)
      lo_acc.add(mhi);
    hi_acc.add(big);
    max_mag = std::max(max_mag, big);
    unsigned j = d;
    bool done = true;
    while (j-- > 0) {
      if (++a[j] < cells) {
        done = false;
        break;
      }
      a[j] = 0;
    }
    if (done) break;
  }
  PowerInterval out;
  Int denom = pow2_int(d * g * (p + 1));
  out.lo = Rational(lo_acc.finish(), denom);
  out.hi = Rational(hi_acc.finish(), denom);
  out.sup_hi = Rational(Int(max_mag), pow2_int(d * g));

  Rational best(0);
  std::fill(a.begin(), a.end(), 0);
  for (;;) {
    DyadicPoint Y;
    for (unsigned j = 0; j < d; ++j) Y.coords.push_back(make_scalar(a[j], g));
    Rational v = local_discrepancy(D, Y);
    if (v < 0) v = -v;
    if (v > best) best = v;
    unsigned j = d;
    bool done = true;
    while (j-- > 0) {
      if (++a[j] < cells) {
        done = false;
        break;
      }
      a[j] = 0;
    }
    if (done) break;
  }
  out.sample_max = best;
  return out;
}

// Direct grid power sums through the one-cell evaluator, for checking the
// sweep engines.
struct BruteSums {
  std::vector<Int> powers;
  std::uint64_t max_abs = 0;
};

BruteSums brute_grid_sums(const PointSet& D, unsigned s, const std::vector<unsigned>& ps) {
  BruteSums out;
  out.powers.assign(ps.size(), Int(0));
  const Int scale = pow2_int(D.d * (s + 1));
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << (D.d * s)); ++idx) {
    Rational L = truncated_discrepancy(D, s, grid_point(idx, D.d, s));
    Rational lam = L * Rational(scale);
    REQUIRE(denominator(lam) == 1);
    Int v = numerator(lam);
    if (v < 0) v = -v;
    for (std::size_t k = 0; k < ps.size(); ++k)
      out.powers[k] += boost::multiprecision::pow(v, ps[k]);
    out.max_abs = std::max(out.max_abs, v.convert_to<std::uint64_t>());
  }
  return out;
}

}  // namespace

TEST_CASE("local discrepancy counts strict dominance exactly") {
  PointSet grid = from_mantissas(1, 2, {0, 1, 2, 3});
  DyadicPoint y;
  y.coords.push_back(make_scalar(5, 3));  // 5/8
  CHECK(local_discrepancy(grid, y) == Rational(1, 2));

  PointSet empty = from_mantissas(2, 4, {});
  DyadicPoint y2;
  y2.coords = {make_scalar(3, 4), make_scalar(9, 4)};
  CHECK(local_discrepancy(empty, y2) == Rational(0));

  // Concatenating multisets adds their local discrepancies.
  for (unsigned trial = 0; trial < 12; ++trial) {
    PointSet A = random_point_set(100 + trial, 5, 2, 6);
    PointSet B = random_point_set(200 + trial, 3, 2, 6);
    std::vector<std::uint64_t> both(A.mantissas);
    both.insert(both.end(), B.mantissas.begin(), B.mantissas.end());
    PointSet AB = from_mantissas(2, 6, both);
    DyadicPoint Y;
    Y.coords = {make_scalar(counter_hash(7, trial) & low_bits(6), 6),
                make_scalar(counter_hash(8, trial) & low_bits(6), 6)};
    CHECK(local_discrepancy(AB, Y) ==
          local_discrepancy(A, Y) + local_discrepancy(B, Y));
  }

  // A duplicated point contributes twice.
  PointSet once = from_mantissas(1, 3, {2});
  PointSet twice = from_mantissas(1, 3, {2, 2});
  DyadicPoint y3;
  y3.coords.push_back(make_scalar(3, 3));
  CHECK(local_discrepancy(twice, y3) == 2 * local_discrepancy(once, y3));
}

TEST_CASE("exact L2 matches hand-computed and piecewise values") {
  CHECK(l2_squared_exact(from_mantissas(1, 2, {1, 3})) == Rational(1, 12));
  CHECK(l2_squared_exact(from_mantissas(1, 4, {0})) == Rational(1, 3));
  CHECK(l2_squared_exact(from_mantissas(2, 1, {1, 1})) == Rational(23, 288));
  CHECK(l2_squared_exact(from_mantissas(3, 4, {})) == Rational(0));

  for (unsigned trial = 0; trial < 20; ++trial) {
    unsigned n = 1 + trial % 9;
    PointSet D = random_point_set(300 + trial, n, 1, 7);
    CHECK(l2_squared_exact(D) == segment_power_d1(D, 2));
  }

  DiscrepancyResult r = l2_exact(from_mantissas(1, 2, {1, 3}));
  CHECK(r.method == DiscrepancyMethod::ExactClosedForm);
  CHECK(r.error_radius == 0.0);
  CHECK(r.power == 2);
  CHECK_THAT(r.value, Catch::Matchers::WithinAbs(std::sqrt(1.0 / 12.0), 1e-15));
}

TEST_CASE("exact L2 pair-sum paths agree across precisions") {
  // The same coordinates at a small precision (tree-based path) and promoted
  // to a wide precision (big-integer path) must give the same rational.
  for (unsigned trial = 0; trial < 10; ++trial) {
    unsigned n = 2 + trial;
    PointSet small = random_point_set(500 + trial, n, 2, 9);
    PointSet wide = small;
    wide.w = 62;
    for (auto& m : wide.mantissas) m <<= (62 - 9);
    CHECK(l2_squared_exact(small) == l2_squared_exact(wide));
  }
}

TEST_CASE("exact L2 sits inside rigorous Riemann intervals") {
  struct Cfg {
    unsigned seed, n, d, w, g;
  };
  const Cfg cfgs[] = {
      {600, 6, 1, 5, 8}, {601, 8, 1, 4, 8}, {610, 6, 2, 5, 7},
      {611, 9, 2, 4, 7}, {620, 5, 3, 4, 5}, {621, 7, 3, 3, 5},
  };
  for (const Cfg& c : cfgs) {
    PointSet D = random_point_set(c.seed, c.n, c.d, c.w);
    PowerInterval iv = riemann_power_interval(D, c.g, 2);
    Rational v = l2_squared_exact(D);
    CHECK(iv.lo <= v);
    CHECK(v <= iv.hi);
  }
  // Duplicates included.
  PointSet dup = from_mantissas(2, 3, {1, 2, 1, 2, 5, 7});
  PowerInterval iv = riemann_power_interval(dup, 7, 2);
  Rational v = l2_squared_exact(dup);
  CHECK(iv.lo <= v);
  CHECK(v <= iv.hi);
}

TEST_CASE("exact L infinity attains hand-computed suprema") {
  CHECK(linf_exact(from_mantissas(1, 2, {1, 3})).exact_power == Rational(1, 2));
  CHECK(linf_exact(from_mantissas(1, 4, {0})).exact_power == Rational(1));
  CHECK(linf_exact(from_mantissas(1, 2, {1, 1})).exact_power == Rational(3, 2));
  CHECK(linf_exact(from_mantissas(2, 1, {1, 1})).exact_power == Rational(3, 4));
  CHECK(linf_exact(from_mantissas(2, 4, {})).exact_power == Rational(0));

  DiscrepancyResult r = linf_exact(from_mantissas(1, 2, {1, 3}));
  CHECK(r.method == DiscrepancyMethod::ExactCriticalGrid);
  CHECK(r.error_radius == 0.0);
  CHECK(r.q == kInfiniteQ);
}

TEST_CASE("exact L infinity is sandwiched by staircase scans") {
  struct Cfg {
    unsigned seed, n, d, w, g;
  };
  const Cfg cfgs[] = {
      {700, 7, 1, 6, 12}, {701, 4, 1, 3, 12}, {710, 6, 2, 5, 7},
      {711, 10, 2, 6, 7}, {720, 5, 3, 4, 5},  {721, 8, 3, 3, 5},
  };
  for (const Cfg& c : cfgs) {
    PointSet D = random_point_set(c.seed, c.n, c.d, c.w);
    PowerInterval iv = riemann_power_interval(D, c.g, 1);
    Rational sup = linf_exact(D).exact_power;
    CHECK(iv.sample_max <= sup);
    CHECK(sup <= iv.sup_hi);
    // The L2 value can never exceed the sup norm.
    CHECK(to_double(l2_squared_exact(D)) <=
          to_double(sup * sup) + 1e-15);
  }
}

TEST_CASE("exact L infinity refuses infeasible candidate grids") {
  PointSet big = random_point_set(1, 30, 5, 8);
  CHECK_THROWS_AS(linf_exact(big), feasibility_error);
}

TEST_CASE("grid power sweeps match the one-cell evaluator") {
  const std::vector<unsigned> powers{1, 2, 4};
  struct Cfg {
    unsigned seed, n, d, w, s;
  };
  const Cfg cfgs[] = {
      {800, 5, 1, 6, 1}, {801, 8, 1, 6, 4}, {802, 3, 1, 8, 6},
      {810, 5, 2, 6, 1}, {811, 9, 2, 6, 3}, {812, 6, 2, 4, 4},
      {820, 4, 3, 5, 1}, {821, 7, 3, 5, 2}, {822, 5, 3, 6, 3},
      {830, 0, 2, 4, 3},  // empty set
  };
  for (const Cfg& c : cfgs) {
    PointSet D = random_point_set(c.seed, c.n, c.d, c.w);
    BruteSums brute = brute_grid_sums(D, c.s, powers);
    detail::GridNormSpec spec;
    spec.int_powers = powers;
    spec.want_max = true;
    auto floors = detail::truncated_floors(D, c.s);
    auto sums = detail::grid_power_sums(floors, D.d, D.size(), c.s, spec);
    for (std::size_t k = 0; k < powers.size(); ++k)
      CHECK(sums.int_sums[k] == brute.powers[k]);
    CHECK(sums.max_abs == brute.max_abs);
  }
}

TEST_CASE("grid L_q brackets contain independently computed norms") {
  // d = 1: exact piecewise integrals for q in {1, 2, 4}.
  for (unsigned trial = 0; trial < 8; ++trial) {
    PointSet D = random_point_set(900 + trial, 2 + trial, 1, 8);
    for (unsigned s : {2u, 4u, 6u}) {
      for (unsigned q : {1u, 2u, 4u}) {
        DiscrepancyResult r = lq_grid(D, q, s);
        double truth = std::pow(to_double(segment_power_d1(D, q)), 1.0 / q);
        CHECK(r.lo <= truth + 1e-12);
        CHECK(truth <= r.hi + 1e-12);
      }
    }
  }
  // d = 2 and 3: rigorous Riemann intervals; both intervals hold the truth,
  // so they must overlap.
  struct Cfg {
    unsigned seed, n, d, w, g, s;
  };
  const Cfg cfgs[] = {{950, 6, 2, 5, 7, 4}, {951, 9, 2, 6, 7, 5}, {960, 5, 3, 4, 5, 3}};
  for (const Cfg& c : cfgs) {
    PointSet D = random_point_set(c.seed, c.n, c.d, c.w);
    for (unsigned q : {1u, 2u}) {
      PowerInterval iv = riemann_power_interval(D, c.g, q);
      DiscrepancyResult r = lq_grid(D, q, c.s);
      double ext_lo = std::pow(to_double(iv.lo), 1.0 / q);
      double ext_hi = std::pow(to_double(iv.hi), 1.0 / q);
      CHECK(r.lo <= ext_hi + 1e-12);
      CHECK(ext_lo <= r.hi + 1e-12);
    }
  }
  // q = 2 brackets must also contain the closed-form value.
  for (unsigned trial = 0; trial < 6; ++trial) {
    PointSet D = random_point_set(970 + trial, 3 + trial, 2, 10);
    double exact = std::sqrt(to_double(l2_squared_exact(D)));
    for (unsigned s : {2u, 4u, 6u}) {
      DiscrepancyResult r = lq_grid(D, 2, s);
      CHECK(r.lo <= exact + 1e-12);
      CHECK(exact <= r.hi + 1e-12);
    }
  }
}

TEST_CASE("grid L_q carries exact rationals with dyadic denominators") {
  PointSet D = random_point_set(1000, 7, 2, 9);
  for (unsigned q : {1u, 2u, 3u}) {
    DiscrepancyResult r = lq_grid(D, q, 4);
    CHECK(r.power == q);
    CHECK(r.s_used == 4);
    CHECK(r.method == DiscrepancyMethod::GridDecomposition);
    Int full = pow2_int(2 * 4 + q * 2 * 5);
    CHECK(full % denominator(r.exact_power) == 0);
    CHECK_THAT(r.value,
               Catch::Matchers::WithinRel(std::pow(to_double(r.exact_power), 1.0 / q), 1e-12));
    CHECK(r.error_radius > 0);
  }
}

TEST_CASE("grid norms are monotone in q on the same grid") {
  // Exact cross-multiplied comparison: ||f||_q1 <= ||f||_q2 iff
  // (S_q1 / 2^{ds})^{q2} <= (S_q2 / 2^{ds})^{q1} after unit rescaling.
  for (unsigned trial = 0; trial < 6; ++trial) {
    PointSet D = random_point_set(1100 + trial, 4 + trial, 2, 8);
    unsigned s = 3;
    auto norm_pow = [&](unsigned q) {
      // ||L^(s)||^q as an exact rational
      return lq_grid(D, q, s).exact_power;
    };
    Rational n1 = norm_pow(1), n2 = norm_pow(2), n4 = norm_pow(4);
    CHECK(rat_pow(n1, 2) <= n2);        // (||.||_1)^2 <= (||.||_2)^2
    CHECK(rat_pow(n2, 2) <= n4);        // (||.||_2)^4 <= (||.||_4)^4
    // And the bracket-level consequence for the true norms.
    DiscrepancyResult r1 = lq_grid(D, 1, s), r4 = lq_grid(D, 4, s);
    CHECK(r1.lo <= r4.hi + 1e-12);
  }
}

TEST_CASE("grid L_q handles fractional exponents") {
  PointSet D = random_point_set(1200, 6, 2, 7);
  for (double q : {0.5, 1.5, 2.5}) {
    DiscrepancyResult r = lq_grid(D, q, 3);
    CHECK(r.power == 0);
    CHECK(r.lo <= r.value);
    CHECK(r.value <= r.hi);
    CHECK(std::isfinite(r.value));
    CHECK(r.value >= 0);
  }
  // A fractional exponent evaluated at an integer value agrees with the
  // integer path.
  DiscrepancyResult ri = lq_grid(D, 2, 3);
  detail::GridNormSpec spec;
  spec.real_powers = {2.0};
  auto floors = detail::truncated_floors(D, 3);
  auto sums = detail::grid_power_sums(floors, D.d, D.size(), 3, spec);
  double viaReal = std::sqrt(sums.real_sums[0] * std::exp2(-2.0 * 3 - 2.0 * 2 * 4));
  CHECK_THAT(ri.value, Catch::Matchers::WithinRel(viaReal, 1e-9));
}

TEST_CASE("grid L_q radius is invariant under dyadic shifts") {
  for (unsigned trial = 0; trial < 8; ++trial) {
    PointSet D = random_point_set(1300 + trial, 6, 2, 8);
    DyadicPoint T;
    T.coords = {make_scalar(counter_hash(50, trial) & low_bits(8), 8),
                make_scalar(counter_hash(51, trial) & low_bits(8), 8)};
    unsigned s = 3;
    CHECK(error_term_bound_uniform(D, s) ==
          error_term_bound_uniform(shift_set(D, T), s));
  }
}

TEST_CASE("grid L_q rejects infeasible or invalid requests") {
  PointSet D = random_point_set(1400, 4, 3, 10);
  CHECK_THROWS_AS(lq_grid(D, 2, 10), feasibility_error);  // 2^(3*10) cells
  CHECK_THROWS_AS(lq_grid(D, 0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(lq_grid(D, kInfiniteQ, 3), std::invalid_argument);
}

TEST_CASE("norm chain holds on random sets") {
  for (unsigned trial = 0; trial < 6; ++trial) {
    PointSet D = random_point_set(1500 + trial, 3 + trial, (trial % 2) + 1, 8);
    for (double q : {1.0, 2.0, 4.0}) {
      for (unsigned s : {2u, 4u, 6u}) {
        NormChainReport rep = lemma62_check(D, q, s);
        CAPTURE(trial, q, s, rep.linf, rep.lq_lo, rep.rhs_hi);
        CHECK(rep.lower_ok);
        CHECK(rep.upper_ok);
        CHECK(rep.holds);
        CHECK(rep.e_inf_bound > 0);
      }
    }
  }
  CHECK_THROWS_AS(lemma62_check(random_point_set(1, 4, 1, 6), 0.5, 3),
                  std::invalid_argument);
}

TEST_CASE("discrepancy results are reproducible") {
  PointSet D = random_point_set(1600, 8, 2, 9);
  DiscrepancyResult a = lq_grid(D, 1.5, 4);
  DiscrepancyResult b = lq_grid(D, 1.5, 4);
  CHECK(a.value == b.value);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(l2_exact(D).value == l2_exact(D).value);
}
