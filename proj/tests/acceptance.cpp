// Acceptance gate: ten end-to-end checks against independent oracles, one
// pass/fail line each.  Exact rational comparisons wherever the quantity is
// rational; every float tolerance and sampling seed is pinned here.
//
// Each check also carries the runtime budget it must meet; a slow pass is a
// failure.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "dyadisc/decomposition.hpp"
#include "dyadisc/discrepancy.hpp"
#include "dyadisc/dyadic.hpp"
#include "dyadisc/mean.hpp"
#include "dyadisc/pointset.hpp"
#include "dyadisc/rademacher.hpp"
#include "dyadisc/rational.hpp"
#include "dyadisc/rng.hpp"

#ifndef DYADISC_CLI_PATH
#error "DYADISC_CLI_PATH must point at the command-line binary"
#endif

namespace {

using namespace dyadisc;

constexpr double kFloatSlack = 1e-12;       // representation slack on exact values
constexpr double kOddExponentTol = 1e-12;   // relative, decoupling identity at odd q

struct Check {
  bool ok = true;
  std::string why;
  void fail(const std::string& msg) {
    if (ok) why = msg;
    ok = false;
  }
  void expect(bool cond, const std::string& msg) {
    if (!cond) fail(msg);
  }
};

Rational rational_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

DyadicPoint grid_point(const std::vector<std::uint64_t>& m, unsigned s) {
  DyadicPoint p;
  for (std::uint64_t v : m) p.coords.push_back(make_scalar(v, s));
  return p;
}

// Odometer over {0..2^s-1}^d; returns false once wrapped.
bool next_cell(std::vector<std::uint64_t>& m, unsigned s) {
  for (unsigned j = unsigned(m.size()); j-- > 0;) {
    if (++m[j] < (std::uint64_t{1} << s)) return true;
    m[j] = 0;
  }
  return false;
}

// ---- 1: pointwise decomposition residual bound -------------------------
//
// 200 random subsets of the level-3 planar grid, every level-3 anchor,
// s in {1,2,3}: the residual L - L^(s) never exceeds its pointwise bound,
// and on the level-s grid the truncation coincides with the coefficient
// polynomial of its own local table.  All comparisons exact, zero tolerance.
bool crit_decomposition(Check& c) {
  for (unsigned t = 0; t < 200; ++t) {
    std::array<std::uint64_t, 64> perm;
    std::iota(perm.begin(), perm.end(), 0);
    for (unsigned i = 0; i < 64; ++i) {
      unsigned j = i + unsigned(counter_hash(11, t * 64 + i) % (64 - i));
      std::swap(perm[i], perm[j]);
    }
    std::size_t n = counter_hash(12, t) % 9;
    std::vector<std::uint64_t> mantissas;
    for (std::size_t i = 0; i < n; ++i) {
      mantissas.push_back(perm[i] & 7);
      mantissas.push_back(perm[i] >> 3);
    }
    PointSet D = make_point_set(2, 3, std::move(mantissas));

    for (unsigned s = 1; s <= 3; ++s) {
      std::vector<std::uint64_t> m(2, 0);
      do {
        DyadicPoint Y = grid_point(m, 3);
        Rational residual = local_discrepancy(D, Y) - truncated_discrepancy(D, s, Y);
        if (rational_abs(residual) > error_term_bound(D, s, Y)) {
          c.fail("residual exceeds its bound at set " + std::to_string(t) +
                 " s=" + std::to_string(s));
          return false;
        }
      } while (next_cell(m, 3));

      m.assign(2, 0);
      do {
        DyadicPoint Z = grid_point(m, s);
        RademacherPolynomial f = table_polynomial(micro_local_table(D, s, Z));
        if (evaluate(f, Z) != truncated_discrepancy(D, s, Z)) {
          c.fail("table polynomial disagrees with the truncation at set " +
                 std::to_string(t) + " s=" + std::to_string(s));
          return false;
        }
      } while (next_cell(m, s));
    }
  }
  return c.ok;
}

// ---- 2: shift/anchor decoupling identity --------------------------------
//
// The shift-enumerated mean of grid q-powers equals the anchor-enumerated
// form: exact at even q, relative error <= kOddExponentTol at q = 1.
// d = 1 with s <= 4 and d = 2 with s <= 3, eight random sets per shape.
bool crit_decoupling(Check& c) {
  const unsigned powers[3] = {1, 2, 4};
  auto run_shape = [&](unsigned d, unsigned s_max) {
    for (unsigned s = 1; s <= s_max && c.ok; ++s) {
      for (unsigned t = 0; t < 8 && c.ok; ++t) {
        std::size_t n = 1 + counter_hash(21, (d * 8 + s) * 8 + t) % 8;
        PointSet D = random_point_set(1000 + t + 10 * s + 100 * d, n, d, 8);

        Rational sums[3] = {Rational(0), Rational(0), Rational(0)};
        std::vector<std::uint64_t> tm(d, 0);
        do {
          PointSet S = shift_set(D, grid_point(tm, s));
          std::vector<std::uint64_t> ym(d, 0);
          do {
            Rational v = rational_abs(truncated_discrepancy(S, s, grid_point(ym, s)));
            Rational v2 = v * v;
            sums[0] += v;
            sums[1] += v2;
            sums[2] += v2 * v2;
          } while (next_cell(ym, s));
        } while (next_cell(tm, s));
        Rational cells(pow2_int(2u * d * s));
        for (auto& r : sums) r /= cells;

        for (int qi = 0; qi < 3; ++qi) {
          Rational rhs = principal_term_power(D, s, powers[qi]);
          if (powers[qi] % 2 == 0) {
            c.expect(sums[qi] == rhs, "even-exponent decoupling mismatch at d=" +
                                          std::to_string(d) + " s=" + std::to_string(s));
          } else {
            double a = to_double(sums[qi]);
            double b = to_double(rhs);
            c.expect(std::abs(a - b) <= kOddExponentTol * std::max(1.0, std::abs(b)),
                     "odd-exponent decoupling drift at d=" + std::to_string(d) +
                         " s=" + std::to_string(s));
          }
        }
      }
    }
  };
  run_shape(1, 4);
  run_shape(2, 3);
  return c.ok;
}

// ---- 3: moment comparison suite ------------------------------------------
//
// 1000 random tables (k <= 2, s <= 6) stay inside the two-sided moment
// bounds at q in {1,2,4}; the one-dimensional sup equals the coefficient
// l1 norm exactly for 1000 random tables; and the sign-function family is
// orthonormal, checked by full grid enumeration on small shapes and via the
// per-axis product form up to 256 functions.
bool crit_moments(Check& c) {
  for (unsigned t = 0; t < 1000 && c.ok; ++t) {
    unsigned k = 1 + unsigned(counter_hash(31, t) % 2);
    unsigned s = 1 + unsigned(counter_hash(32, t) % 6);
    std::size_t ncoef = coefficient_count(k, s);
    std::vector<Rational> coeffs(ncoef);
    for (std::size_t i = 0; i < ncoef; ++i)
      coeffs[i] = Rational(int(counter_hash(33, t * ncoef + i) % 33) - 16, 4);
    RademacherPolynomial f = make_polynomial(k, s, std::move(coeffs));
    for (double q : {1.0, 2.0, 4.0}) {
      KhinchinReport rep = khinchin_check(f, q);
      c.expect(rep.lower_ok && rep.upper_ok,
               "moment bound failed at table " + std::to_string(t) + " q=" +
                   std::to_string(q));
    }
  }

  for (unsigned t = 0; t < 1000 && c.ok; ++t) {
    unsigned s = 1 + unsigned(counter_hash(34, t) % 6);
    std::vector<Rational> coeffs(s + 1);
    for (unsigned i = 0; i <= s; ++i)
      coeffs[i] = Rational(int(counter_hash(35, t * 8 + i) % 65) - 32, 8);
    RademacherPolynomial f = make_polynomial(1, s, std::move(coeffs));
    Rational l1(0);
    for (const Rational& v : f.coefficients) l1 += rational_abs(v);
    c.expect(norm_grid_sup(f) == l1, "one-dimensional sup identity failed at table " +
                                         std::to_string(t));
  }

  // Full enumeration: Gram of the (s+1)^k sign functions over the level-s
  // grid is 2^{ks} I.
  for (auto [k, s] : std::vector<std::pair<unsigned, unsigned>>{{1, 6}, {2, 3}, {3, 2}}) {
    std::size_t nf = 1;
    for (unsigned j = 0; j < k; ++j) nf *= s + 1;
    std::vector<std::vector<unsigned>> levels(nf, std::vector<unsigned>(k));
    for (std::size_t idx = 0; idx < nf; ++idx) {
      std::size_t rest = idx;
      for (unsigned j = k; j-- > 0;) {
        levels[idx][j] = unsigned(rest % (s + 1));
        rest /= s + 1;
      }
    }
    std::vector<long long> gram(nf * nf, 0);
    std::vector<std::uint64_t> m(k, 0);
    do {
      DyadicPoint Y = grid_point(m, s);
      std::vector<int> vals(nf);
      for (std::size_t i = 0; i < nf; ++i) vals[i] = rademacher_multi(levels[i], Y);
      for (std::size_t i = 0; i < nf; ++i)
        for (std::size_t j = 0; j < nf; ++j) gram[i * nf + j] += vals[i] * vals[j];
    } while (next_cell(m, s));
    long long total = 1ll << (std::uint64_t(k) * s);
    for (std::size_t i = 0; i < nf && c.ok; ++i)
      for (std::size_t j = 0; j < nf; ++j)
        c.expect(gram[i * nf + j] == (i == j ? total : 0),
                 "enumerated Gram is not the identity at k=" + std::to_string(k));
  }

  // Product form: the grid inner product factors per axis, so the Gram of up
  // to 256 functions reduces to the one-axis Gram at each level pair.
  for (auto [k, s] : std::vector<std::pair<unsigned, unsigned>>{{2, 15}, {3, 5}, {4, 3}}) {
    std::vector<long long> axis((s + 1) * (s + 1), 0);
    for (std::uint64_t mm = 0; mm < (std::uint64_t{1} << s); ++mm) {
      DyadicScalar y = make_scalar(mm, s);
      std::vector<int> r(s + 1);
      for (unsigned a = 0; a <= s; ++a) r[a] = rademacher(a, y);
      for (unsigned a = 0; a <= s; ++a)
        for (unsigned b = 0; b <= s; ++b) axis[a * (s + 1) + b] += r[a] * r[b];
    }
    long long cells = 1ll << s;
    for (unsigned a = 0; a <= s && c.ok; ++a)
      for (unsigned b = 0; b <= s; ++b)
        c.expect(axis[a * (s + 1) + b] == (a == b ? cells : 0),
                 "axis Gram is not the identity at s=" + std::to_string(s));
    std::size_t nf = 1;
    for (unsigned j = 0; j < k; ++j) nf *= s + 1;
    c.expect(nf <= 256, "product Gram shape exceeds 256 functions");
  }
  return c.ok;
}

// ---- 4: net certification vs brute force ---------------------------------

// Minimal passing quality straight from the definition: scan every level
// split and offset of each candidate volume.
unsigned oracle_minimal_delta(const PointSet& D) {
  std::size_t n = D.size();
  unsigned s = unsigned(std::countr_zero(n));
  for (unsigned delta = 0; delta <= s; ++delta) {
    unsigned target = s - delta;
    std::uint64_t want = std::uint64_t{1} << delta;
    bool all_ok = true;
    // enumerate compositions of `target` into d parts
    std::vector<unsigned> stackv(D.d, 0);
    std::function<void(unsigned, unsigned)> rec = [&](unsigned j, unsigned left) {
      if (!all_ok) return;
      if (j + 1 == D.d) {
        stackv[j] = left;
        std::vector<std::uint64_t> off(D.d, 0);
        for (;;) {
          std::uint64_t cnt = 0;
          for (std::size_t i = 0; i < n; ++i) {
            bool in = true;
            for (unsigned jj = 0; jj < D.d; ++jj)
              if (floor_mantissa(DyadicScalar{D.mantissa(i, jj), D.w}, stackv[jj]) !=
                  off[jj]) {
                in = false;
                break;
              }
            if (in) ++cnt;
          }
          if (cnt != want) {
            all_ok = false;
            return;
          }
          unsigned jj = D.d;
          bool done = true;
          while (jj-- > 0) {
            if (++off[jj] < (std::uint64_t{1} << stackv[jj])) {
              done = false;
              break;
            }
            off[jj] = 0;
          }
          if (done) break;
        }
        return;
      }
      for (unsigned a = 0; a <= left && all_ok; ++a) {
        stackv[j] = a;
        rec(j + 1, left - a);
      }
    };
    rec(0, target);
    if (all_ok) return delta;
  }
  return s;  // unreachable: the single full box always passes
}

bool crit_nets(Check& c) {
  for (unsigned s = 0; s <= 12 && c.ok; ++s) {
    PointSet D = generate_bitrev_net(s);
    NetCheckReport rep = check_net(D, 0);
    c.expect(rep.is_net && rep.minimal_delta == 0,
             "bit-reversal net fails at s=" + std::to_string(s));
    for (unsigned i = 0; i < 100 && c.ok; ++i) {
      PointSet S = shift_set(D, random_grid_point(41, s * 100 + i, 2, s));
      c.expect(check_net(S, 0).minimal_delta == 0,
               "shift changed the minimal quality at s=" + std::to_string(s));
    }
  }
  if (!c.ok) return false;

  std::vector<PointSet> zoo;
  for (unsigned s = 0; s <= 6; ++s) zoo.push_back(generate_bitrev_net(s));
  for (unsigned d = 1; d <= 3; ++d)
    for (unsigned s = 1; s <= 6; ++s)
      zoo.push_back(generate_digital_net(identity_matrices(d, s)));
  for (unsigned d = 2; d <= 3; ++d)
    for (unsigned s = 1; s <= 6; ++s)
      zoo.push_back(generate_digital_net(sobol_matrices(d, s, default_direction_path())));
  for (unsigned t = 0; t < 10; ++t) {
    unsigned d = 1 + unsigned(counter_hash(42, t) % 3);
    unsigned s = 1 + unsigned(counter_hash(43, t) % 6);
    zoo.push_back(random_point_set(500 + t, std::size_t{1} << s, d, s));
  }
  for (std::size_t i = 0; i < zoo.size() && c.ok; ++i) {
    const PointSet& D = zoo[i];
    unsigned s = unsigned(std::countr_zero(D.size()));
    unsigned want = oracle_minimal_delta(D);
    NetCheckReport rep = check_net(D, 0);
    c.expect(rep.minimal_delta == want,
             "minimal quality disagrees with brute force at zoo set " + std::to_string(i));
    for (unsigned delta : {0u, want, s}) {
      c.expect(check_net(D, delta).is_net == (want <= delta),
               "claim verdict disagrees with brute force at zoo set " + std::to_string(i));
    }
  }
  return c.ok;
}

// ---- 5: shift-averaged upper bound ---------------------------------------
//
// Exact means for s in {2..5}, sampled means (10^4 shifts, seed 2024) for
// s in {6..10}, q in {1,2,4}: always below the closed-form bound.  In exact
// mode even the bracket top stays below it.
bool crit_upper_bound(Check& c) {
  for (unsigned s = 2; s <= 5 && c.ok; ++s) {
    PointSet D = generate_bitrev_net(s);
    for (double q : {1.0, 2.0, 4.0}) {
      TheoremReport rep = verify_theorem(D, TheoremId::T21, q, s, MeanMode::Exact);
      c.expect(rep.verdict == Verdict::Holds,
               "exact upper bound fails at s=" + std::to_string(s));
      c.expect(rep.measured.hi < rep.bound_value,
               "exact bracket top crosses the bound at s=" + std::to_string(s));
    }
  }
  for (unsigned s = 6; s <= 10 && c.ok; ++s) {
    PointSet D = generate_bitrev_net(s);
    for (double q : {1.0, 2.0, 4.0}) {
      TheoremReport rep = verify_theorem(D, TheoremId::T21, q, s, MeanMode::Sampled,
                                         SampleSpec{10000, 2024});
      c.expect(rep.verdict == Verdict::Holds,
               "sampled upper bound fails at s=" + std::to_string(s) + " q=" +
                   std::to_string(q));
    }
  }
  return c.ok;
}

// ---- 6: mean lower bound at small exponent -------------------------------
//
// Random planar sets of 4 and 8 points, q = 1, level at the activation
// threshold (11 and 12): the 10^3-shift sampled mean clears the closed-form
// constant 2^-8 (log2 N)^(1/2).
bool crit_lower_bound_mean(Check& c) {
  for (std::size_t n : {std::size_t{4}, std::size_t{8}}) {
    unsigned s = n == 4 ? 11 : 12;
    PointSet D = random_point_set(60 + n, n, 2, 20);
    TheoremReport rep = verify_theorem(D, TheoremId::T22, 1.0, s, MeanMode::Sampled,
                                       SampleSpec{1000, 7});
    c.expect(rep.minimal_s == s, "activation level moved for n=" + std::to_string(n));
    c.expect(rep.threshold_met, "threshold not met at its own minimum");
    double want = std::exp2(-8.0) * std::sqrt(std::log2(double(n)));
    c.expect(std::abs(rep.bound_value - want) <= kFloatSlack * want,
             "closed-form constant drifted for n=" + std::to_string(n));
    c.expect(rep.verdict == Verdict::Holds && rep.measured.value > rep.bound_value,
             "sampled mean does not clear the bound for n=" + std::to_string(n));
  }
  return c.ok;
}

// ---- 7: sup lower bound in dimension three --------------------------------
//
// Four random points in the cube, level at the activation threshold (10):
// the max sup-discrepancy over 10^3 sampled shifts exceeds
// 2^-7 (log2 4)^(3/2) = 2^-7 2^(3/2).
bool crit_lower_bound_sup(Check& c) {
  PointSet D = random_point_set(70, 4, 3, 20);
  TheoremReport rep = verify_theorem(D, TheoremId::T23, kInfiniteQ, 10,
                                     MeanMode::Sampled, SampleSpec{1000, 9});
  c.expect(rep.minimal_s == 10, "activation level moved");
  c.expect(rep.threshold_met, "threshold not met at its own minimum");
  double want = std::exp2(-7.0) * std::exp2(1.5);
  c.expect(std::abs(rep.bound_value - want) <= kFloatSlack * want,
           "closed-form constant drifted");
  c.expect(rep.verdict == Verdict::Holds && rep.measured.value > rep.bound_value,
           "sampled sup does not clear the bound");
  return c.ok;
}

// ---- 8: discrepancy cross-validation --------------------------------------
//
// 50 random sets, dimension 1..3.  The closed-form L2 value matches a
// 2^-10-mesh Riemann sum within the mesh budget 2 d N^2 2^-10 (derivative
// of the squared local discrepancy is at most 2 N^2 per axis, counts are
// constant inside mesh cells).  The grid bracket contains the L2 value, the
// sup value dominates every dense-grid sample and exceeds the grid max by
// at most the staircase drift N d h, and the norm chain holds for
// q in {1,2,4}, s in {2,4,6}.
bool crit_cross_validation(Check& c) {
  const unsigned mesh_level = 10;
  const std::uint64_t M = std::uint64_t{1} << mesh_level;
  for (unsigned t = 0; t < 50 && c.ok; ++t) {
    unsigned d = 1 + unsigned(counter_hash(81, t) % 3);
    unsigned g = d == 1 ? 10 : d == 2 ? 6 : 4;  // dense-grid level per dimension
    std::size_t n = 1 + counter_hash(82, t) % 16;
    PointSet D = random_point_set(800 + t, n, d, g);

    // mesh Riemann sum via counting: anchors m/M, m in {1..M}^d
    std::vector<std::uint64_t> tt(n * d);  // M x, integral since w <= mesh_level
    for (std::size_t i = 0; i < n; ++i)
      for (unsigned j = 0; j < d; ++j)
        tt[i * d + j] = D.mantissa(i, j) << (mesh_level - g);
    Int sum_count2(0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        Int prod(1);
        for (unsigned j = 0; j < d; ++j)
          prod *= Int(M - std::max(tt[i * d + j], tt[k * d + j]));
        sum_count2 += prod;
      }
    auto tri = [](std::uint64_t x) { return Int(x) * Int(x + 1) / 2; };
    Int sum_count_vol(0);
    for (std::size_t i = 0; i < n; ++i) {
      Int prod(1);
      for (unsigned j = 0; j < d; ++j) prod *= tri(M) - tri(tt[i * d + j]);
      sum_count_vol += prod;
    }
    Int q_m = Int(M) * Int(M + 1) * Int(2 * M + 1) / 6;
    Int sum_vol2(1);
    for (unsigned j = 0; j < d; ++j) sum_vol2 *= q_m;
    Int md = pow2_int(d * mesh_level);
    Int nn = Int(static_cast<std::uint64_t>(n));
    Rational riemann = Rational(sum_count2 * md * md - 2 * nn * sum_count_vol * md +
                                    nn * nn * sum_vol2,
                                md * md * md);
    Rational l2sq = l2_squared_exact(D);
    Rational budget(Int(2 * d) * nn * nn, Int(M));
    c.expect(rational_abs(l2sq - riemann) <= budget,
             "mesh Riemann sum disagrees with the closed form at set " + std::to_string(t));

    // grid bracket contains the L2 value
    DiscrepancyResult r2 = l2_exact(D);
    for (unsigned s : {2u, 6u}) {
      DiscrepancyResult gq = lq_grid(D, 2.0, s);
      c.expect(gq.lo - kFloatSlack <= r2.value && r2.value <= gq.hi + kFloatSlack,
               "grid bracket misses the L2 value at set " + std::to_string(t));
    }

    // sup vs dense grid: exact comparisons against the critical-grid value
    DiscrepancyResult rinf = linf_exact(D);
    std::uint64_t gm = std::uint64_t{1} << g;
    Int gd = pow2_int(d * g);
    Int best_num(0);
    std::vector<std::uint64_t> m(d, 1);
    for (;;) {
      std::uint64_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i) {
        bool in = true;
        // strict x < m/2^g with both at scale 2^g
        for (unsigned j = 0; in && j < d; ++j)
          if (D.mantissa(i, j) >= m[j]) in = false;
        if (in) ++cnt;
      }
      Int volnum(1);
      for (unsigned j = 0; j < d; ++j) volnum *= Int(m[j]);
      Int lnum = Int(cnt) * gd - nn * volnum;
      if (lnum < 0) lnum = -lnum;
      if (lnum > best_num) best_num = lnum;
      c.expect(Rational(lnum, gd) <= rinf.exact_power,
               "a dense-grid sample exceeds the sup value at set " + std::to_string(t));
      unsigned j = d;
      bool done = true;
      while (j-- > 0) {
        if (++m[j] <= gm) {
          done = false;
          break;
        }
        m[j] = 1;
      }
      if (done) break;
    }
    c.expect(rinf.exact_power <= Rational(best_num, gd) + Rational(Int(n) * Int(d), Int(gm)),
             "sup value exceeds the grid max plus the staircase drift at set " +
                 std::to_string(t));

    // norm chain
    for (double q : {1.0, 2.0, 4.0})
      for (unsigned s : {2u, 4u, 6u})
        c.expect(lemma62_check(D, q, s).holds,
                 "norm chain fails at set " + std::to_string(t) + " q=" +
                     std::to_string(q) + " s=" + std::to_string(s));
  }
  return c.ok;
}

// ---- 9: index counts and vanishing coefficients ---------------------------

// Count level vectors in {0..s}^k with the given sum, straight enumeration.
Int enumerate_slice(unsigned k, unsigned sigma, unsigned s) {
  Int total(0);
  std::vector<unsigned> a(k, 0);
  for (;;) {
    unsigned sum = 0;
    for (unsigned v : a) sum += v;
    if (sum == sigma) total += 1;
    unsigned j = k;
    bool done = true;
    while (j-- > 0) {
      if (++a[j] <= s) {
        done = false;
        break;
      }
      a[j] = 0;
    }
    if (done) break;
  }
  return total;
}

bool crit_combinatorics(Check& c) {
  for (unsigned k = 2; k <= 4 && c.ok; ++k)
    for (unsigned sigma = 0; sigma <= 20 && c.ok; ++sigma)
      for (unsigned s : {3u, 7u, 20u}) {
        JSigmaReport rep = j_sigma(k, sigma, s);
        c.expect(rep.count == enumerate_slice(k, sigma, std::min(s, sigma)),
                 "slice count disagrees with enumeration at k=" + std::to_string(k) +
                     " sigma=" + std::to_string(sigma));
        if (s >= sigma) {
          c.expect(rep.applicable && rep.bound_ok,
                   "slice lower bound fails at k=" + std::to_string(k) +
                       " sigma=" + std::to_string(sigma));
          c.expect(Rational(rep.count) >= rat_pow(Rational(sigma, k - 1), k - 1),
                   "slice bound re-check fails at k=" + std::to_string(k));
        } else {
          c.expect(!rep.applicable, "bound marked applicable below its level");
        }
      }
  if (!c.ok) return false;

  // Vanishing: on a certified net, every coefficient with level sum at most
  // s - delta is zero, exhaustively over all shifts.
  auto check_vanishing = [&](const PointSet& D, unsigned s, const char* what) {
    unsigned delta = check_net(D, 0).minimal_delta;
    std::vector<std::uint64_t> zm(2, 0);
    do {
      MicroLocalTable tbl = micro_local_table(D, s, grid_point(zm, s));
      for (std::size_t idx = 0; idx < tbl.values.size() && c.ok; ++idx) {
        std::vector<unsigned> lv = tbl.levels_of(idx);
        unsigned sum = 0;
        for (unsigned a : lv) sum += a;
        if (sum + delta <= s)
          c.expect(tbl.values[idx] == 0,
                   std::string("coefficient fails to vanish on ") + what +
                       " at s=" + std::to_string(s));
      }
    } while (c.ok && next_cell(zm, s));
  };
  for (unsigned s = 1; s <= 6 && c.ok; ++s)
    check_vanishing(generate_bitrev_net(s), s, "the bit-reversal net");
  for (unsigned s = 1; s <= 4 && c.ok; ++s)
    check_vanishing(generate_digital_net(identity_matrices(2, s)), s,
                    "the diagonal net");
  return c.ok;
}

// ---- 10: byte-identical reports across workers ----------------------------

std::string run_cli(const std::string& args, int* code) {
  std::string cmd = std::string("\"") + DYADISC_CLI_PATH + "\" " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    *code = -1;
    return "";
  }
  std::string out;
  char buf[4096];
  std::size_t nread = 0;
  while ((nread = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, nread);
  int status = ::pclose(pipe);
  *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

bool crit_determinism(Check& c) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / ("dyadisc-acceptance-" +
                                              std::to_string(::getpid()));
  fs::create_directories(dir);
  std::string net = (dir / "net.pts").string();
  int code = 0;
  run_cli("net gen --family bitrev --s 6 --out " + net, &code);
  c.expect(code == 0, "net generation failed");
  if (!c.ok) return false;

  std::string base = "mean --in " + net + " --s 6 --q 1,2,inf --mode sampled"
                     " --count 64 --seed 11 --threads ";
  std::string first;
  for (int round = 0; round < 2 && c.ok; ++round)
    for (unsigned th : {1u, 2u, 4u}) {
      std::string out = run_cli(base + std::to_string(th), &code);
      c.expect(code == 0, "sampled mean run failed");
      if (first.empty())
        first = out;
      else
        c.expect(out == first, "sampled mean bytes differ across runs or workers");
    }

  std::string tcmd = "theorem 2.1 --net bitrev --s 6 --q 1 --mode sampled"
                     " --count 200 --seed 5 --threads ";
  std::string t1 = run_cli(tcmd + "1", &code);
  c.expect(code == 0, "sampled verdict run failed");
  std::string t3 = run_cli(tcmd + "3", &code);
  c.expect(code == 0 && t1 == t3, "verdict bytes differ across worker caps");
  return c.ok;
}

struct Criterion {
  const char* label;
  double budget_seconds;
  bool (*fn)(Check&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"decomposition residual bound", 60, crit_decomposition},
      {"shift/anchor decoupling identity", 60, crit_decoupling},
      {"moment comparison suite", 60, crit_moments},
      {"net certification vs brute force", 120, crit_nets},
      {"shift-averaged upper bound", 300, crit_upper_bound},
      {"mean lower bound at small exponent", 300, crit_lower_bound_mean},
      {"sup lower bound in dimension three", 300, crit_lower_bound_sup},
      {"discrepancy cross-validation", 300, crit_cross_validation},
      {"index counts and vanishing coefficients", 60, crit_combinatorics},
      {"byte-identical reports across workers", 60, crit_determinism},
  };
  int failures = 0;
  int idx = 0;
  for (const Criterion& crit : criteria) {
    ++idx;
    Check c;
    auto start = std::chrono::steady_clock::now();
    try {
      crit.fn(c);
    } catch (const std::exception& e) {
      c.fail(std::string("exception: ") + e.what());
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_budget = elapsed < crit.budget_seconds;
    bool pass = c.ok && in_budget;
    if (!pass) ++failures;
    std::printf("[%2d/10] %-42s %s (%.1fs)\n", idx, crit.label,
                pass ? "PASS" : "FAIL", elapsed);
    if (!c.ok) std::printf("        %s\n", c.why.c_str());
    if (c.ok && !in_budget)
      std::printf("        over budget: %.1fs >= %.0fs\n", elapsed, crit.budget_seconds);
    std::fflush(stdout);
  }
  if (failures) {
    std::printf("%d of 10 criteria failed\n", failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
