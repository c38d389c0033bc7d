#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dyadic.hpp"
#include "errors.hpp"
#include "rational.hpp"

namespace dyadisc {

// A function f(Y) = sum_A lambda_A r_A(Y) over multi-indices A in {0..s}^k.
// Such functions are piecewise constant on level-s cells, so every function
// norm coincides with the level-s grid norm.
struct RademacherPolynomial {
  unsigned k = 1;
  unsigned s = 0;
  std::vector<Rational> coefficients;  // (s+1)^k entries, a_1 slowest
};

inline std::size_t coefficient_count(unsigned k, unsigned s) {
  std::uint64_t size = 1;
  for (unsigned j = 0; j < k; ++j) {
    size *= (s + 1);
    if (size > (std::uint64_t{1} << 26))
      throw feasibility_error("polynomial table exceeds the 2^26 entry guard");
  }
  return std::size_t(size);
}

inline RademacherPolynomial make_polynomial(unsigned k, unsigned s,
                                            std::vector<Rational> coeffs) {
  if (k == 0) throw std::invalid_argument("polynomial: dimension must be positive");
  if (s > 26) throw std::invalid_argument("polynomial: level must be at most 26");
  if (coeffs.size() != coefficient_count(k, s))
    throw std::invalid_argument("polynomial: coefficient table has the wrong size");
  return RademacherPolynomial{k, s, std::move(coeffs)};
}

inline RademacherPolynomial zero_polynomial(unsigned k, unsigned s) {
  return make_polynomial(k, s, std::vector<Rational>(coefficient_count(k, s), Rational(0)));
}

// Flat index of A = (a_1, ..., a_k), a_1 slowest.
inline std::size_t coefficient_index(const RademacherPolynomial& f,
                                     const std::vector<unsigned>& A) {
  if (A.size() != f.k) throw std::invalid_argument("coefficient_index: wrong arity");
  std::size_t idx = 0;
  for (unsigned a : A) {
    if (a > f.s) throw std::invalid_argument("coefficient_index: level out of range");
    idx = idx * (f.s + 1) + a;
  }
  return idx;
}

namespace detail {

// r_0(y), ..., r_s(y) as integers in {+1, -1}.
inline std::vector<int> rademacher_row(const DyadicScalar& y, unsigned s) {
  std::vector<int> row(s + 1, 1);
  for (unsigned a = 1; a <= s; ++a) row[a] = rademacher(a, y);
  return row;
}

// Contract the leading axis of a table of extent (s+1)^m with a sign row.
inline std::vector<Rational> contract_front(const std::vector<Rational>& tbl,
                                            unsigned s, const std::vector<int>& row) {
  std::size_t stride = tbl.size() / (s + 1);
  std::vector<Rational> out(stride, Rational(0));
  for (unsigned a = 0; a <= s; ++a) {
    const Rational* src = tbl.data() + std::size_t(a) * stride;
    if (row[a] > 0)
      for (std::size_t b = 0; b < stride; ++b) out[b] += src[b];
    else
      for (std::size_t b = 0; b < stride; ++b) out[b] -= src[b];
  }
  return out;
}

// Calls fn(value) for every Y in the level-s grid in row-major order
// (y_1 slowest). Front-contraction keeps the cost near 2^{ks} (s+1).
inline void visit_grid(const RademacherPolynomial& f,
                       const std::function<void(const Rational&)>& fn) {
  if (std::uint64_t(f.k) * f.s > 24)
    throw feasibility_error("grid enumeration exceeds the 2^24 cell guard");
  std::uint64_t cells = std::uint64_t{1} << f.s;
  std::function<void(unsigned, const std::vector<Rational>&)> rec =
      [&](unsigned axis, const std::vector<Rational>& tbl) {
        for (std::uint64_t m = 0; m < cells; ++m) {
          std::vector<int> row = rademacher_row(make_scalar(m, f.s), f.s);
          std::vector<Rational> next = contract_front(tbl, f.s, row);
          if (axis == f.k)
            fn(next[0]);
          else
            rec(axis + 1, next);
        }
      };
  rec(1, f.coefficients);
}

}  // namespace detail

inline Rational evaluate(const RademacherPolynomial& f, const DyadicPoint& Y) {
  if (Y.coords.size() != f.k) throw std::invalid_argument("evaluate: dimension mismatch");
  std::vector<Rational> cur = f.coefficients;
  for (unsigned j = 0; j < f.k; ++j)
    cur = detail::contract_front(cur, f.s, detail::rademacher_row(Y.coords[j], f.s));
  return cur[0];
}

// Exact grid mean of |f|^p, p a positive integer.
inline Rational norm_grid_power(const RademacherPolynomial& f, unsigned p) {
  if (p == 0) throw std::invalid_argument("norm_grid_power: power must be positive");
  Rational sum(0);
  detail::visit_grid(f, [&](const Rational& v) {
    Rational a = v < 0 ? -v : v;
    sum += rat_pow(a, p);
  });
  return sum / Rational(pow2_int(f.k * f.s));
}

// Exact grid maximum of |f|.
inline Rational norm_grid_sup(const RademacherPolynomial& f) {
  Rational best(0);
  detail::visit_grid(f, [&](const Rational& v) {
    Rational a = v < 0 ? -v : v;
    if (a > best) best = a;
  });
  return best;
}

inline double norm_grid(const RademacherPolynomial& f, double q) {
  if (q == std::numeric_limits<double>::infinity()) return to_double(norm_grid_sup(f));
  if (!(q > 0)) throw std::invalid_argument("norm_grid: q must be positive");
  if (q <= 64 && q == std::floor(q))
    return std::pow(to_double(norm_grid_power(f, unsigned(q))), 1.0 / q);
  double sum = 0;
  detail::visit_grid(f, [&](const Rational& v) {
    sum += std::pow(std::abs(to_double(v)), q);
  });
  return std::pow(sum * std::exp2(-double(f.k) * f.s), 1.0 / q);
}

inline Rational q2_squared(const RademacherPolynomial& f) {
  Rational sum(0);
  for (const Rational& c : f.coefficients) sum += c * c;
  return sum;
}

inline double q2(const RademacherPolynomial& f) {
  return std::sqrt(to_double(q2_squared(f)));
}

// Slice coefficients along the last axis: row(y) = sum over leading indices
// of (sum_a lambda_{(B,a)} r_a(y))^2, maximized over the level-s grid in y.
inline Rational q_inf2_squared(const RademacherPolynomial& f) {
  if (f.k < 2)
    throw std::invalid_argument("q_inf2: needs at least two coordinates to split");
  std::size_t bases = f.coefficients.size() / (f.s + 1);
  Rational best(0);
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << f.s); ++m) {
    std::vector<int> row = detail::rademacher_row(make_scalar(m, f.s), f.s);
    Rational total(0);
    for (std::size_t b = 0; b < bases; ++b) {
      Rational phi(0);
      const Rational* src = f.coefficients.data() + b * (f.s + 1);
      for (unsigned a = 0; a <= f.s; ++a)
        phi += row[a] > 0 ? src[a] : -src[a];
      total += phi * phi;
    }
    if (total > best) best = total;
  }
  return best;
}

inline double q_inf2(const RademacherPolynomial& f) {
  return std::sqrt(to_double(q_inf2_squared(f)));
}

// Sum over the last-axis level a of the coefficient l2 norm of that slice.
inline double q_12(const RademacherPolynomial& f) {
  if (f.k < 2)
    throw std::invalid_argument("q_12: needs at least two coordinates to split");
  std::size_t bases = f.coefficients.size() / (f.s + 1);
  double total = 0;
  for (unsigned a = 0; a <= f.s; ++a) {
    Rational sq(0);
    for (std::size_t b = 0; b < bases; ++b) {
      const Rational& c = f.coefficients[b * (f.s + 1) + a];
      sq += c * c;
    }
    total += std::sqrt(to_double(sq));
  }
  return total;
}

struct KhinchinConstants {
  double q = 2;
  double alpha_q = 1;
  double beta_q = 1;
  unsigned k = 1;
};

inline KhinchinConstants khinchin_constants(double q, unsigned k) {
  if (!(q > 0) || q == std::numeric_limits<double>::infinity())
    throw std::invalid_argument("khinchin_constants: q must be finite and positive");
  KhinchinConstants c;
  c.q = q;
  c.k = k;
  c.alpha_q = q < 2 ? std::exp2(-(2 - q) / q) : 1.0;
  c.beta_q = std::sqrt(std::ceil(q / 2));
  return c;
}

namespace detail {
inline bool leq_tol(double a, double b) {
  return a <= b + 1e-12 * (1 + std::abs(a) + std::abs(b));
}
}  // namespace detail

struct KhinchinReport {
  double q = 2;
  double lower = 0;   // alpha_q^k Q_2
  double upper = 0;   // beta_q^k Q_2
  double norm = 0;    // ||f||_{s,q}
  double ratio = 0;   // norm / Q_2 (0 when Q_2 = 0)
  bool lower_ok = false;
  bool upper_ok = false;
};

inline KhinchinReport khinchin_check(const RademacherPolynomial& f, double q) {
  KhinchinConstants c = khinchin_constants(q, f.k);
  KhinchinReport rep;
  rep.q = q;
  double base = q2(f);
  rep.lower = std::pow(c.alpha_q, f.k) * base;
  rep.upper = std::pow(c.beta_q, f.k) * base;
  rep.norm = norm_grid(f, q);
  rep.ratio = base > 0 ? rep.norm / base : 0.0;
  rep.lower_ok = detail::leq_tol(rep.lower, rep.norm);
  rep.upper_ok = detail::leq_tol(rep.norm, rep.upper);
  return rep;
}

struct NormBracketReport {
  double lower = 0;  // alpha_q^k Q_2
  double upper = 0;  // beta_q^{k-1} Q_{inf,2}
  double norm = 0;
  bool holds = false;
};

inline NormBracketReport lemma31_bounds(const RademacherPolynomial& f, double q) {
  if (f.k < 2) throw std::invalid_argument("lemma31_bounds: needs a split coordinate");
  KhinchinConstants c = khinchin_constants(q, f.k);
  NormBracketReport rep;
  rep.lower = std::pow(c.alpha_q, f.k) * q2(f);
  rep.upper = std::pow(c.beta_q, f.k - 1) * q_inf2(f);
  rep.norm = norm_grid(f, q);
  rep.holds = detail::leq_tol(rep.lower, rep.norm) && detail::leq_tol(rep.norm, rep.upper);
  return rep;
}

struct SupLowerBoundReport {
  double bound = 0;  // alpha_1^{k-1} Q_{1,2}
  double sup = 0;
  bool holds = false;
};

inline SupLowerBoundReport lemma32_bound(const RademacherPolynomial& f) {
  if (f.k < 2) throw std::invalid_argument("lemma32_bound: needs a split coordinate");
  SupLowerBoundReport rep;
  rep.bound = std::exp2(-double(f.k - 1)) * q_12(f);
  rep.sup = to_double(norm_grid_sup(f));
  rep.holds = detail::leq_tol(rep.bound, rep.sup);
  return rep;
}

}  // namespace dyadisc
