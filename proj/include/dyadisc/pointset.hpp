#pragma once

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dyadic.hpp"
#include "rng.hpp"

namespace dyadisc {

// A finite multiset D in U^d. Coordinates share one precision w and are kept
// as a flat row-major mantissa array; duplicates are counted with
// multiplicity everywhere.
struct PointSet {
  unsigned d = 1;
  unsigned w = kDefaultPrecision;
  std::vector<std::uint64_t> mantissas;  // N rows of d entries

  std::size_t size() const { return d == 0 ? 0 : mantissas.size() / d; }

  std::uint64_t mantissa(std::size_t i, unsigned j) const { return mantissas[i * d + j]; }

  DyadicPoint point(std::size_t i) const {
    DyadicPoint p;
    p.coords.reserve(d);
    for (unsigned j = 0; j < d; ++j) p.coords.push_back(DyadicScalar{mantissa(i, j), w});
    return p;
  }
};

inline PointSet make_point_set(unsigned d, unsigned w, std::vector<std::uint64_t> mantissas) {
  if (d == 0) throw std::invalid_argument("point set: dimension must be positive");
  if (w > kMaxPrecision) throw std::invalid_argument("point set: precision exceeds 64 bits");
  if (mantissas.size() % d != 0)
    throw std::invalid_argument("point set: mantissa count not a multiple of d");
  for (std::uint64_t m : mantissas)
    if (w < 64 && (m >> w) != 0)
      throw std::invalid_argument("point set: mantissa out of range for precision");
  return PointSet{d, w, std::move(mantissas)};
}

inline PointSet shift_set(const PointSet& D, const DyadicPoint& T) {
  if (T.coords.size() != D.d) throw std::invalid_argument("shift_set: dimension mismatch");
  unsigned w = D.w;
  for (const auto& c : T.coords) w = std::max(w, c.precision);
  PointSet out;
  out.d = D.d;
  out.w = w;
  out.mantissas.resize(D.mantissas.size());
  std::vector<std::uint64_t> t(D.d);
  for (unsigned j = 0; j < D.d; ++j) t[j] = mantissa_at(T.coords[j], w);
  unsigned up = w - D.w;
  for (std::size_t i = 0; i < D.mantissas.size(); ++i) {
    std::uint64_t m = up >= 64 ? 0 : (D.mantissas[i] << up);
    out.mantissas[i] = m ^ t[i % D.d];
  }
  return out;
}

inline PointSet project_set(const PointSet& D, unsigned s) {
  if (s >= D.w) return D;
  PointSet out;
  out.d = D.d;
  out.w = s;
  out.mantissas.resize(D.mantissas.size());
  unsigned down = D.w - s;
  for (std::size_t i = 0; i < D.mantissas.size(); ++i)
    out.mantissas[i] = D.mantissas[i] >> down;
  return out;
}

// N points with iid uniform coordinates on the grid Q(2^w), reproducible
// from (seed) alone.
inline PointSet random_point_set(std::uint64_t seed, std::size_t n, unsigned d, unsigned w) {
  PointSet out;
  out.d = d;
  out.w = w;
  out.mantissas.resize(n * d);
  for (std::size_t i = 0; i < n * d; ++i)
    out.mantissas[i] = counter_hash(seed, i) & low_bits(w);
  return out;
}

// d square binary matrices acting on the s index digits. Row i of matrix j
// produces digit eta_i of coordinate j: eta_i = <row, digits(m)> mod 2 with
// digit k of m taken from bit k-1 (least significant first), so index 1 maps
// to 1/2 under the identity matrix.
struct GeneratorMatrices {
  unsigned d = 1;
  unsigned s = 0;
  std::vector<std::uint64_t> rows;  // d blocks of s rows; bit k-1 of a row = column k

  std::uint64_t row(unsigned j, unsigned i) const { return rows[j * s + i]; }
};

inline GeneratorMatrices make_generator_matrices(unsigned d, unsigned s,
                                                 std::vector<std::uint64_t> rows) {
  if (d == 0) throw std::invalid_argument("matrices: dimension must be positive");
  if (s > kMaxPrecision) throw std::invalid_argument("matrices: level exceeds 64 bits");
  if (rows.size() != std::size_t(d) * s)
    throw std::invalid_argument("matrices: need exactly d*s rows");
  for (std::uint64_t r : rows)
    if (s < 64 && (r >> s) != 0)
      throw std::invalid_argument("matrices: row has bits beyond column s");
  return GeneratorMatrices{d, s, std::move(rows)};
}

inline GeneratorMatrices identity_matrices(unsigned d, unsigned s) {
  std::vector<std::uint64_t> rows;
  rows.reserve(std::size_t(d) * s);
  for (unsigned j = 0; j < d; ++j)
    for (unsigned i = 0; i < s; ++i) rows.push_back(std::uint64_t{1} << i);
  return make_generator_matrices(d, s, std::move(rows));
}

// (identity, anti-diagonal): the classic two-dimensional net pair.
inline GeneratorMatrices bitrev_pair_matrices(unsigned s) {
  std::vector<std::uint64_t> rows;
  rows.reserve(2 * std::size_t(s));
  for (unsigned i = 0; i < s; ++i) rows.push_back(std::uint64_t{1} << i);
  for (unsigned i = 0; i < s; ++i) rows.push_back(std::uint64_t{1} << (s - 1 - i));
  return make_generator_matrices(2, s, std::move(rows));
}

inline PointSet generate_digital_net(const GeneratorMatrices& g) {
  // Column form: coordinate j of point m is the XOR of columns at the set
  // digits of m; column k holds digit contributions as an s-bit mantissa.
  std::vector<std::uint64_t> cols(std::size_t(g.d) * g.s, 0);
  for (unsigned j = 0; j < g.d; ++j)
    for (unsigned i = 0; i < g.s; ++i) {
      std::uint64_t row = g.row(j, i);
      for (unsigned k = 0; k < g.s; ++k)
        if ((row >> k) & 1u) cols[j * g.s + k] |= std::uint64_t{1} << (g.s - 1 - i);
    }
  PointSet out;
  out.d = g.d;
  out.w = g.s;
  std::uint64_t n = std::uint64_t{1} << g.s;
  out.mantissas.resize(n * g.d);
  if (g.s == 0) return out;  // single origin point
  for (std::uint64_t m = 0; m < n; ++m)
    for (unsigned j = 0; j < g.d; ++j) {
      std::uint64_t x = 0;
      std::uint64_t rest = m;
      while (rest) {
        unsigned k = static_cast<unsigned>(std::countr_zero(rest));
        x ^= cols[j * g.s + k];
        rest &= rest - 1;
      }
      out.mantissas[m * g.d + j] = x;
    }
  return out;
}

// m -> (m 2^-s, bitreverse_s(m) 2^-s); N = 2^s points in U^2.
inline PointSet generate_bitrev_net(unsigned s) {
  if (s > kMaxPrecision) throw std::invalid_argument("bitrev net: level exceeds 64 bits");
  PointSet out;
  out.d = 2;
  out.w = s;
  std::uint64_t n = std::uint64_t{1} << s;
  out.mantissas.resize(n * 2);
  for (std::uint64_t m = 0; m < n; ++m) {
    std::uint64_t r = 0;
    for (unsigned b = 0; b < s; ++b)
      if ((m >> b) & 1u) r |= std::uint64_t{1} << (s - 1 - b);
    out.mantissas[m * 2] = m;
    out.mantissas[m * 2 + 1] = r;
  }
  return out;
}

struct NetCheckReport {
  bool is_net = false;
  unsigned minimal_delta = 0;
  bool has_witness = false;
  ElementaryBox witness;              // volume 2^{delta-s} with count != 2^delta
  std::uint64_t witness_count = 0;
};

namespace detail {

// Visits level vectors A with a fixed sum, bucket-counting the points by
// their A-cell. Returns false (filling the witness) at the first cell whose
// count differs from 2^delta.
inline bool check_levels(const PointSet& D, unsigned s, unsigned delta, ElementaryBox* witness,
                         std::uint64_t* witness_count) {
  unsigned target = s - delta;
  std::uint64_t want = std::uint64_t{1} << delta;
  std::vector<unsigned> levels(D.d, 0);
  levels[0] = target;
  std::vector<std::uint64_t> counts(std::size_t{1} << target);
  for (;;) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < D.size(); ++i) {
      std::uint64_t key = 0;
      for (unsigned j = 0; j < D.d; ++j) {
        key <<= levels[j];
        key |= floor_mantissa(DyadicScalar{D.mantissa(i, j), D.w}, levels[j]);
      }
      counts[key]++;
    }
    for (std::size_t key = 0; key < counts.size(); ++key)
      if (counts[key] != want) {
        if (witness) {
          std::vector<std::uint64_t> offsets(D.d);
          std::uint64_t rest = key;
          for (unsigned j = D.d; j-- > 0;) {
            offsets[j] = rest & low_bits(levels[j]);
            rest >>= levels[j];
          }
          *witness = make_delta_box(levels, offsets);
          *witness_count = counts[key];
        }
        return false;
      }
    // next composition of `target` into d parts
    if (D.d == 1) break;
    unsigned j = 0;
    while (j + 1 < D.d && levels[j] == 0) ++j;
    if (j + 1 == D.d) break;
    unsigned head = levels[j];
    levels[j] = 0;
    levels[j + 1]++;
    levels[0] = head - 1;
    continue;
  }
  return true;
}

}  // namespace detail

// Verifies the defining property at the requested delta and locates the
// minimal passing delta (the property is monotone upward in delta).
inline NetCheckReport check_net(const PointSet& D, unsigned delta) {
  std::size_t n = D.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("check_net: point count must be a power of two");
  unsigned s = static_cast<unsigned>(std::countr_zero(n));
  if (delta > s) throw std::invalid_argument("check_net: delta exceeds s");
  NetCheckReport rep;
  rep.is_net = detail::check_levels(D, s, delta, &rep.witness, &rep.witness_count);
  rep.has_witness = !rep.is_net;
  unsigned minimal = s;
  while (minimal > 0 && detail::check_levels(D, s, minimal - 1, nullptr, nullptr)) --minimal;
  rep.minimal_delta = minimal;
  return rep;
}

// ---- file formats ----
// Point set: one header line "d w N", then N lines of d decimal mantissas.
// Matrices: one header line "d s", then d blocks of s rows of '0'/'1' chars.

inline void save_point_set(const PointSet& D, std::ostream& os) {
  os << D.d << " " << D.w << " " << D.size() << "\n";
  for (std::size_t i = 0; i < D.size(); ++i) {
    for (unsigned j = 0; j < D.d; ++j) os << (j ? " " : "") << D.mantissa(i, j);
    os << "\n";
  }
}

inline void save_point_set(const PointSet& D, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot open for writing: " + path);
  save_point_set(D, os);
}

inline PointSet load_point_set(std::istream& is) {
  unsigned d = 0, w = 0;
  std::size_t n = 0;
  if (!(is >> d >> w >> n)) throw std::invalid_argument("point set: malformed header");
  std::vector<std::uint64_t> ms;
  ms.reserve(n * d);
  for (std::size_t i = 0; i < n * std::size_t(d); ++i) {
    std::uint64_t m;
    if (!(is >> m)) throw std::invalid_argument("point set: truncated mantissa table");
    ms.push_back(m);
  }
  return make_point_set(d, w, std::move(ms));
}

inline PointSet load_point_set(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open: " + path);
  return load_point_set(is);
}

inline GeneratorMatrices load_generator_matrices(std::istream& is) {
  unsigned d = 0, s = 0;
  if (!(is >> d >> s)) throw std::invalid_argument("matrices: malformed header");
  std::vector<std::uint64_t> rows;
  rows.reserve(std::size_t(d) * s);
  for (std::size_t r = 0; r < std::size_t(d) * s; ++r) {
    std::string line;
    if (!(is >> line) || line.size() != s)
      throw std::invalid_argument("matrices: bad row length");
    std::uint64_t bits = 0;
    for (unsigned k = 0; k < s; ++k) {
      if (line[k] != '0' && line[k] != '1')
        throw std::invalid_argument("matrices: rows must be 0/1 strings");
      if (line[k] == '1') bits |= std::uint64_t{1} << k;
    }
    rows.push_back(bits);
  }
  return make_generator_matrices(d, s, std::move(rows));
}

inline GeneratorMatrices load_generator_matrices(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open: " + path);
  return load_generator_matrices(is);
}

inline void save_generator_matrices(const GeneratorMatrices& g, std::ostream& os) {
  os << g.d << " " << g.s << "\n";
  for (unsigned j = 0; j < g.d; ++j) {
    for (unsigned i = 0; i < g.s; ++i) {
      std::string line(g.s, '0');
      for (unsigned k = 0; k < g.s; ++k)
        if ((g.row(j, i) >> k) & 1u) line[k] = '1';
      os << line << "\n";
    }
    if (j + 1 < g.d) os << "\n";
  }
}

// ---- direction-number table (classic primitive-polynomial recurrences) ----
// File format: comment lines start with '#'; data lines are
//   dim degree a m_1 ... m_degree
// for dimensions >= 2 (dimension 1 is the identity matrix). `a` encodes the
// interior polynomial coefficients, most significant first.

inline std::string default_direction_path() {
  if (const char* env = std::getenv("DYADISC_SOBOL_TABLE")) return env;
#ifdef DYADISC_DATA_DIR
  return std::string(DYADISC_DATA_DIR) + "/sobol_directions.txt";
#else
  return "data/sobol_directions.txt";
#endif
}

inline GeneratorMatrices sobol_matrices(unsigned d, unsigned s, const std::string& path) {
  if (d == 0) throw std::invalid_argument("sobol: dimension must be positive");
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open direction table: " + path);
  // direction numbers v_k as s-bit mantissas, one block per dimension
  std::vector<std::vector<std::uint64_t>> v(d);
  if (s > 0)
    for (unsigned k = 0; k < s; ++k) v[0].push_back(std::uint64_t{1} << (s - 1 - k));
  std::string line;
  unsigned loaded = 1;
  while (loaded < d && std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    unsigned dim = 0, deg = 0;
    std::uint64_t a = 0;
    if (!(ls >> dim >> deg >> a)) throw std::invalid_argument("direction table: bad line");
    std::vector<std::uint64_t> m(1, 0);  // 1-based
    for (unsigned k = 1; k <= deg; ++k) {
      std::uint64_t mk;
      if (!(ls >> mk)) throw std::invalid_argument("direction table: missing m values");
      m.push_back(mk);
    }
    if (dim != loaded + 1)
      throw std::invalid_argument("direction table: dimensions must be consecutive from 2");
    for (unsigned k = deg + 1; k <= s; ++k) {
      std::uint64_t mk = m[k - deg] ^ (m[k - deg] << deg);
      for (unsigned t = 1; t < deg; ++t)
        if ((a >> (deg - 1 - t)) & 1u) mk ^= m[k - t] << t;
      m.push_back(mk);
    }
    auto& col = v[loaded];
    for (unsigned k = 1; k <= s; ++k) col.push_back(m[k] << (s - k));
    ++loaded;
  }
  if (loaded < d)
    throw std::invalid_argument("direction table: not enough dimensions for request");
  // rows from columns: row i bit k-1 = bit (s-i) of column k
  std::vector<std::uint64_t> rows(std::size_t(d) * s, 0);
  for (unsigned j = 0; j < d; ++j)
    for (unsigned i = 0; i < s; ++i)
      for (unsigned k = 0; k < s; ++k)
        if ((v[j][k] >> (s - 1 - i)) & 1u) rows[j * s + i] |= std::uint64_t{1} << k;
  return make_generator_matrices(d, s, std::move(rows));
}

}  // namespace dyadisc

