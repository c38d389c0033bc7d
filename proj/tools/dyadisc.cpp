// Command-line driver.  One subcommand per run; the JSON report always goes
// to stdout, --json/--csv additionally write files.  Reports embed the
// resolved configuration so a run can be reproduced from its own output; the
// worker count is deliberately not part of it (results never depend on it).
//
// Exit codes: 0 success, 1 a checked claim is violated, 2 usage or input
// error, 3 an exact-mode size guard refused the run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "dyadisc/decomposition.hpp"
#include "dyadisc/discrepancy.hpp"
#include "dyadisc/dyadic.hpp"
#include "dyadisc/errors.hpp"
#include "dyadisc/mean.hpp"
#include "dyadisc/pointset.hpp"
#include "dyadisc/rademacher.hpp"
#include "dyadisc/rational.hpp"
#include "dyadisc/report.hpp"
#include "dyadisc/rng.hpp"

namespace {

using namespace dyadisc;

struct CommonOpts {
  std::string config_path;
  std::string json_path;
  std::string csv_path;
  unsigned threads = 0;
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--config", c.config_path,
                  "flat key = value file; command-line flags win");
  sub->add_option("--json", c.json_path, "also write the JSON report to this file");
  sub->add_option("--csv", c.csv_path, "write a CSV projection to this file");
  sub->add_option("--threads", c.threads,
                  "worker cap; 0 means DYADISC_THREADS or all cores");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat `key = value` configuration for one subcommand.  Keys name the
// subcommand's long flags; blank lines and #-comments are skipped.  Only
// options absent from the command line are filled, so flags override the
// file.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config: " + path);
  std::string line;
  unsigned lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::string where = path + ":" + std::to_string(lineno);
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(where + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(where + ": empty key");
    if (key == "config")
      throw std::invalid_argument(where + ": config files do not nest");
    CLI::Option* op = sub->get_option_no_throw("--" + key);
    if (op == nullptr) throw std::invalid_argument(where + ": unknown key: " + key);
    if (op->count() > 0) continue;
    op->add_result(value);
    op->run_callback();
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot open for writing: " + path);
  os << text;
}

void emit(const CommonOpts& c, const Json& root, const CsvTable& csv) {
  std::string text = root.dump();
  std::fwrite(text.data(), 1, text.size(), stdout);
  if (!c.json_path.empty()) write_file(c.json_path, text);
  if (!c.csv_path.empty()) write_file(c.csv_path, csv.dump());
}

double parse_exponent(const std::string& tok) {
  if (tok == "inf") return kInfiniteQ;
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("exponent must be a number or 'inf': " + tok);
}

std::vector<double> parse_exponents(const std::vector<std::string>& toks) {
  std::vector<double> qs;
  qs.reserve(toks.size());
  for (const auto& t : toks) qs.push_back(parse_exponent(t));
  return qs;
}

Json json_exponents(const std::vector<double>& qs) {
  Json a = Json::array();
  for (double q : qs) a.push(Json::number(q));
  return a;
}

MeanMode parse_mean_mode(const std::string& mode) {
  if (mode == "exact") return MeanMode::Exact;
  if (mode == "sampled") return MeanMode::Sampled;
  throw std::invalid_argument("mode must be exact or sampled: " + mode);
}

void require_flag(bool present, const char* what) {
  if (!present) throw std::invalid_argument(std::string(what) + " is required");
}

DyadicPoint point_from_mantissas(const std::vector<std::uint64_t>& ms, unsigned precision) {
  DyadicPoint p;
  for (std::uint64_t m : ms) p.coords.push_back(make_scalar(m, precision));
  return p;
}

Rational rational_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

// Shared by `net gen` and `theorem --net`.
PointSet build_family(const std::string& family, unsigned d, int level,
                      const std::string& matrices_path, const std::string& directions_path) {
  if (family == "file") {
    if (matrices_path.empty()) throw std::invalid_argument("--family file needs --matrices");
    return generate_digital_net(load_generator_matrices(matrices_path));
  }
  if (level < 0) throw std::invalid_argument(family + " family needs --s");
  unsigned s = static_cast<unsigned>(level);
  if (family == "bitrev") {
    if (d != 0 && d != 2) throw std::invalid_argument("bitrev family is two-dimensional");
    return generate_bitrev_net(s);
  }
  if (family == "identity") return generate_digital_net(identity_matrices(d == 0 ? 1 : d, s));
  if (family == "sobol") {
    std::string path = directions_path.empty() ? default_direction_path() : directions_path;
    return generate_digital_net(sobol_matrices(d == 0 ? 2 : d, s, path));
  }
  throw std::invalid_argument("unknown family: " + family);
}

struct NetGenOpts {
  CommonOpts common;
  std::string family;
  int level = -1;
  unsigned d = 0;
  std::string matrices;
  std::string directions;
  std::string out;
};

int run_net_gen(const NetGenOpts& o) {
  require_flag(!o.family.empty(), "--family");
  require_flag(!o.out.empty(), "--out");
  PointSet D = build_family(o.family, o.d, o.level, o.matrices, o.directions);
  save_point_set(D, o.out);

  Json config = Json::object();
  config.set("family", Json::string(o.family));
  config.set("s", Json::unsigned_int(D.w));
  config.set("d", Json::unsigned_int(D.d));
  if (!o.matrices.empty()) config.set("matrices", Json::string(o.matrices));
  if (o.family == "sobol")
    config.set("directions", Json::string(o.directions.empty() ? default_direction_path()
                                                               : o.directions));
  config.set("out", Json::string(o.out));

  Json result = Json::object();
  result.set("d", Json::unsigned_int(D.d));
  result.set("w", Json::unsigned_int(D.w));
  result.set("n", Json::unsigned_int(D.size()));
  result.set("out", Json::string(o.out));

  Json root = Json::object();
  root.set("command", Json::string("net gen"));
  root.set("config", config);
  root.set("result", result);

  CsvTable csv({"family", "d", "w", "n", "out"});
  csv.add_row({o.family, std::to_string(D.d), std::to_string(D.w),
               std::to_string(D.size()), o.out});
  emit(o.common, root, csv);
  return 0;
}

struct NetCheckOpts {
  CommonOpts common;
  std::string in;
  int delta = -1;
};

int run_net_check(const NetCheckOpts& o) {
  require_flag(!o.in.empty(), "--in");
  PointSet D = load_point_set(o.in);
  bool claim_mode = o.delta >= 0;
  unsigned claim = claim_mode ? static_cast<unsigned>(o.delta) : 0;
  NetCheckReport rep = check_net(D, claim);

  Json config = Json::object();
  config.set("in", Json::string(o.in));
  if (claim_mode) config.set("delta", Json::unsigned_int(claim));

  Json root = Json::object();
  root.set("command", Json::string("net check"));
  root.set("config", config);
  root.set("result", to_json(rep));
  std::string verdict = claim_mode ? (rep.is_net ? "holds" : "violated") : "none";
  if (claim_mode) root.set("verdict", Json::string(verdict));

  CsvTable csv({"in", "n", "d", "w", "is_net", "minimal_delta", "verdict"});
  csv.add_row({o.in, std::to_string(D.size()), std::to_string(D.d), std::to_string(D.w),
               rep.is_net ? "true" : "false", std::to_string(rep.minimal_delta), verdict});
  emit(o.common, root, csv);
  return claim_mode && !rep.is_net ? 1 : 0;
}

struct DiscOpts {
  CommonOpts common;
  std::string in;
  std::string q_str = "2";
  std::string method = "auto";
  unsigned level = 0;
  std::vector<std::uint64_t> y;
  unsigned y_precision = 0;
};

int run_disc(const DiscOpts& o, bool q_given, bool level_given) {
  require_flag(!o.in.empty(), "--in");
  PointSet D = load_point_set(o.in);
  double q = parse_exponent(o.q_str);
  std::string method = o.method;
  if (method == "auto") {
    if (!o.y.empty()) method = "local";
    else if (std::isinf(q)) method = "linf";
    else if (q == 2.0) method = "l2";
    else method = "grid";
  }
  if (!o.y.empty() && method != "local")
    throw std::invalid_argument("--y is only meaningful for the local method");
  if (method == "grid" && std::isinf(q))
    throw std::invalid_argument("the grid method needs a finite exponent; use linf");

  Json config = Json::object();
  config.set("in", Json::string(o.in));
  config.set("method", Json::string(method));

  Json root = Json::object();
  root.set("command", Json::string("disc"));

  CsvTable csv({"q", "value", "method", "error_radius", "s_used", "lo", "hi"});

  if (method == "local") {
    if (q_given) throw std::invalid_argument("method local takes --y, not --q");
    if (o.y.size() != D.d) throw std::invalid_argument("--y needs exactly d mantissas");
    unsigned prec = o.y_precision ? o.y_precision : D.w;
    DyadicPoint Y = point_from_mantissas(o.y, prec);
    Rational L = local_discrepancy(D, Y);

    config.set("y", json_uint64_array(o.y));
    config.set("y_precision", Json::unsigned_int(prec));
    root.set("config", config);

    Json result = Json::object();
    result.set("value", Json::number(to_double(L)));
    result.set("value_exact", Json::string(to_fraction_string(L)));
    result.set("method", Json::string("exact-local"));
    result.set("error_radius", Json::number(0));
    root.set("result", result);

    csv.add_row({"", csv_double(to_double(L)), "exact-local", "0", "",
                 csv_double(to_double(L)), csv_double(to_double(L))});
    emit(o.common, root, csv);
    return 0;
  }

  DiscrepancyResult r;
  if (method == "l2") {
    if (q_given && q != 2.0) throw std::invalid_argument("method l2 fixes --q 2");
    r = l2_exact(D);
  } else if (method == "linf") {
    if (q_given && !std::isinf(q)) throw std::invalid_argument("method linf fixes --q inf");
    r = linf_exact(D);
  } else if (method == "grid") {
    if (!level_given) throw std::invalid_argument("method grid needs --s");
    r = lq_grid(D, q, o.level);
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }

  config.set("q", Json::number(r.q));
  if (method == "grid") config.set("s", Json::unsigned_int(o.level));
  root.set("config", config);
  root.set("result", to_json(r));

  csv.add_row({csv_double(r.q), csv_double(r.value), method_name(r.method),
               csv_double(r.error_radius), std::to_string(r.s_used), csv_double(r.lo),
               csv_double(r.hi)});
  emit(o.common, root, csv);
  return 0;
}

struct DecomposeOpts {
  CommonOpts common;
  std::string in;
  int s = -1;
  unsigned anchors = 64;
  int anchor_level = -1;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> z;
  bool table = false;
};

int run_decompose_verify(const DecomposeOpts& o) {
  require_flag(!o.in.empty(), "--in");
  require_flag(o.s >= 0, "--s");
  unsigned s = static_cast<unsigned>(o.s);
  PointSet D = load_point_set(o.in);
  unsigned g = o.anchor_level < 0 ? std::min<unsigned>(s + 2, kMaxPrecision)
                                  : static_cast<unsigned>(o.anchor_level);

  Rational max_abs(0);
  Rational bound_at_max(0);
  std::uint64_t violations = 0;
  for (std::uint64_t i = 0; i < o.anchors; ++i) {
    DyadicPoint Y = random_grid_point(o.seed, i, D.d, g);
    Rational residual = local_discrepancy(D, Y) - truncated_discrepancy(D, s, Y);
    Rational abs_residual = rational_abs(residual);
    Rational bound = error_term_bound(D, s, Y);
    if (abs_residual > bound) ++violations;
    if (abs_residual > max_abs) {
      max_abs = abs_residual;
      bound_at_max = bound;
    }
  }
  bool ok = violations == 0;
  ErrorTermNorms norms = error_term_norms(D, s, 1.0);

  Json config = Json::object();
  config.set("in", Json::string(o.in));
  config.set("s", Json::unsigned_int(s));
  config.set("anchors", Json::unsigned_int(o.anchors));
  config.set("anchor_level", Json::unsigned_int(g));
  config.set("seed", Json::unsigned_int(o.seed));

  Json result = Json::object();
  result.set("anchors_checked", Json::unsigned_int(o.anchors));
  result.set("pointwise_bound_ok", Json::boolean(ok));
  result.set("violations", Json::unsigned_int(violations));
  set_rational(result, "max_abs_residual", max_abs);
  set_rational(result, "bound_at_max", bound_at_max);
  result.set("error_norms", to_json(norms));

  bool want_table = o.table || !o.z.empty();
  if (want_table) {
    double cells = std::pow(double(s) + 1, double(D.d));
    if (cells > double(1u << 20))
      throw feasibility_error("decompose verify: table has over 2^20 cells; lower s or d");
    if (!o.z.empty() && o.z.size() != D.d)
      throw std::invalid_argument("--z needs exactly d mantissas");
    DyadicPoint Z = o.z.empty() ? point_from_mantissas(std::vector<std::uint64_t>(D.d, 0), s)
                                : point_from_mantissas(o.z, s);
    config.set("z", to_json(Z));
    result.set("table", to_json(micro_local_table(D, s, Z)));
  }

  std::string verdict = ok ? "holds" : "violated";
  Json root = Json::object();
  root.set("command", Json::string("decompose verify"));
  root.set("config", config);
  root.set("result", result);
  root.set("verdict", Json::string(verdict));

  CsvTable csv({"s", "anchors", "anchor_level", "max_abs_residual", "bound_at_max",
                "violations", "verdict"});
  csv.add_row({std::to_string(s), std::to_string(o.anchors), std::to_string(g),
               csv_double(to_double(max_abs)), csv_double(to_double(bound_at_max)),
               std::to_string(violations), verdict});
  emit(o.common, root, csv);
  return ok ? 0 : 1;
}

struct MeanOpts {
  CommonOpts common;
  std::string in;
  std::vector<unsigned> s_list;
  std::vector<std::string> q_list{"2"};
  std::string mode = "exact";
  std::uint64_t count = 1024;
  std::uint64_t seed = 0;
  unsigned inner_level = 0;
};

int run_mean(const MeanOpts& o) {
  require_flag(!o.in.empty(), "--in");
  require_flag(!o.s_list.empty(), "--s");
  PointSet D = load_point_set(o.in);
  MeanMode mode = parse_mean_mode(o.mode);
  std::vector<double> qs = parse_exponents(o.q_list);
  SampleSpec spec{o.count, o.seed};

  Json results = Json::array();
  CsvTable csv({"s", "q", "value", "lo", "hi", "error_radius", "method",
                "shifts_examined", "seed", "inner_level"});
  for (unsigned s : o.s_list) {
    std::vector<MeanDiscrepancyEstimate> ests =
        mean_lq_multi(D, s, qs, mode, spec, o.inner_level, o.common.threads);
    for (const MeanDiscrepancyEstimate& e : ests) {
      results.push(to_json(e));
      csv.add_row({std::to_string(e.s), csv_double(e.q), csv_double(e.value),
                   csv_double(e.lo), csv_double(e.hi), csv_double(e.error_radius),
                   mode_name(e.mode), std::to_string(e.shifts_examined),
                   std::to_string(e.seed), std::to_string(e.inner_level)});
    }
  }

  Json config = Json::object();
  config.set("in", Json::string(o.in));
  Json s_arr = Json::array();
  for (unsigned s : o.s_list) s_arr.push(Json::unsigned_int(s));
  config.set("s", s_arr);
  config.set("q", json_exponents(qs));
  config.set("mode", Json::string(o.mode));
  config.set("count", Json::unsigned_int(o.count));
  config.set("seed", Json::unsigned_int(o.seed));
  config.set("inner_level", Json::unsigned_int(o.inner_level));

  Json root = Json::object();
  root.set("command", Json::string("mean"));
  root.set("config", config);
  root.set("results", results);
  emit(o.common, root, csv);
  return 0;
}

struct KhinchinOpts {
  CommonOpts common;
  unsigned k = 2;
  unsigned s = 4;
  std::vector<std::string> q_list{"1", "2", "4"};
  std::uint64_t tables = 100;
  std::uint64_t seed = 0;
};

int run_khinchin(const KhinchinOpts& o) {
  std::vector<double> qs = parse_exponents(o.q_list);
  if (o.k == 0) throw std::invalid_argument("khinchin: k must be positive");
  double cells = std::pow(double(o.s) + 1, double(o.k));
  if (cells > double(1u << 16))
    throw feasibility_error("khinchin: coefficient table has over 2^16 cells; lower k or s");
  if (double(o.tables) * cells > double(1u << 22))
    throw feasibility_error("khinchin: tables * cells exceeds 2^22; lower --tables");

  std::size_t ncoef = coefficient_count(o.k, o.s);
  struct Agg {
    KhinchinConstants constants;
    bool all_ok = true;
    bool bracket_ok = true;
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0;
  };
  std::vector<Agg> aggs(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i)
    aggs[i].constants = khinchin_constants(qs[i], o.k);
  bool sup_ok = true;

  for (std::uint64_t t = 0; t < o.tables; ++t) {
    std::vector<Rational> coeffs(ncoef);
    for (std::size_t i = 0; i < ncoef; ++i) {
      std::uint64_t h = counter_hash(o.seed, t * ncoef + i);
      coeffs[i] = Rational(static_cast<int>(h % 33) - 16);
    }
    RademacherPolynomial f = make_polynomial(o.k, o.s, std::move(coeffs));
    for (std::size_t i = 0; i < qs.size(); ++i) {
      KhinchinReport kr = khinchin_check(f, qs[i]);
      aggs[i].all_ok = aggs[i].all_ok && kr.lower_ok && kr.upper_ok;
      aggs[i].min_ratio = std::min(aggs[i].min_ratio, kr.ratio);
      aggs[i].max_ratio = std::max(aggs[i].max_ratio, kr.ratio);
      if (o.k >= 2) aggs[i].bracket_ok = aggs[i].bracket_ok && lemma31_bounds(f, qs[i]).holds;
    }
    if (o.k >= 2) sup_ok = sup_ok && lemma32_bound(f).holds;
  }

  bool all_ok = o.k < 2 || sup_ok;
  Json results = Json::array();
  CsvTable csv({"q", "k", "s", "tables", "alpha", "beta", "min_ratio", "max_ratio",
                "moment_ok", "bracket_ok"});
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const Agg& a = aggs[i];
    all_ok = all_ok && a.all_ok && (o.k < 2 || a.bracket_ok);
    Json r = Json::object();
    r.set("q", Json::number(qs[i]));
    r.set("alpha", Json::number(a.constants.alpha_q));
    r.set("beta", Json::number(a.constants.beta_q));
    r.set("moment_ok", Json::boolean(a.all_ok));
    r.set("min_ratio", Json::number(a.min_ratio));
    r.set("max_ratio", Json::number(a.max_ratio));
    if (o.k >= 2) r.set("bracket_ok", Json::boolean(a.bracket_ok));
    results.push(r);
    csv.add_row({csv_double(qs[i]), std::to_string(o.k), std::to_string(o.s),
                 std::to_string(o.tables), csv_double(a.constants.alpha_q),
                 csv_double(a.constants.beta_q), csv_double(a.min_ratio),
                 csv_double(a.max_ratio), a.all_ok ? "true" : "false",
                 o.k >= 2 ? (a.bracket_ok ? "true" : "false") : ""});
  }

  Json config = Json::object();
  config.set("k", Json::unsigned_int(o.k));
  config.set("s", Json::unsigned_int(o.s));
  config.set("q", json_exponents(qs));
  config.set("tables", Json::unsigned_int(o.tables));
  config.set("seed", Json::unsigned_int(o.seed));

  Json root = Json::object();
  root.set("command", Json::string("khinchin"));
  root.set("config", config);
  root.set("results", results);
  if (o.k >= 2) root.set("sup_identity_ok", Json::boolean(sup_ok));
  root.set("verdict", Json::string(all_ok ? "holds" : "violated"));
  emit(o.common, root, csv);
  return all_ok ? 0 : 1;
}

struct TheoremOpts {
  CommonOpts common;
  std::string in;
  std::string net_family;
  int net_level = -1;
  unsigned d = 0;
  std::string matrices;
  std::string directions;
  int s = -1;
  std::string q_str = "2";
  std::string mode = "exact";
  std::uint64_t count = 1024;
  std::uint64_t seed = 0;
  int claimed_delta = -1;
  unsigned inner_level = 0;
  bool diagnostics = false;
};

int run_theorem(TheoremId id, const TheoremOpts& o, bool q_given) {
  require_flag(o.s >= 0, "--s");
  unsigned s = static_cast<unsigned>(o.s);
  if (!o.in.empty() && !o.net_family.empty())
    throw std::invalid_argument("give --in or --net, not both");
  PointSet D;
  if (!o.in.empty()) {
    D = load_point_set(o.in);
  } else if (!o.net_family.empty()) {
    int level = o.net_level >= 0 ? o.net_level : o.s;
    D = build_family(o.net_family, o.d, level, o.matrices, o.directions);
  } else {
    throw std::invalid_argument("need --in or --net");
  }

  double q = parse_exponent(o.q_str);
  if (id == TheoremId::T23) {
    if (q_given && !std::isinf(q))
      throw std::invalid_argument("theorem 2.3 is a sup statement; --q must be inf");
    q = kInfiniteQ;
  }
  MeanMode mode = parse_mean_mode(o.mode);
  SampleSpec spec{o.count, o.seed};
  TheoremReport rep = verify_theorem(D, id, q, s, mode, spec, o.claimed_delta,
                                     o.inner_level, o.common.threads);

  Json config = Json::object();
  if (!o.in.empty()) {
    config.set("in", Json::string(o.in));
  } else {
    config.set("net", Json::string(o.net_family));
    config.set("net_level", Json::unsigned_int(D.w));
    config.set("d", Json::unsigned_int(D.d));
    if (!o.matrices.empty()) config.set("matrices", Json::string(o.matrices));
    if (o.net_family == "sobol")
      config.set("directions", Json::string(o.directions.empty() ? default_direction_path()
                                                                 : o.directions));
  }
  config.set("s", Json::unsigned_int(s));
  config.set("q", Json::number(q));
  config.set("mode", Json::string(o.mode));
  config.set("count", Json::unsigned_int(o.count));
  config.set("seed", Json::unsigned_int(o.seed));
  if (o.claimed_delta >= 0) config.set("claimed_delta", Json::integer(o.claimed_delta));
  config.set("inner_level", Json::unsigned_int(o.inner_level));

  Json root = Json::object();
  root.set("command", Json::string(std::string("theorem ") + theorem_name(id)));
  root.set("config", config);
  root.set("result", to_json(rep));
  if (o.diagnostics)
    root.set("diagnostics",
             to_json(proof_diagnostics(D, s, q, mode, spec, o.common.threads)));
  root.set("verdict", Json::string(verdict_name(rep.verdict)));

  CsvTable csv({"theorem", "n", "d", "q", "delta", "s", "bound_value", "measured",
                "verdict"});
  csv.add_row({theorem_name(id), std::to_string(rep.n), std::to_string(rep.d),
               csv_double(rep.q), std::to_string(rep.delta), std::to_string(rep.s),
               csv_double(rep.bound_value),
               rep.has_measurement ? csv_double(rep.measured.value) : "",
               verdict_name(rep.verdict)});
  emit(o.common, root, csv);
  return rep.verdict == Verdict::Violated ? 1 : 0;
}

struct SearchOpts {
  CommonOpts common;
  std::string in;
  int s = -1;
  std::string objective = "minimize-lq";
  std::uint64_t budget = 0;
  std::string q_str = "2";
  std::uint64_t seed = 0;
  unsigned inner_level = 0;
};

int run_search(const SearchOpts& o) {
  require_flag(!o.in.empty(), "--in");
  require_flag(o.s >= 0, "--s");
  require_flag(o.budget >= 1, "--budget");
  unsigned s = static_cast<unsigned>(o.s);
  PointSet D = load_point_set(o.in);
  SearchObjective obj;
  if (o.objective == "minimize-lq") obj = SearchObjective::MinimizeLq;
  else if (o.objective == "maximize-lq") obj = SearchObjective::MaximizeLq;
  else if (o.objective == "maximize-linf") obj = SearchObjective::MaximizeLinf;
  else throw std::invalid_argument("unknown objective: " + o.objective);
  double q = parse_exponent(o.q_str);

  ShiftSearchResult r =
      shift_search(D, s, obj, o.budget, q, o.seed, o.inner_level, o.common.threads);

  Json config = Json::object();
  config.set("in", Json::string(o.in));
  config.set("s", Json::unsigned_int(s));
  config.set("objective", Json::string(o.objective));
  config.set("budget", Json::unsigned_int(o.budget));
  config.set("q", Json::number(r.q));
  config.set("seed", Json::unsigned_int(o.seed));
  config.set("inner_level", Json::unsigned_int(o.inner_level));

  Json root = Json::object();
  root.set("command", Json::string("search"));
  root.set("config", config);
  root.set("result", to_json(r));

  CsvTable csv({"objective", "q", "s", "best_value", "best_index", "exhaustive",
                "shifts_examined"});
  csv.add_row({objective_name(r.objective), csv_double(r.q), std::to_string(r.s),
               csv_double(r.best_value), std::to_string(r.best_index),
               r.exhaustive ? "true" : "false", std::to_string(r.shifts_examined)});
  emit(o.common, root, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadic-shift discrepancy toolkit"};
  app.require_subcommand(1);
  int code = 0;

  CLI::App* net = app.add_subcommand("net", "generate and certify digital point sets");
  net->require_subcommand(1);

  NetGenOpts gen_opts;
  CLI::App* gen = net->add_subcommand("gen", "write a point-set file for a built-in family");
  gen->add_option("--family", gen_opts.family, "bitrev | identity | sobol | file (required)")
      ->check(CLI::IsMember({"bitrev", "identity", "sobol", "file"}));
  gen->add_option("--s", gen_opts.level, "net level; the set has 2^s points");
  gen->add_option("--d", gen_opts.d, "dimension for identity/sobol families");
  gen->add_option("--matrices", gen_opts.matrices, "generator-matrix file for --family file");
  gen->add_option("--directions", gen_opts.directions, "direction-number table for sobol");
  gen->add_option("--out", gen_opts.out, "point-set output file (required)");
  add_common(gen, gen_opts.common);
  gen->callback([&code, &gen_opts, gen] {
    apply_config(gen, gen_opts.common.config_path);
    code = run_net_gen(gen_opts);
  });

  NetCheckOpts check_opts;
  CLI::App* check = net->add_subcommand("check", "net quality certification");
  check->add_option("--in", check_opts.in, "point-set file (required)");
  check->add_option("--delta", check_opts.delta,
                    "claimed quality; verdict is violated when the check fails");
  add_common(check, check_opts.common);
  check->callback([&code, &check_opts, check] {
    apply_config(check, check_opts.common.config_path);
    code = run_net_check(check_opts);
  });

  DiscOpts disc_opts;
  CLI::App* disc = app.add_subcommand("disc", "discrepancy norms of a point set");
  disc->add_option("--in", disc_opts.in, "point-set file (required)");
  disc->add_option("--q", disc_opts.q_str, "norm exponent, a number or 'inf'");
  disc->add_option("--method", disc_opts.method, "auto | local | l2 | linf | grid")
      ->check(CLI::IsMember({"auto", "local", "l2", "linf", "grid"}));
  disc->add_option("--s", disc_opts.level, "grid level for the grid method");
  disc->add_option("--y", disc_opts.y, "anchor mantissas for the local method")
      ->delimiter(',');
  disc->add_option("--y-precision", disc_opts.y_precision,
                   "anchor precision (default: set precision)");
  add_common(disc, disc_opts.common);
  disc->callback([&code, &disc_opts, disc] {
    apply_config(disc, disc_opts.common.config_path);
    code = run_disc(disc_opts, disc->count("--q") > 0, disc->count("--s") > 0);
  });

  CLI::App* decompose = app.add_subcommand("decompose", "truncated-decomposition checks");
  decompose->require_subcommand(1);
  DecomposeOpts dec_opts;
  CLI::App* dverify = decompose->add_subcommand(
      "verify", "check the residual against its pointwise bound at random anchors");
  dverify->add_option("--in", dec_opts.in, "point-set file (required)");
  dverify->add_option("--s", dec_opts.s, "truncation level (required)");
  dverify->add_option("--anchors", dec_opts.anchors, "number of random anchors");
  dverify->add_option("--anchor-level", dec_opts.anchor_level,
                      "anchor grid level (default s+2)");
  dverify->add_option("--seed", dec_opts.seed, "anchor sampling seed");
  dverify->add_option("--z", dec_opts.z, "level-s shift mantissas for the coefficient table")
      ->delimiter(',');
  dverify->add_flag("--table", dec_opts.table,
                    "attach the sparse coefficient table (default shift: origin)");
  add_common(dverify, dec_opts.common);
  dverify->callback([&code, &dec_opts, dverify] {
    apply_config(dverify, dec_opts.common.config_path);
    code = run_decompose_verify(dec_opts);
  });

  MeanOpts mean_opts;
  CLI::App* mean = app.add_subcommand("mean", "shift-averaged discrepancy moments");
  mean->add_option("--in", mean_opts.in, "point-set file (required)");
  mean->add_option("--s", mean_opts.s_list, "truncation levels, one row per (s, q) (required)")
      ->delimiter(',');
  mean->add_option("--q", mean_opts.q_list, "exponents, numbers or 'inf'")->delimiter(',');
  mean->add_option("--mode", mean_opts.mode, "exact | sampled")
      ->check(CLI::IsMember({"exact", "sampled"}));
  mean->add_option("--count", mean_opts.count, "sampled shift count");
  mean->add_option("--seed", mean_opts.seed, "sampling seed");
  mean->add_option("--inner-level", mean_opts.inner_level,
                   "anchor grid level for fractional exponents (0 = automatic)");
  add_common(mean, mean_opts.common);
  mean->callback([&code, &mean_opts, mean] {
    apply_config(mean, mean_opts.common.config_path);
    code = run_mean(mean_opts);
  });

  KhinchinOpts khin_opts;
  CLI::App* khinchin = app.add_subcommand("khinchin", "moment-comparison checks on random tables");
  khinchin->add_option("--k", khin_opts.k, "number of variables");
  khinchin->add_option("--s", khin_opts.s, "level per variable");
  khinchin->add_option("--q", khin_opts.q_list, "exponents to compare against the second moment")
      ->delimiter(',');
  khinchin->add_option("--tables", khin_opts.tables, "number of random tables");
  khinchin->add_option("--seed", khin_opts.seed, "coefficient seed");
  add_common(khinchin, khin_opts.common);
  khinchin->callback([&code, &khin_opts, khinchin] {
    apply_config(khinchin, khin_opts.common.config_path);
    code = run_khinchin(khin_opts);
  });

  CLI::App* theorem = app.add_subcommand("theorem", "verdicts for the shift-averaged bounds");
  theorem->require_subcommand(1);
  TheoremOpts th_opts;
  auto add_theorem = [&](const std::string& name, TheoremId id, const char* help) {
    CLI::App* t = theorem->add_subcommand(name, help);
    t->add_option("--in", th_opts.in, "point-set file");
    t->add_option("--net", th_opts.net_family, "built-in family instead of --in")
        ->check(CLI::IsMember({"bitrev", "identity", "sobol", "file"}));
    t->add_option("--net-level", th_opts.net_level, "family level (default: --s)");
    t->add_option("--d", th_opts.d, "dimension for identity/sobol families");
    t->add_option("--matrices", th_opts.matrices, "generator-matrix file for --net file");
    t->add_option("--directions", th_opts.directions, "direction-number table for sobol");
    t->add_option("--s", th_opts.s, "truncation level (required)");
    t->add_option("--q", th_opts.q_str, "moment exponent");
    t->add_option("--mode", th_opts.mode, "exact | sampled")
        ->check(CLI::IsMember({"exact", "sampled"}));
    t->add_option("--count", th_opts.count, "sampled shift count");
    t->add_option("--seed", th_opts.seed, "sampling seed");
    t->add_option("--claimed-delta", th_opts.claimed_delta,
                  "net quality to certify (default: compute the minimum)");
    t->add_option("--inner-level", th_opts.inner_level,
                  "anchor grid level for fractional exponents (0 = automatic)");
    t->add_flag("--diagnostics", th_opts.diagnostics,
                "attach the window/floor/tail diagnostic block");
    add_common(t, th_opts.common);
    t->callback([&code, &th_opts, t, id] {
      apply_config(t, th_opts.common.config_path);
      code = run_theorem(id, th_opts, t->count("--q") > 0);
    });
  };
  add_theorem("2.1", TheoremId::T21, "mean upper bound for certified nets");
  add_theorem("2.2", TheoremId::T22, "mean lower bound for 0 < q <= 1");
  add_theorem("2.3", TheoremId::T23, "sup lower bound for d >= 3");

  SearchOpts search_opts;
  CLI::App* search = app.add_subcommand("search", "extremal shifts for a point set");
  search->add_option("--in", search_opts.in, "point-set file (required)");
  search->add_option("--s", search_opts.s, "shift group level (required)");
  search->add_option("--objective", search_opts.objective,
                     "minimize-lq | maximize-lq | maximize-linf")
      ->check(CLI::IsMember({"minimize-lq", "maximize-lq", "maximize-linf"}));
  search->add_option("--budget", search_opts.budget, "shifts to examine (required)");
  search->add_option("--q", search_opts.q_str, "norm exponent for the lq objectives");
  search->add_option("--seed", search_opts.seed, "sampling seed");
  search->add_option("--inner-level", search_opts.inner_level,
                     "anchor grid level for fractional exponents (0 = automatic)");
  add_common(search, search_opts.common);
  search->callback([&code, &search_opts, search] {
    apply_config(search, search_opts.common.config_path);
    code = run_search(search_opts);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const dyadisc::feasibility_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return code;
}
