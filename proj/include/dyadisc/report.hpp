#pragma once

// Deterministic JSON and CSV emission for the report structs.  Object keys
// keep insertion order, floats print with 17 significant digits, and exact
// rationals print as "p/q" strings next to a float rendering.  Non-finite
// floats become the quoted tokens "inf", "-inf", "nan" so the output stays
// parseable.  Identical inputs produce byte-identical output.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dyadisc/decomposition.hpp"
#include "dyadisc/discrepancy.hpp"
#include "dyadisc/dyadic.hpp"
#include "dyadisc/mean.hpp"
#include "dyadisc/pointset.hpp"
#include "dyadisc/rademacher.hpp"
#include "dyadisc/rational.hpp"

namespace dyadisc {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

class Json {
 public:
  Json() = default;

  static Json null() { return Json(); }
  static Json boolean(bool v) {
    Json j;
    j.kind_ = Kind::Bool;
    j.bool_ = v;
    return j;
  }
  static Json integer(std::int64_t v) {
    Json j;
    j.kind_ = Kind::Int;
    j.int_ = v;
    return j;
  }
  static Json unsigned_int(std::uint64_t v) {
    Json j;
    j.kind_ = Kind::Uint;
    j.uint_ = v;
    return j;
  }
  static Json number(double v) {
    if (std::isnan(v)) return string("nan");
    if (std::isinf(v)) return string(v > 0 ? "inf" : "-inf");
    Json j;
    j.kind_ = Kind::Double;
    j.double_ = v;
    return j;
  }
  static Json string(std::string v) {
    Json j;
    j.kind_ = Kind::String;
    j.string_ = std::move(v);
    return j;
  }
  static Json array() {
    Json j;
    j.kind_ = Kind::Array;
    return j;
  }
  static Json object() {
    Json j;
    j.kind_ = Kind::Object;
    return j;
  }

  void push(Json v) {
    if (kind_ != Kind::Array) throw std::logic_error("json: push on non-array");
    items_.push_back(std::move(v));
  }

  void set(const std::string& key, Json v) {
    if (kind_ != Kind::Object) throw std::logic_error("json: set on non-object");
    fields_.emplace_back(key, std::move(v));
  }

  std::string dump() const {
    std::string out;
    write(out, 0);
    out.push_back('\n');
    return out;
  }

 private:
  enum class Kind { Null, Bool, Int, Uint, Double, String, Array, Object };

  Kind kind_ = Kind::Null;
  bool bool_ = false;
  std::int64_t int_ = 0;
  std::uint64_t uint_ = 0;
  double double_ = 0;
  std::string string_;
  std::vector<Json> items_;
  std::vector<std::pair<std::string, Json>> fields_;

  bool scalar() const { return kind_ != Kind::Array && kind_ != Kind::Object; }

  static void write_escaped(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
          } else {
            out.push_back(c);
          }
      }
    }
    out.push_back('"');
  }

  static void indent(std::string& out, unsigned depth) {
    out.append(std::size_t(2) * depth, ' ');
  }

  void write(std::string& out, unsigned depth) const {
    switch (kind_) {
      case Kind::Null: out += "null"; return;
      case Kind::Bool: out += bool_ ? "true" : "false"; return;
      case Kind::Int: out += std::to_string(int_); return;
      case Kind::Uint: out += std::to_string(uint_); return;
      case Kind::Double: out += format_double(double_); return;
      case Kind::String: write_escaped(out, string_); return;
      case Kind::Array: {
        if (items_.empty()) {
          out += "[]";
          return;
        }
        bool inline_ok = true;
        for (const Json& v : items_) inline_ok = inline_ok && v.scalar();
        if (inline_ok) {
          out.push_back('[');
          for (std::size_t i = 0; i < items_.size(); ++i) {
            if (i) out += ", ";
            items_[i].write(out, depth);
          }
          out.push_back(']');
          return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < items_.size(); ++i) {
          indent(out, depth + 1);
          items_[i].write(out, depth + 1);
          if (i + 1 < items_.size()) out.push_back(',');
          out.push_back('\n');
        }
        indent(out, depth);
        out.push_back(']');
        return;
      }
      case Kind::Object: {
        if (fields_.empty()) {
          out += "{}";
          return;
        }
        out += "{\n";
        for (std::size_t i = 0; i < fields_.size(); ++i) {
          indent(out, depth + 1);
          write_escaped(out, fields_[i].first);
          out += ": ";
          fields_[i].second.write(out, depth + 1);
          if (i + 1 < fields_.size()) out.push_back(',');
          out.push_back('\n');
        }
        indent(out, depth);
        out.push_back('}');
        return;
      }
    }
  }
};

// Emits the exact value as a "p/q" string under `key` and a float rendering
// under `key_float`.
inline void set_rational(Json& obj, const std::string& key, const Rational& r) {
  obj.set(key, Json::string(to_fraction_string(r)));
  obj.set(key + "_float", Json::number(to_double(r)));
}

inline Json json_uint_array(const std::vector<unsigned>& v) {
  Json a = Json::array();
  for (unsigned x : v) a.push(Json::unsigned_int(x));
  return a;
}

inline Json json_uint64_array(const std::vector<std::uint64_t>& v) {
  Json a = Json::array();
  for (std::uint64_t x : v) a.push(Json::unsigned_int(x));
  return a;
}

inline Json to_json(const DyadicPoint& p) {
  Json j = Json::object();
  Json m = Json::array();
  unsigned w = 0;
  for (const DyadicScalar& c : p.coords) {
    m.push(Json::unsigned_int(c.mantissa));
    w = std::max(w, c.precision);
  }
  j.set("mantissas", m);
  j.set("precision", Json::unsigned_int(w));
  return j;
}

inline Json to_json(const ElementaryBox& b) {
  Json j = Json::object();
  j.set("flavor", Json::string(b.flavor == BoxFlavor::Delta ? "delta" : "pi"));
  j.set("levels", json_uint_array(b.levels));
  j.set("offsets", json_uint64_array(b.offsets));
  return j;
}

inline Json to_json(const NetCheckReport& r) {
  Json j = Json::object();
  j.set("is_net", Json::boolean(r.is_net));
  j.set("minimal_delta", Json::unsigned_int(r.minimal_delta));
  if (r.has_witness) {
    j.set("witness", to_json(r.witness));
    j.set("witness_count", Json::unsigned_int(r.witness_count));
  }
  return j;
}

inline Json to_json(const DiscrepancyResult& r) {
  Json j = Json::object();
  j.set("q", Json::number(r.q));
  j.set("value", Json::number(r.value));
  j.set("method", Json::string(method_name(r.method)));
  j.set("error_radius", Json::number(r.error_radius));
  j.set("s_used", Json::unsigned_int(r.s_used));
  if (r.power >= 1) {
    j.set("power", Json::unsigned_int(r.power));
    set_rational(j, "exact_power", r.exact_power);
  }
  j.set("lo", Json::number(r.lo));
  j.set("hi", Json::number(r.hi));
  return j;
}

// Sparse table: only nonzero coefficients are written.
inline Json to_json(const MicroLocalTable& t) {
  Json j = Json::object();
  j.set("d", Json::unsigned_int(t.d));
  j.set("s", Json::unsigned_int(t.s));
  j.set("z", to_json(t.z));
  Json entries = Json::array();
  for (std::size_t idx = 0; idx < t.values.size(); ++idx) {
    if (t.values[idx] == 0) continue;
    Json e = Json::object();
    e.set("levels", json_uint_array(t.levels_of(idx)));
    set_rational(e, "value", t.values[idx]);
    entries.push(e);
  }
  j.set("entries", entries);
  return j;
}

inline Json to_json(const MeanDiscrepancyEstimate& e) {
  Json j = Json::object();
  j.set("q", Json::number(e.q));
  j.set("value", Json::number(e.value));
  j.set("method", Json::string(mode_name(e.mode)));
  j.set("s", Json::unsigned_int(e.s));
  j.set("shifts_examined", Json::unsigned_int(e.shifts_examined));
  j.set("seed", Json::unsigned_int(e.seed));
  j.set("inner_level", Json::unsigned_int(e.inner_level));
  j.set("error_radius", Json::number(e.error_radius));
  j.set("lo", Json::number(e.lo));
  j.set("hi", Json::number(e.hi));
  j.set("per_shift_exact", Json::boolean(e.per_shift_exact));
  if (e.power >= 1) {
    j.set("power", Json::unsigned_int(e.power));
    set_rational(j, "exact_power", e.exact_power);
  }
  if (!std::isnan(e.lower_confidence))
    j.set("lower_confidence", Json::number(e.lower_confidence));
  return j;
}

inline Json to_json(const TheoremReport& r) {
  Json j = Json::object();
  j.set("theorem", Json::string(theorem_name(r.theorem)));
  j.set("n", Json::unsigned_int(r.n));
  j.set("d", Json::unsigned_int(r.d));
  j.set("q", Json::number(r.q));
  j.set("delta", Json::unsigned_int(r.delta));
  j.set("s", Json::unsigned_int(r.s));
  j.set("bound_value", Json::number(r.bound_value));
  j.set("bound_method", Json::string("closed-form"));
  if (r.theorem != TheoremId::T21) {
    j.set("threshold_s", Json::number(r.threshold_s));
    j.set("minimal_s", Json::unsigned_int(r.minimal_s));
    j.set("threshold_met", Json::boolean(r.threshold_met));
  }
  if (r.has_measurement) j.set("measured", to_json(r.measured));
  j.set("verdict", Json::string(verdict_name(r.verdict)));
  return j;
}

inline Json to_json(const ShiftSearchResult& r) {
  Json j = Json::object();
  j.set("objective", Json::string(objective_name(r.objective)));
  j.set("q", Json::number(r.q));
  j.set("s", Json::unsigned_int(r.s));
  j.set("method", Json::string(r.exhaustive ? "exact-enumeration" : "sampled"));
  j.set("best_value", Json::number(r.best_value));
  j.set("best_index", Json::unsigned_int(r.best_index));
  j.set("best_shift", to_json(r.best_shift));
  j.set("shifts_examined", Json::unsigned_int(r.shifts_examined));
  j.set("seed", Json::unsigned_int(r.seed));
  j.set("inner_level", Json::unsigned_int(r.inner_level));
  return j;
}

inline Json to_json(const ErrorTermNorms& n) {
  Json j = Json::object();
  j.set("q", Json::number(n.q));
  j.set("s", Json::unsigned_int(n.s));
  j.set("uniform_bound", Json::number(n.uniform_bound));
  j.set("generic_bound", Json::number(n.generic_bound));
  j.set("is_net", Json::boolean(n.is_net));
  if (n.is_net) {
    j.set("net_delta", Json::unsigned_int(n.net_delta));
    j.set("net_bound", Json::number(n.net_bound));
  }
  j.set("eq_bound", Json::number(n.eq_bound));
  j.set("e1inf_bound", Json::number(n.e1inf_bound));
  return j;
}

inline Json to_json(const ProofDiagnostics& p) {
  Json j = Json::object();
  j.set("d", Json::unsigned_int(p.d));
  j.set("s", Json::unsigned_int(p.s));
  j.set("n", Json::unsigned_int(p.n));
  j.set("q", Json::number(p.q));
  j.set("method", Json::string(mode_name(p.mode)));
  j.set("seed", Json::unsigned_int(p.seed));
  j.set("z_examined", Json::unsigned_int(p.z_examined));
  j.set("is_net", Json::boolean(p.is_net));
  j.set("delta", Json::unsigned_int(p.delta));
  if (p.has_window) {
    j.set("window_max", Json::number(p.window_max));
    j.set("window_bound", Json::number(p.window_bound));
    j.set("window_ok", Json::boolean(p.window_ok));
  }
  j.set("q2_min", Json::number(p.q2_min));
  j.set("q2_lower", Json::number(p.q2_lower));
  j.set("q2_ok", Json::boolean(p.q2_ok));
  if (p.has_xi) {
    j.set("c_constant", Json::number(p.c_constant));
    j.set("xi", Json::number(p.xi));
    j.set("xi_ok", Json::boolean(p.xi_ok));
  }
  return j;
}

inline Json to_json(const KhinchinReport& r) {
  Json j = Json::object();
  j.set("q", Json::number(r.q));
  j.set("lower", Json::number(r.lower));
  j.set("upper", Json::number(r.upper));
  j.set("norm", Json::number(r.norm));
  j.set("ratio", Json::number(r.ratio));
  j.set("lower_ok", Json::boolean(r.lower_ok));
  j.set("upper_ok", Json::boolean(r.upper_ok));
  return j;
}

inline Json to_json(const NormBracketReport& r) {
  Json j = Json::object();
  j.set("lower", Json::number(r.lower));
  j.set("upper", Json::number(r.upper));
  j.set("norm", Json::number(r.norm));
  j.set("holds", Json::boolean(r.holds));
  return j;
}

inline Json to_json(const SupLowerBoundReport& r) {
  Json j = Json::object();
  j.set("bound", Json::number(r.bound));
  j.set("sup", Json::number(r.sup));
  j.set("holds", Json::boolean(r.holds));
  return j;
}

inline Json to_json(const NormChainReport& r) {
  Json j = Json::object();
  j.set("q", Json::number(r.q));
  j.set("s", Json::unsigned_int(r.s));
  j.set("linf", Json::number(r.linf));
  j.set("lq_lo", Json::number(r.lq_lo));
  j.set("lq_hi", Json::number(r.lq_hi));
  j.set("e_inf_bound", Json::number(r.e_inf_bound));
  j.set("rhs_hi", Json::number(r.rhs_hi));
  j.set("lower_ok", Json::boolean(r.lower_ok));
  j.set("upper_ok", Json::boolean(r.upper_ok));
  j.set("holds", Json::boolean(r.holds));
  return j;
}

inline Json to_json(const JSigmaReport& r) {
  Json j = Json::object();
  j.set("k", Json::unsigned_int(r.k));
  j.set("sigma", Json::unsigned_int(r.sigma));
  j.set("s", Json::unsigned_int(r.s));
  j.set("count", Json::string(r.count.str()));
  j.set("count_float", Json::number(to_double(Rational(r.count))));
  j.set("lower_bound", Json::number(r.lower_bound));
  j.set("applicable", Json::boolean(r.applicable));
  j.set("bound_ok", Json::boolean(r.bound_ok));
  return j;
}

// CSV projection: header plus rows, RFC-style quoting.  Cells are preformatted
// strings; use csv_double for floats so the rendering matches the JSON one.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : columns_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
      throw std::invalid_argument("csv: row width does not match header");
    rows_.push_back(std::move(cells));
  }

  std::string dump() const {
    std::string out;
    write_line(out, columns_);
    for (const auto& row : rows_) write_line(out, row);
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;

  static void write_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      write_cell(out, cells[i]);
    }
    out.push_back('\n');
  }

  static void write_cell(std::string& out, const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) {
      out += cell;
      return;
    }
    out.push_back('"');
    for (char c : cell) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
  }
};

inline std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

}  // namespace dyadisc
