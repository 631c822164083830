#pragma once

// System files (JSON) and the deterministic JSON printer used
// for reports and spec round-trips.
//
//   {
//     "n": 2,
//     "family": "odd" | "consecutive",
//     "nonlinearity": "saturation" | "sign",
//     "A": [[...], ...],          // 2n x 2n, row-major
//     "b": [...],                 // length 2n
//     "epsilons": [1e-2, 1e-3]    // optional
//   }

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plcycles/errors.hpp"
#include "plcycles/model.hpp"

namespace plcycles {

using json = nlohmann::json;

/// Field-level problem in a spec file; messages use 1-based indices.
class SpecError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct SystemSpec {
  int n = 1;
  FrequencyFamily family = FrequencyFamily::OddFrequencies;
  Nonlinearity nonlinearity = Nonlinearity::Saturation;
  Matrix a;
  Vector b;
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};

  ControlSystem system(double epsilon = 0.0) const {
    return ControlSystem(n, family, a, b, nonlinearity, epsilon);
  }

  friend bool operator==(const SystemSpec& l, const SystemSpec& r) {
    return l.n == r.n && l.family == r.family && l.nonlinearity == r.nonlinearity &&
           l.a == r.a && l.b == r.b && l.epsilons == r.epsilons;
  }
};

namespace detail {

inline double number_at(const json& v, const std::string& where) {
  if (!v.is_number()) throw SpecError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SpecError(where + ": not finite");
  return d;
}

}  // namespace detail

inline SystemSpec parse_spec(const json& doc) {
  if (!doc.is_object()) throw SpecError("spec: top level must be an object");
  SystemSpec spec;

  if (!doc.contains("n")) throw SpecError("n: missing");
  if (!doc["n"].is_number_integer()) throw SpecError("n: expected an integer");
  spec.n = doc["n"].get<int>();
  if (spec.n < 1) throw SpecError("n: must be >= 1, got " + std::to_string(spec.n));
  const int dim = 2 * spec.n;

  if (!doc.contains("family") || !doc["family"].is_string()) {
    throw SpecError("family: expected \"odd\" or \"consecutive\"");
  }
  const auto family = doc["family"].get<std::string>();
  if (family == "odd") {
    spec.family = FrequencyFamily::OddFrequencies;
  } else if (family == "consecutive") {
    spec.family = FrequencyFamily::ConsecutiveFrequencies;
  } else {
    throw SpecError("family: expected \"odd\" or \"consecutive\", got \"" + family + "\"");
  }

  if (!doc.contains("nonlinearity") || !doc["nonlinearity"].is_string()) {
    throw SpecError("nonlinearity: expected \"saturation\" or \"sign\"");
  }
  const auto nl = doc["nonlinearity"].get<std::string>();
  if (nl == "saturation") {
    spec.nonlinearity = Nonlinearity::Saturation;
  } else if (nl == "sign") {
    spec.nonlinearity = Nonlinearity::Sign;
  } else {
    throw SpecError("nonlinearity: expected \"saturation\" or \"sign\", got \"" + nl + "\"");
  }

  if (!doc.contains("A") || !doc["A"].is_array()) throw SpecError("A: expected an array of rows");
  const auto& rows = doc["A"];
  if (static_cast<int>(rows.size()) != dim) {
    throw SpecError("A: expected " + std::to_string(dim) + " rows, got " +
                    std::to_string(rows.size()));
  }
  spec.a.resize(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const auto& row = rows[i];
    const std::string where = "A[" + std::to_string(i + 1) + "]";
    if (!row.is_array()) throw SpecError(where + ": expected an array");
    if (static_cast<int>(row.size()) != dim) {
      throw SpecError(where + ": row has " + std::to_string(row.size()) + " entries, expected " +
                      std::to_string(dim));
    }
    for (int j = 0; j < dim; ++j) {
      spec.a(i, j) = detail::number_at(row[j], where + "[" + std::to_string(j + 1) + "]");
    }
  }

  if (!doc.contains("b") || !doc["b"].is_array()) throw SpecError("b: expected an array");
  const auto& b = doc["b"];
  if (static_cast<int>(b.size()) != dim) {
    throw SpecError("b: expected " + std::to_string(dim) + " entries, got " +
                    std::to_string(b.size()));
  }
  spec.b.resize(dim);
  bool nonzero = false;
  for (int i = 0; i < dim; ++i) {
    spec.b(i) = detail::number_at(b[i], "b[" + std::to_string(i + 1) + "]");
    nonzero = nonzero || spec.b(i) != 0.0;
  }
  if (!nonzero) throw SpecError("b: must have at least one nonzero entry");

  if (doc.contains("epsilons")) {
    const auto& e = doc["epsilons"];
    if (!e.is_array()) throw SpecError("epsilons: expected an array");
    spec.epsilons.clear();
    for (std::size_t k = 0; k < e.size(); ++k) {
      spec.epsilons.push_back(detail::number_at(e[k], "epsilons[" + std::to_string(k + 1) + "]"));
    }
  }
  return spec;
}

inline SystemSpec parse_spec_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("spec: malformed JSON: ") + e.what());
  }
  return parse_spec(doc);
}

inline SystemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open spec file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str());
}

inline json spec_to_json(const SystemSpec& spec) {
  json doc;
  doc["n"] = spec.n;
  doc["family"] = std::string(to_string(spec.family));
  doc["nonlinearity"] = std::string(to_string(spec.nonlinearity));
  json rows = json::array();
  for (Eigen::Index i = 0; i < spec.a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < spec.a.cols(); ++j) row.push_back(spec.a(i, j));
    rows.push_back(row);
  }
  doc["A"] = rows;
  json b = json::array();
  for (Eigen::Index i = 0; i < spec.b.size(); ++i) b.push_back(spec.b(i));
  doc["b"] = b;
  doc["epsilons"] = spec.epsilons;
  return doc;
}

/// %.17g for every double, keys sorted (nlohmann objects are ordered maps).
inline std::string format_double(double v) {
  if (std::isnan(v) || std::isinf(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace detail {

inline void dump_value(std::ostream& os, const json& v, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << json(it.key()).dump() << ": ";
        dump_value(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close_pad << "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        os << "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_primitive(); });
      if (flat) {
        os << "[";
        for (std::size_t k = 0; k < v.size(); ++k) {
          if (k) os << ", ";
          dump_value(os, v[k], indent, depth + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) os << ",\n";
        os << pad;
        dump_value(os, v[k], indent, depth + 1);
      }
      os << "\n" << close_pad << "]";
      return;
    }
    case json::value_t::number_float:
      os << format_double(v.get<double>());
      return;
    default:
      os << v.dump();
  }
}

}  // namespace detail

inline std::string dump_json(const json& v, int indent = 2) {
  std::ostringstream os;
  detail::dump_value(os, v, indent, 0);
  os << "\n";
  return os.str();
}

inline std::string serialize_spec(const SystemSpec& spec) { return dump_json(spec_to_json(spec)); }

}  // namespace plcycles
