#pragma once

// Closed forms against quadrature over a grid of (nonlinearity, family, j, r),
// plus the fixture file of oracle values.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "plcycles/averaging.hpp"
#include "plcycles/errors.hpp"
#include "plcycles/model.hpp"
#include "plcycles/quadrature.hpp"
#include "plcycles/spec_file.hpp"

namespace plcycles {

struct OracleGrid {
  std::vector<int> blocks{1, 2, 3, 4};
  std::vector<double> radii{0.2, 0.5, 0.9, 1.1, 1.5, 2.0, 3.0, 5.0, 10.0};
  std::vector<Nonlinearity> nonlinearities{Nonlinearity::Saturation, Nonlinearity::Sign};
  std::vector<FrequencyFamily> families{FrequencyFamily::OddFrequencies,
                                        FrequencyFamily::ConsecutiveFrequencies};
};

/// One grid point: "I" rows compare the cosine integral, "J" rows the sine integral.
struct OracleRow {
  std::string integral;  ///< "I" or "J"
  std::string kind;      ///< which closed-form branch is exercised
  Nonlinearity nonlinearity = Nonlinearity::Saturation;
  FrequencyFamily family = FrequencyFamily::OddFrequencies;
  int block = 1;
  int harmonic = 1;
  double r = 1.0;
  double closed_form = 0.0;
  double quadrature = 0.0;
  double error_estimate = 0.0;

  double deviation() const { return std::abs(closed_form - quadrature); }
  /// "I:saturation:odd:j=2:r=2"
  std::string label() const {
    return integral + ":" + std::string(to_string(nonlinearity)) + ":" +
           std::string(to_string(family)) + ":j=" + std::to_string(block) + ":r=" +
           shortest(r);
  }

  static std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }
};

struct OracleSummary {
  std::vector<OracleRow> rows;
  double max_deviation = 0.0;
  double tolerance = 1e-8;
  bool passed() const { return max_deviation < tolerance; }

  /// Rows sorted by deviation, largest first.
  std::vector<OracleRow> worst(std::size_t count) const {
    std::vector<OracleRow> sorted = rows;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const OracleRow& a, const OracleRow& b) { return a.deviation() > b.deviation(); });
    if (sorted.size() > count) sorted.resize(count);
    return sorted;
  }
};

inline std::string closed_form_kind(Nonlinearity nl, int w, double r) {
  if (w % 2 == 0) return "even-harmonic-zero";
  if (nl == Nonlinearity::Sign) return "sign-constant";
  if (w == 1) return r <= 1.0 ? "pi-r" : "K";
  return r <= 1.0 ? "inner-zero" : "L";
}

inline OracleSummary run_oracle_check(const OracleGrid& grid = {}, double tolerance = 1e-8,
                                      const QuadratureConfig& cfg = {}) {
  if (!(tolerance > 0.0)) throw DomainError("oracle-check: tolerance must be > 0");
  OracleSummary summary;
  summary.tolerance = tolerance;
  for (auto nl : grid.nonlinearities) {
    for (auto family : grid.families) {
      for (int j : grid.blocks) {
        if (j < 1) throw DomainError("oracle-check: block index must be >= 1, got " + std::to_string(j));
        const int w = block_frequency(j, family);
        for (double r : grid.radii) {
          if (!(r > 0.0)) throw DomainError("oracle-check: radius must be > 0");
          const auto ic = harmonic_integral_quadrature(nl, w, r, Trig::Cos, cfg);
          OracleRow row{"I", closed_form_kind(nl, w, r), nl, family, j, w, r,
                        harmonic_integral(nl, w, r), ic.value, ic.error_estimate};
          summary.rows.push_back(row);
          const auto is = harmonic_integral_quadrature(nl, w, r, Trig::Sin, cfg);
          summary.rows.push_back({"J", "sine-zero", nl, family, j, w, r, 0.0, is.value,
                                  is.error_estimate});
        }
      }
    }
  }
  for (const auto& row : summary.rows) {
    summary.max_deviation = std::max(summary.max_deviation, row.deviation());
  }
  return summary;
}

// Fixture file: {"records": [{"case": label, "inputs": {...}, "oracle": value}, ...]}

inline json oracle_fixture(const OracleSummary& summary) {
  json records = json::array();
  for (const auto& row : summary.rows) {
    json inputs;
    inputs["family"] = std::string(to_string(row.family));
    inputs["harmonic"] = row.harmonic;
    inputs["integral"] = row.integral;
    inputs["j"] = row.block;
    inputs["nonlinearity"] = std::string(to_string(row.nonlinearity));
    inputs["r"] = row.r;
    json rec;
    rec["case"] = row.label();
    rec["inputs"] = inputs;
    rec["kind"] = row.kind;
    rec["oracle"] = row.quadrature;
    records.push_back(rec);
  }
  json doc;
  doc["records"] = records;
  return doc;
}

struct FixtureMismatch {
  std::string label;
  double expected = 0.0;
  double actual = 0.0;
};

/// Records of the fixture that are missing from the summary or differ by more than tol.
inline std::vector<FixtureMismatch> compare_fixture(const json& fixture,
                                                    const OracleSummary& summary,
                                                    double tol = 1e-12) {
  if (!fixture.is_object() || !fixture.contains("records") || !fixture["records"].is_array()) {
    throw DomainError("fixture: expected an object with a \"records\" array");
  }
  std::vector<FixtureMismatch> out;
  for (const auto& rec : fixture["records"]) {
    if (!rec.contains("case") || !rec.contains("oracle") || !rec["oracle"].is_number()) {
      throw DomainError("fixture: record without \"case\" or numeric \"oracle\"");
    }
    const auto label = rec["case"].get<std::string>();
    const double expected = rec["oracle"].get<double>();
    auto it = std::find_if(summary.rows.begin(), summary.rows.end(),
                           [&](const OracleRow& r) { return r.label() == label; });
    if (it == summary.rows.end()) {
      out.push_back({label, expected, std::nan("")});
    } else if (!(std::abs(it->quadrature - expected) <= tol)) {
      out.push_back({label, expected, it->quadrature});
    }
  }
  return out;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("'" + path + "': malformed JSON: " + e.what());
  }
}

}  // namespace plcycles
