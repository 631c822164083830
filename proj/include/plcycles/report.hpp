#pragma once

// The analyze pipeline: classify, find the averaged zero, verify cycles, and
// assemble the JSON report.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plcycles/averaging.hpp"
#include "plcycles/flow.hpp"
#include "plcycles/quadrature.hpp"
#include "plcycles/spec_file.hpp"
#include "plcycles/zeros.hpp"

namespace plcycles {

inline constexpr const char* kToolName = "plcycles";
inline constexpr const char* kToolVersion = "1.0.0";

/// analyze exit codes.
enum ExitCode : int {
  kExitZeroFound = 0,
  kExitFailure = 1,
  kExitNoZero = 2,
  kExitDegenerate = 3,
};

struct AnalyzeOptions {
  std::optional<std::vector<double>> epsilons;  ///< overrides the spec's list
  Region region = Region::Outer;
  LimitCycleOptions cycle;
};

struct AnalysisResult {
  json report;
  int exit_code = kExitFailure;
  ZeroReport zero;
  std::vector<SweepRow> sweep;
};

namespace detail {

inline json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

inline json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json polar_json(const PolarPoint& z) {
  json blocks = json::array();
  for (const auto& b : z.blocks()) blocks.push_back({{"radius", b.radius}, {"theta", b.theta}});
  return {{"blocks", blocks}, {"r", z.r()}};
}

inline json cascade_json(const std::vector<CascadeEntry>& log) {
  json out = json::array();
  for (const auto& e : log) {
    out.push_back({{"block", e.block},
                   {"exists", e.exists},
                   {"message", e.message},
                   {"radius", nullable(e.radius)},
                   {"theta", nullable(e.theta)},
                   {"u", nullable(e.u)},
                   {"v", nullable(e.v)}});
  }
  return out;
}

inline json sweep_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json j;
    j["epsilon"] = row.epsilon;
    if (!row.result) {
      j["status"] = row.error_kind;
      j["error"] = row.error;
      out.push_back(j);
      continue;
    }
    const auto& r = *row.result;
    j["status"] = "converged";
    j["fixed_point"] = vector_json(r.fixed_point);
    j["period"] = r.period;
    j["poincare_residual"] = r.poincare_residual;
    j["distance_to_prediction"] = r.distance_to_prediction;
    j["floquet_max_modulus"] = r.floquet_max_modulus ? json(*r.floquet_max_modulus) : json(nullptr);
    j["floquet_min_distance_to_one"] =
        r.floquet_min_distance_to_one ? json(*r.floquet_min_distance_to_one) : json(nullptr);
    j["crossing_ok"] = r.crossing_ok;
    j["iterations"] = r.iterations;
    j["events_per_period"] = static_cast<int>(r.cycle.events.size());
    out.push_back(j);
  }
  return out;
}

// Closed-form h and I_j against quadrature at one point of the averaged space.
inline json oracle_summary_json(const ControlSystem& s, const PolarPoint& z) {
  const QuadratureConfig cfg;
  double max_dev = 0.0;
  const auto closed = averaged_function(s, z);
  for (int c = 1; c <= 2 * s.n() - 1; ++c) {
    const auto q = averaged_component_quadrature(s, z, c, cfg);
    max_dev = std::max(max_dev, std::abs(q.value - closed[c]));
  }
  for (int j = 1; j <= s.n(); ++j) {
    const auto q =
        harmonic_integral_quadrature(s.nonlinearity(), s.frequency(j), z.r(), Trig::Cos, cfg);
    max_dev = std::max(max_dev, std::abs(q.value - i_integral(j, z.r(), s)));
  }
  return {{"max_abs_deviation", max_dev}, {"point", polar_json(z)}};
}

inline PolarPoint reference_point(const ControlSystem& s) {
  return PolarPoint(2.0, std::vector<BlockPolar>(static_cast<std::size_t>(s.n() - 1), {0.0, 1.0}));
}

}  // namespace detail

inline std::string_view to_string(Region r) { return r == Region::InnerBall ? "inner" : "outer"; }

inline AnalysisResult analyze(const SystemSpec& spec, const AnalyzeOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  AnalysisResult out;
  const ControlSystem s = spec.system();
  const std::vector<double> epsilons = opt.epsilons ? *opt.epsilons : spec.epsilons;

  out.zero = assemble_zero(s, opt.region);
  const auto& zr = out.zero;
  if (zr.zero && !epsilons.empty()) out.sweep = epsilon_sweep(s, epsilons, *zr.zero, opt.cycle);

  json& rep = out.report;
  SystemSpec echo = spec;
  echo.epsilons = epsilons;
  rep["spec"] = spec_to_json(echo);
  rep["region"] = std::string(to_string(opt.region));
  rep["verdict"] = {{"kind", std::string(to_string(zr.verdict.kind))},
                    {"reason", zr.verdict.reason}};
  if (zr.zero) {
    rep["zero"] = {{"coordinates", detail::vector_json(zr.zero->coordinates())},
                   {"polar", detail::polar_json(*zr.zero)},
                   {"section_state", detail::vector_json(zr.zero->section_state())}};
  } else {
    rep["zero"] = nullptr;
  }
  rep["jacobian_det"] = zr.jacobian_det ? json(*zr.jacobian_det) : json(nullptr);
  rep["degree"] = zr.degree ? json(*zr.degree) : json(nullptr);
  rep["numerically_degenerate"] = zr.numerically_degenerate;
  rep["newton_residual"] = detail::nullable(zr.newton_residual);
  rep["cascade"] = detail::cascade_json(zr.cascade_log);
  rep["limit_cycles"] = detail::sweep_json(out.sweep);
  rep["oracle_check"] =
      detail::oracle_summary_json(s, zr.zero ? *zr.zero : detail::reference_point(s));
  rep["tool"] = {{"name", kToolName}, {"version", kToolVersion}};

  using Kind = DegeneracyVerdict::Kind;
  if (zr.verdict.kind != Kind::Regular) {
    out.exit_code = kExitDegenerate;
  } else {
    out.exit_code = zr.zero ? kExitZeroFound : kExitNoZero;
  }
  rep["timing_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace plcycles
