// plcycles: analyze | oracle-check | plot

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plcycles/oracle_check.hpp"
#include "plcycles/plot.hpp"
#include "plcycles/report.hpp"
#include "plcycles/spec_file.hpp"

using namespace plcycles;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

struct AnalyzeArgs {
  std::string spec;
  std::string out;
  std::vector<double> epsilons;
  bool epsilons_given = false;
  std::string region = "outer";
  std::string trajectory;
  std::optional<double> trajectory_epsilon;
};

int run_analyze(const AnalyzeArgs& a) {
  const SystemSpec spec = load_spec(a.spec);
  AnalyzeOptions opt;
  if (a.epsilons_given) opt.epsilons = a.epsilons;
  opt.region = a.region == "inner" ? Region::InnerBall : Region::Outer;
  const auto result = analyze(spec, opt);
  write_text(a.out, dump_json(result.report));

  if (!a.trajectory.empty()) {
    const LimitCycleResult* chosen = nullptr;
    for (const auto& row : result.sweep) {
      if (!row.result) continue;
      if (!a.trajectory_epsilon || row.epsilon == *a.trajectory_epsilon) {
        chosen = &*row.result;
        break;
      }
    }
    if (!chosen) {
      std::cerr << "analyze: no converged cycle to export as a trajectory\n";
      return kExitFailure;
    }
    std::ostringstream csv;
    write_trajectory_csv(csv, chosen->cycle);
    write_text(a.trajectory, csv.str());
  }

  const auto& verdict = result.zero.verdict;
  std::cerr << "verdict: " << to_string(verdict.kind) << " (" << verdict.reason << ")\n";
  for (const auto& row : result.sweep) {
    if (!row.result) std::cerr << "epsilon " << row.epsilon << ": " << row.error << "\n";
  }
  return result.exit_code;
}

struct OracleArgs {
  std::vector<int> blocks{1, 2, 3, 4};
  std::vector<double> radii{0.2, 0.5, 0.9, 1.1, 1.5, 2.0, 3.0, 5.0, 10.0};
  std::vector<std::string> nonlinearities{"saturation", "sign"};
  std::vector<std::string> families{"odd", "consecutive"};
  double tol = 1e-8;
  std::string write;
  std::string compare;
  double fixture_tol = 1e-12;
};

int run_oracle_check(const OracleArgs& a) {
  OracleGrid grid;
  grid.blocks = a.blocks;
  grid.radii = a.radii;
  grid.nonlinearities.clear();
  for (const auto& n : a.nonlinearities) {
    grid.nonlinearities.push_back(n == "sign" ? Nonlinearity::Sign : Nonlinearity::Saturation);
  }
  grid.families.clear();
  for (const auto& f : a.families) {
    grid.families.push_back(f == "consecutive" ? FrequencyFamily::ConsecutiveFrequencies
                                               : FrequencyFamily::OddFrequencies);
  }
  const auto summary = plcycles::run_oracle_check(grid, a.tol);

  bool ok = summary.passed();
  std::printf("oracle-check: %zu rows, max |closed form - quadrature| = %.3e (tol %.1e): %s\n",
              summary.rows.size(), summary.max_deviation, summary.tolerance,
              ok ? "PASS" : "FAIL");
  const auto worst = summary.worst(ok ? 3 : 10);
  std::printf("%s offenders:\n", ok ? "largest" : "worst");
  for (const auto& row : worst) {
    std::printf("  %-40s closed %.17g  quadrature %.17g  |d| %.3e\n", row.label().c_str(),
                row.closed_form, row.quadrature, row.deviation());
  }

  if (!a.write.empty()) write_text(a.write, dump_json(oracle_fixture(summary)));
  if (!a.compare.empty()) {
    const auto mismatches = compare_fixture(load_json_file(a.compare), summary, a.fixture_tol);
    std::printf("fixture %s: %zu mismatches\n", a.compare.c_str(), mismatches.size());
    for (std::size_t k = 0; k < mismatches.size() && k < 10; ++k) {
      std::printf("  %s expected %.17g got %.17g\n", mismatches[k].label.c_str(),
                  mismatches[k].expected, mismatches[k].actual);
    }
    ok = ok && mismatches.empty();
  }
  return ok ? 0 : 1;
}

struct PlotArgs {
  std::string input;
  std::string kind = "k-curve";
  std::string out;
  double r_max = 20.0;
};

int run_plot(const PlotArgs& a) {
  if (a.kind == "k-curve") {
    std::optional<double> marker;
    if (!a.input.empty()) {
      const json report = load_json_file(a.input);
      if (report.contains("zero") && report["zero"].is_object()) {
        marker = report["zero"]["polar"]["r"].get<double>();
      }
    }
    write_text(a.out, plot_k_curve(a.r_max, 400, marker));
    return 0;
  }
  if (a.input.empty()) throw Error("plot --kind orbit needs a trajectory CSV input");
  std::ifstream in(a.input);
  if (!in) throw Error("cannot open '" + a.input + "'");
  const Trajectory traj = read_trajectory_csv(in);
  write_text(a.out, plot_orbit(traj));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Averaged functions, zeros and limit cycles of piecewise-linear control systems"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  AnalyzeArgs aa;
  auto* analyze_cmd = app.add_subcommand("analyze", "Classify, find the averaged zero, verify cycles");
  analyze_cmd->add_option("spec", aa.spec, "System spec (JSON)")->required();
  analyze_cmd->add_option("--out", aa.out, "Report path (default stdout)");
  auto* eps_opt = analyze_cmd->add_option("--epsilons", aa.epsilons, "Comma-separated epsilons")
                      ->delimiter(',');
  analyze_cmd->add_option("--region", aa.region, "Averaged region")
      ->check(CLI::IsMember({"inner", "outer"}));
  analyze_cmd->add_option("--trajectory", aa.trajectory, "Write one converged cycle as CSV");
  analyze_cmd->add_option("--trajectory-epsilon", aa.trajectory_epsilon,
                          "Epsilon of the cycle to export (default: first converged)");

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Closed forms against quadrature");
  oracle_cmd->add_option("--j", oa.blocks, "Block indices")->delimiter(',');
  oracle_cmd->add_option("--r", oa.radii, "Radii")->delimiter(',');
  oracle_cmd->add_option("--nonlinearity", oa.nonlinearities, "saturation,sign")
      ->delimiter(',')
      ->check(CLI::IsMember({"saturation", "sign"}));
  oracle_cmd->add_option("--family", oa.families, "odd,consecutive")
      ->delimiter(',')
      ->check(CLI::IsMember({"odd", "consecutive"}));
  oracle_cmd->add_option("--tol", oa.tol, "Max allowed |closed form - quadrature|");
  oracle_cmd->add_option("--write", oa.write, "Write the fixture file");
  oracle_cmd->add_option("--compare", oa.compare, "Diff against a fixture file");
  oracle_cmd->add_option("--fixture-tol", oa.fixture_tol, "Tolerance for --compare");

  PlotArgs pa;
  auto* plot_cmd = app.add_subcommand("plot", "SVG of K(r) or of a trajectory");
  plot_cmd->add_option("input", pa.input, "Report JSON (k-curve) or trajectory CSV (orbit)");
  plot_cmd->add_option("--kind", pa.kind, "k-curve | orbit")
      ->check(CLI::IsMember({"k-curve", "orbit"}));
  plot_cmd->add_option("--out", pa.out, "SVG path")->required();
  plot_cmd->add_option("--r-max", pa.r_max, "Right end of the K(r) range");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFailure;
  }
  aa.epsilons_given = eps_opt->count() > 0;

  try {
    if (*analyze_cmd) return run_analyze(aa);
    if (*oracle_cmd) return run_oracle_check(oa);
    if (*plot_cmd) return run_plot(pa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
