#pragma once

// Independent numerical evaluation of the averaged integrals.
//
// Everything here works from the pointwise polar-form integrands H_k and the
// defining integrals, never from the closed forms in averaging.hpp, so the two
// can be checked against each other.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "plcycles/averaging.hpp"
#include "plcycles/errors.hpp"
#include "plcycles/model.hpp"

namespace plcycles {

struct QuadratureConfig {
  enum class Rule { CompositeSimpson, GaussLegendre };

  bool breakpoint_split = true;
  int panels = 256;  ///< panels per smooth piece (starting count)
  Rule rule = Rule::CompositeSimpson;
  double abs_tol = 1e-10;
  int max_refinements = 8;  ///< panel doublings allowed while the estimate exceeds abs_tol

  void validate() const {
    if (panels < 4) throw DomainError("QuadratureConfig: panels must be >= 4");
    if (!(abs_tol > 0.0)) throw DomainError("QuadratureConfig: abs_tol must be > 0");
    if (max_refinements < 0) throw DomainError("QuadratureConfig: max_refinements must be >= 0");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int panels = 0;  ///< panels per piece actually used
};

/// Which linear piece of the nonlinearity an integrand is evaluated on.
/// Saturation: -1 (clipped low), 0 (linear), +1 (clipped high). Sign: -1, +1.
/// kNaturalBranch picks the piece from the argument itself.
inline constexpr int kNaturalBranch = 2;

inline int nonlinearity_branch(Nonlinearity nl, double u) {
  if (nl == Nonlinearity::Saturation) return u < -1.0 ? -1 : (u > 1.0 ? 1 : 0);
  return u < 0.0 ? -1 : (u > 0.0 ? 1 : 0);
}

inline double nonlinearity_on_branch(Nonlinearity nl, int branch, double u) {
  if (branch == kNaturalBranch) return apply_nonlinearity(nl, u);
  if (nl == Nonlinearity::Saturation && branch == 0) return u;
  return static_cast<double>(branch);
}

/// Angles in [start, start + 2 pi) where nl(r cos t) has a kink or jump.
inline std::vector<double> kink_angles(Nonlinearity nl, double r, double start = 0.0) {
  std::vector<double> base;
  if (nl == Nonlinearity::Sign) {
    base = {0.5 * kPi, 1.5 * kPi};
  } else if (r > 1.0) {
    const double tc = std::acos(1.0 / r);
    base = {tc, kPi - tc, kPi + tc, kTwoPi - tc};
  }
  std::vector<double> out;
  for (double a : base) {
    double shifted = start + wrap_angle(a - start);
    if (shifted > start && shifted < start + kTwoPi) out.push_back(shifted);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

using BranchIntegrand = std::function<double(double theta, int branch)>;

inline double simpson(const BranchIntegrand& f, int branch, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = f(a, branch) + f(b, branch);
  for (int i = 0; i < panels; ++i) sum += 4.0 * f(a + (i + 0.5) * h, branch);
  for (int i = 1; i < panels; ++i) sum += 2.0 * f(a + i * h, branch);
  return sum * h / 6.0;
}

inline double gauss_panels(const BranchIntegrand& f, int branch, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = 0.0;
  auto g = [&](double t) { return f(t, branch); };
  for (int i = 0; i < panels; ++i) {
    sum += boost::math::quadrature::gauss<double, 10>::integrate(g, a + i * h, a + (i + 1) * h);
  }
  return sum;
}

struct Piece {
  double a;
  double b;
  int branch;
};

inline std::vector<Piece> split_period(Nonlinearity nl, double r, double start, bool split) {
  if (!split) return {{start, start + kTwoPi, kNaturalBranch}};
  std::vector<double> edges{start};
  for (double k : kink_angles(nl, r, start)) edges.push_back(k);
  edges.push_back(start + kTwoPi);
  std::vector<Piece> pieces;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    pieces.push_back({edges[i], edges[i + 1], nonlinearity_branch(nl, r * std::cos(mid))});
  }
  return pieces;
}

}  // namespace detail

/// Integrates f over one period [start, start + 2 pi], split at the kinks of nl(r cos t).
/// Doubles the panel count until the error estimate meets cfg.abs_tol or refinements run out;
/// never throws on tolerance, the caller inspects error_estimate.
inline QuadratureResult integrate_period(const detail::BranchIntegrand& f, Nonlinearity nl,
                                         double r, const QuadratureConfig& cfg,
                                         double start = 0.0) {
  cfg.validate();
  const auto pieces = detail::split_period(nl, r, start, cfg.breakpoint_split);
  const bool simpson = cfg.rule == QuadratureConfig::Rule::CompositeSimpson;
  auto rule = [&](const detail::Piece& p, int m) {
    return simpson ? detail::simpson(f, p.branch, p.a, p.b, m)
                   : detail::gauss_panels(f, p.branch, p.a, p.b, m);
  };

  QuadratureResult result;
  for (int k = 0; k <= cfg.max_refinements; ++k) {
    const int m = cfg.panels << k;
    double value = 0.0;
    double estimate = 0.0;
    for (const auto& p : pieces) {
      const double fine = rule(p, m);
      const double coarse = rule(p, m / 2);
      value += fine;
      // Richardson estimate for Simpson (order 4); plain difference for Gauss.
      estimate += simpson ? std::abs(fine - coarse) / 15.0 : std::abs(fine - coarse);
    }
    result = {value, estimate, m};
    if (estimate <= cfg.abs_tol) break;
  }
  return result;
}

namespace detail {

inline int frequency_of_component_block(int component) {
  // component 1 -> block 1; 2(j-1) and 2j-1 -> block j
  return component == 1 ? 1 : (component % 2 == 0 ? component / 2 + 1 : (component + 1) / 2);
}

// H_component at fast angle t with nl evaluated on the given branch.
inline double integrand_on_branch(const ControlSystem& s, const PolarPoint& z, double t,
                                  int component, int branch) {
  const int n = s.n();
  std::vector<double> rho(n + 1), phase(n + 1);
  for (int l = 1; l <= n; ++l) {
    rho[l] = z.radius(l);
    phase[l] = s.frequency(l) * t + (l == 1 ? 0.0 : z.theta(l));
  }
  // F_{i,l} = a_{i,2l-1} cos(phase_l) + a_{i,2l} sin(phase_l)
  auto F = [&](int i, int l) {
    return s.a(i, 2 * l - 1) * std::cos(phase[l]) + s.a(i, 2 * l) * std::sin(phase[l]);
  };
  const double r = z.r();
  const double nl = nonlinearity_on_branch(s.nonlinearity(), branch, r * std::cos(t));
  const double ct = std::cos(t);
  const double st = std::sin(t);

  if (component == 1) {
    double sum = 0.0;
    for (int l = 1; l <= n; ++l) sum += rho[l] * (F(1, l) * ct + F(2, l) * st);
    return sum + nl * (s.b(1) * ct + s.b(2) * st);
  }
  const int j = frequency_of_component_block(component);
  const int p = 2 * j - 1;
  const int q = 2 * j;
  const double cj = std::cos(phase[j]);
  const double sj = std::sin(phase[j]);
  if (component % 2 == 0) {
    double sum = 0.0;
    for (int l = 1; l <= n; ++l) sum += rho[l] * (F(p, l) * cj + F(q, l) * sj);
    return sum + nl * (s.b(p) * cj + s.b(q) * sj);
  }
  const double wj = s.frequency(j);
  const double rj = rho[j];
  double sum = 0.0;
  for (int l = 1; l <= n; ++l) {
    sum += rho[l] / rj * (F(q, l) * cj - F(p, l) * sj);
    sum += wj * rho[l] / r * (F(1, l) * st - F(2, l) * ct);
  }
  sum += nl * (s.b(q) * cj - s.b(p) * sj) / rj;
  sum -= wj * nl * (s.b(2) * ct - s.b(1) * st) / r;
  return sum;
}

inline void check_component(const ControlSystem& s, int component) {
  if (component < 1 || component > 2 * s.n() - 1) {
    throw DomainError("component " + std::to_string(component) + " outside 1.." +
                      std::to_string(2 * s.n() - 1));
  }
}

}  // namespace detail

/// Pointwise polar-form integrand H_component(t; z) (1-based component).
inline double integrand_h(const ControlSystem& s, const PolarPoint& z, double theta,
                          int component) {
  check_point(s, z);
  detail::check_component(s, component);
  return detail::integrand_on_branch(s, z, theta, component, kNaturalBranch);
}

inline QuadratureResult averaged_component_quadrature(const ControlSystem& s,
                                                      const PolarPoint& z, int component,
                                                      const QuadratureConfig& cfg = {},
                                                      double start = 0.0) {
  check_point(s, z);
  detail::check_component(s, component);
  auto f = [&](double t, int branch) {
    return detail::integrand_on_branch(s, z, t, component, branch);
  };
  return integrate_period(f, s.nonlinearity(), z.r(), cfg, start);
}

/// int_0^{2pi} H_component dt; throws ToleranceNotMet when the estimate exceeds cfg.abs_tol.
inline double averaged_component_numeric(const ControlSystem& s, const PolarPoint& z,
                                         int component, const QuadratureConfig& cfg = {}) {
  const auto res = averaged_component_quadrature(s, z, component, cfg);
  if (res.error_estimate > cfg.abs_tol) {
    throw ToleranceNotMet("averaged_component_numeric: component " + std::to_string(component) +
                              " error estimate " + std::to_string(res.error_estimate) +
                              " exceeds abs_tol",
                          res.value, res.error_estimate);
  }
  return res.value;
}

inline AveragedValue averaged_function_numeric(const ControlSystem& s, const PolarPoint& z,
                                               const QuadratureConfig& cfg = {}) {
  check_point(s, z);
  Vector h(2 * s.n() - 1);
  for (int c = 1; c <= 2 * s.n() - 1; ++c) h(c - 1) = averaged_component_numeric(s, z, c, cfg);
  return {h};
}

enum class Trig { Cos, Sin };

/// int_0^{2pi} nl(r cos t) trig(w t) dt for an explicit harmonic w.
inline QuadratureResult harmonic_integral_quadrature(Nonlinearity nl, int w, double r, Trig which,
                                                     const QuadratureConfig& cfg = {},
                                                     double start = 0.0) {
  if (!(r > 0.0)) throw DomainError("harmonic integral: r must be > 0, got " + std::to_string(r));
  auto f = [&](double t, int branch) {
    const double v = nonlinearity_on_branch(nl, branch, r * std::cos(t));
    return v * (which == Trig::Cos ? std::cos(w * t) : std::sin(w * t));
  };
  return integrate_period(f, nl, r, cfg, start);
}

/// Numerical I_j (Cos) or J_j (Sin) for block j of system s.
inline double integral_numeric(int j, double r, const ControlSystem& s,
                               const QuadratureConfig& cfg = {}, Trig which = Trig::Cos) {
  detail::check_block_index(j, s, "integral_numeric");
  const auto res = harmonic_integral_quadrature(s.nonlinearity(), s.frequency(j), r, which, cfg);
  if (res.error_estimate > cfg.abs_tol) {
    throw ToleranceNotMet("integral_numeric: error estimate " +
                              std::to_string(res.error_estimate) + " exceeds abs_tol",
                          res.value, res.error_estimate);
  }
  return res.value;
}

}  // namespace plcycles
