#pragma once

// Zeros of the averaged function: the radial equation h_1 = 0 first, then one
// independent 2x2 problem per slow block, then Newton polishing and the
// Jacobian test for a simple zero (Brouwer degree +-1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "plcycles/averaging.hpp"
#include "plcycles/errors.hpp"
#include "plcycles/model.hpp"

namespace plcycles {

/// Upper limit of the radial search.
inline constexpr double kRadialSearchLimit = 1e6;
/// |det J| must exceed this times the product of the row norms of J for a simple zero.
inline constexpr double kDegeneracyTolerance = 1e-8;

/// Linear data of the block-j equations once r0 is fixed:
///   A r + B u + C v = 0,  D r + C u - B v = 0,  u^2 + v^2 = 1.
struct BlockCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

inline BlockCoefficients block_coefficients(int j, double r0, const ControlSystem& s) {
  const int p = 2 * j - 1;
  const int q = 2 * j;
  const double wj = s.frequency(j);
  const double ij = i_integral(j, r0, s);
  const double i1 = i_integral(1, r0, s);
  BlockCoefficients k;
  k.a = (s.a(p, p) + s.a(q, q)) * kPi;
  k.b = s.b(p) * ij;
  k.c = s.b(q) * ij;
  k.d = (s.a(q, p) - s.a(p, q) + wj * (s.a(1, 2) - s.a(2, 1))) * kPi - wj * s.b(2) * i1 / r0;
  return k;
}

struct BlockSolution {
  double radius = 0.0;
  double theta = 0.0;
  double u = 0.0;  ///< cos theta as produced by the linear solve
  double v = 0.0;  ///< sin theta as produced by the linear solve
  BlockCoefficients coefficients;
};

/// Per-block line of the cascade diagnostics; block 1 records the radial solve.
struct CascadeEntry {
  int block = 1;
  bool exists = false;
  double radius = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN();
  double u = std::numeric_limits<double>::quiet_NaN();
  double v = std::numeric_limits<double>::quiet_NaN();
  std::string message;
};

struct ZeroReport {
  DegeneracyVerdict verdict;
  std::optional<PolarPoint> zero;
  std::optional<double> jacobian_det;
  std::optional<int> degree;
  bool numerically_degenerate = false;
  std::vector<CascadeEntry> cascade_log;
  double newton_residual = std::numeric_limits<double>::quiet_NaN();
};

/// Unique r0 > 1 (saturation) or r0 > 0 (sign) with h_1(r0) = 0, if any.
inline std::optional<double> solve_radial(const ControlSystem& s) {
  if (classify(s, Region::Outer).kind != DegeneracyVerdict::Kind::Regular) {
    throw PreconditionError("solve_radial: system is not Regular in the outer region");
  }
  const double c = s.a(1, 1) + s.a(2, 2);
  const double b1 = s.b(1);
  if (c == 0.0 || b1 == 0.0) return std::nullopt;

  if (s.nonlinearity() == Nonlinearity::Sign) {
    const double r0 = -b1 * harmonic_integral(Nonlinearity::Sign, 1, 1.0) / (c * kPi);
    if (r0 > 0.0 && std::isfinite(r0)) return r0;
    return std::nullopt;
  }

  // h_1(r)/r = c pi + b1 K(r)/r, and K(r)/r falls monotonically from pi to 0 on
  // (1, inf), so a root exists iff c and c + b1 have opposite signs.
  if (b1 * c >= 0.0 || c * (c + b1) >= 0.0) return std::nullopt;
  auto h1 = [&](double r) { return c * kPi * r + b1 * big_k(r); };
  // K < 4 bounds the root: r0 = -b1 K(r0) / (c pi) < 4 |b1| / (pi |c|).
  const double bound = 4.0 * std::abs(b1) / (kPi * std::abs(c));
  const double hi = std::min(kRadialSearchLimit, std::max(bound * (1.0 + 1e-9), 1.0 + 1e-12));
  const double lo = 1.0;
  const double f_lo = h1(lo);
  const double f_hi = h1(hi);
  if (f_lo == 0.0) return std::nullopt;  // root sits on the seam r = 1
  if (f_lo * f_hi > 0.0) {
    throw NoProgress("solve_radial: no sign change of h_1 on (1, " + std::to_string(hi) +
                     "] although the K-range argument requires a root");
  }
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      h1, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
  double r = 0.5 * (a + b);
  // Newton touch-up with the analytic K'.
  for (int it = 0; it < 3; ++it) {
    const double f = h1(r);
    const double df = c * kPi + b1 * big_k_derivative(r);
    if (df == 0.0 || f == 0.0) break;
    const double next = r - f / df;
    if (!(next > 1.0) || std::abs(h1(next)) >= std::abs(f)) break;
    r = next;
  }
  if (!(r > 1.0)) return std::nullopt;
  return r;
}

/// Unique (r_{j-1} > 0, theta_{j-1}) solving the block-j pair at fixed r0, if any.
inline std::optional<BlockSolution> solve_block(int j, double r0, const ControlSystem& s) {
  if (j < 2 || j > s.n()) {
    throw DomainError("solve_block: j = " + std::to_string(j) + " outside 2.." +
                      std::to_string(s.n()));
  }
  if (!(r0 > 0.0)) throw DomainError("solve_block: r0 must be > 0");
  if (i_integral(j, r0, s) == 0.0) {
    throw DegenerateBlock("solve_block: I_" + std::to_string(j) + "(r0) = 0, theta_" +
                              std::to_string(j - 1) + " drops out of h",
                          j);
  }
  const auto k = block_coefficients(j, r0, s);
  const double bc = k.b * k.b + k.c * k.c;
  const double ad = k.a * k.a + k.d * k.d;
  if (bc == 0.0 || ad == 0.0) return std::nullopt;
  BlockSolution sol;
  sol.coefficients = k;
  sol.radius = std::sqrt(bc / ad);
  sol.u = -(k.a * k.b + k.c * k.d) * sol.radius / bc;
  sol.v = (k.b * k.d - k.a * k.c) * sol.radius / bc;
  sol.theta = wrap_angle(std::atan2(sol.v, sol.u));
  if (!(sol.radius > 0.0) || !std::isfinite(sol.radius)) return std::nullopt;
  return sol;
}

namespace detail {

inline double jacobian_step(double coordinate) { return 1e-6 * std::max(1.0, std::abs(coordinate)); }

inline Vector averaged_at(const ControlSystem& s, const Vector& z) {
  return averaged_function(s, PolarPoint::from_coordinates(z)).components;
}

}  // namespace detail

/// Central-difference Jacobian of h at z, columns ordered (r, theta_1, r_1, ...).
inline Matrix jacobian(const ControlSystem& s, const PolarPoint& z) {
  check_point(s, z);
  const Vector z0 = z.coordinates();
  const Eigen::Index m = z0.size();
  if (s.nonlinearity() == Nonlinearity::Saturation) {
    const double d = detail::jacobian_step(z0(0));
    if (z0(0) - d <= 1.0 && z0(0) + d >= 1.0) {
      throw SeamError("jacobian: difference stencil at r = " + std::to_string(z0(0)) +
                      " straddles the r = 1 seam");
    }
  }
  Matrix jac(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    auto central = [&](double step) {
      Vector plus = z0;
      Vector minus = z0;
      plus(k) += step;
      minus(k) -= step;
      return Vector((detail::averaged_at(s, plus) - detail::averaged_at(s, minus)) / (2.0 * step));
    };
    double step = detail::jacobian_step(z0(k));
    Vector coarse = central(step);
    Vector fine = central(0.5 * step);
    // Refine toward larger steps if roundoff makes the two disagree.
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double scale = std::max(1.0, fine.cwiseAbs().maxCoeff());
      if ((fine - coarse).cwiseAbs().maxCoeff() <= 1e-6 * scale) break;
      step *= 4.0;
      if (k == 0 && s.nonlinearity() == Nonlinearity::Saturation &&
          (z0(0) - step <= 1.0 && z0(0) + step >= 1.0)) {
        break;
      }
      coarse = central(step);
      fine = central(0.5 * step);
    }
    jac.col(k) = fine;
  }
  return jac;
}

/// Product of the Euclidean row norms; bounds |det| from above (Hadamard).
inline double jacobian_scale(const Matrix& jac) {
  double scale = 1.0;
  for (Eigen::Index i = 0; i < jac.rows(); ++i) scale *= jac.row(i).norm();
  return scale;
}

inline bool is_numerically_degenerate(const Matrix& jac, double det) {
  const double scale = jacobian_scale(jac);
  return scale == 0.0 || !(std::abs(det) > kDegeneracyTolerance * scale);
}

struct NewtonOptions {
  int max_iterations = 25;
  double tolerance = 1e-12;
  /// Iterates must keep r strictly above this (0 for the whole domain, 1 for the
  /// saturation outer region).
  double r_floor = 0.0;
};

struct NewtonResult {
  PolarPoint point;
  double residual = 0.0;
  int iterations = 0;
};

/// Damped Newton on h; halves steps that leave the domain or fail to reduce |h|.
inline NewtonResult newton_polish(const ControlSystem& s, const PolarPoint& start,
                                  const NewtonOptions& opt = {}) {
  check_point(s, start);
  auto in_domain = [&](const Vector& z) {
    if (!(z(0) > opt.r_floor) || !z.allFinite()) return false;
    for (Eigen::Index k = 2; k < z.size(); k += 2) {
      if (!(z(k) > 0.0)) return false;
    }
    return true;
  };
  Vector z = start.coordinates();
  Vector h = detail::averaged_at(s, z);
  double res = h.cwiseAbs().maxCoeff();
  for (int it = 0; it <= opt.max_iterations; ++it) {
    if (res < opt.tolerance) return {PolarPoint::from_coordinates(z), res, it};
    if (it == opt.max_iterations) break;
    Matrix jac;
    try {
      jac = jacobian(s, PolarPoint::from_coordinates(z));
    } catch (const SeamError&) {
      throw NoConvergence("newton_polish: iterate reached the r = 1 seam", z, res);
    }
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) throw NoConvergence("newton_polish: singular Jacobian", z, res);
    const Vector step = lu.solve(-h);
    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
      const Vector trial = z + lambda * step;
      if (!in_domain(trial)) continue;
      const Vector ht = detail::averaged_at(s, trial);
      const double rt = ht.cwiseAbs().maxCoeff();
      if (rt < res || (lambda == 1.0 && rt <= res)) {
        const bool stalled = (trial - z).cwiseAbs().maxCoeff() <=
                             4.0 * std::numeric_limits<double>::epsilon() *
                                 std::max(1.0, z.cwiseAbs().maxCoeff());
        z = trial;
        h = ht;
        res = rt;
        accepted = true;
        if (stalled && res < 1e-10) return {PolarPoint::from_coordinates(z), res, it + 1};
        break;
      }
    }
    if (!accepted) {
      // Roundoff floor: no further decrease is possible near a zero.
      if (res < 1e-10) return {PolarPoint::from_coordinates(z), res, it};
      throw NoConvergence("newton_polish: no step reduced |h|", z, res);
    }
  }
  throw NoConvergence("newton_polish: iteration limit reached with |h| = " + std::to_string(res),
                      z, res);
}

/// Distance in the averaged space with angles compared on the circle.
inline double polar_distance(const PolarPoint& a, const PolarPoint& b) {
  if (a.n() != b.n()) throw DomainError("polar_distance: dimension mismatch");
  const Vector za = a.coordinates();
  const Vector zb = b.coordinates();
  double sq = 0.0;
  for (Eigen::Index k = 0; k < za.size(); ++k) {
    double d = za(k) - zb(k);
    if (k % 2 == 1) {
      d = std::abs(wrap_angle(d));
      d = std::min(d, kTwoPi - d);
    }
    sq += d * d;
  }
  return std::sqrt(sq);
}

/// Runs Newton from each seed and returns every converged zero.
inline std::vector<PolarPoint> newton_multistart(const ControlSystem& s,
                                                 const std::vector<PolarPoint>& seeds,
                                                 const NewtonOptions& opt = {}) {
  std::vector<PolarPoint> found;
  for (const auto& seed : seeds) {
    try {
      found.push_back(newton_polish(s, seed, opt).point);
    } catch (const NoConvergence&) {
    } catch (const DomainError&) {
    }
  }
  return found;
}

/// Classify, solve the cascade, polish and test the Jacobian. Never throws on degenerate input.
inline ZeroReport assemble_zero(const ControlSystem& s, Region region = Region::Outer) {
  ZeroReport report;
  report.verdict = classify(s, region);
  if (report.verdict.kind != DegeneracyVerdict::Kind::Regular) return report;

  CascadeEntry radial;
  radial.block = 1;
  std::optional<double> r0;
  try {
    r0 = solve_radial(s);
  } catch (const Error& e) {
    radial.message = e.what();
  }
  if (!r0) {
    if (radial.message.empty()) {
      const double c = s.a(1, 1) + s.a(2, 2);
      radial.message = s.nonlinearity() == Nonlinearity::Saturation
                           ? "h_1 has no root with r > 1 (requires b1 (a11 + a22) < 0 and "
                             "|b1| > |a11 + a22|); b1 (a11 + a22) = " +
                                 std::to_string(s.b(1) * c)
                           : "h_1 = (a11 + a22) pi r + 4 b1 has no positive root";
    }
    report.cascade_log.push_back(radial);
    return report;
  }
  radial.exists = true;
  radial.radius = *r0;
  radial.message = "r0 solves h_1 = 0";
  report.cascade_log.push_back(radial);

  std::vector<BlockPolar> blocks;
  bool complete = true;
  for (int j = 2; j <= s.n(); ++j) {
    CascadeEntry entry;
    entry.block = j;
    try {
      const auto sol = solve_block(j, *r0, s);
      if (sol) {
        entry.exists = true;
        entry.radius = sol->radius;
        entry.theta = sol->theta;
        entry.u = sol->u;
        entry.v = sol->v;
        entry.message = "unique positive radius";
        blocks.push_back({sol->theta, sol->radius});
      } else {
        entry.message = "no positive radius: B^2 + C^2 = 0 or A^2 + D^2 = 0";
        complete = false;
      }
    } catch (const Error& e) {
      entry.message = e.what();
      complete = false;
    }
    report.cascade_log.push_back(entry);
  }
  if (!complete) return report;

  PolarPoint candidate(*r0, blocks);
  NewtonOptions polish;
  if (s.nonlinearity() == Nonlinearity::Saturation) polish.r_floor = 1.0;
  try {
    const auto polished = newton_polish(s, candidate, polish);
    candidate = polished.point;
    report.newton_residual = polished.residual;
  } catch (const NoConvergence& e) {
    report.newton_residual = averaged_function(s, candidate).max_abs();
    report.cascade_log.push_back({0, false, {}, {}, {}, {}, e.what()});
  }
  report.zero = candidate;
  try {
    const Matrix jac = jacobian(s, candidate);
    const double det = jac.determinant();
    report.jacobian_det = det;
    report.numerically_degenerate = is_numerically_degenerate(jac, det);
    if (!report.numerically_degenerate) report.degree = det > 0.0 ? 1 : -1;
  } catch (const SeamError& e) {
    report.numerically_degenerate = true;
    report.cascade_log.push_back({0, false, {}, {}, {}, {}, e.what()});
  }
  return report;
}

}  // namespace plcycles
