#pragma once

// Direct integration of the full perturbed system.
//
// The right-hand side is linear on each piece of the nonlinearity, so the
// integrator runs with the piece ("mode") frozen and stops exactly where the
// trajectory leaves it: |x1| = 1 for saturation, x1 = 0 for the sign switch.
// Step acceptance, error control and dense output come from Boost.Odeint's
// Dormand-Prince 5(4) stepper; crossings are located on the dense output and
// then refined with genuine Runge-Kutta sub-steps from the last accepted state.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "plcycles/averaging.hpp"
#include "plcycles/errors.hpp"
#include "plcycles/model.hpp"

namespace plcycles {

enum class Surface { SaturationUpper, SaturationLower, SignSwitch, Section };

inline std::string_view to_string(Surface s) {
  switch (s) {
    case Surface::SaturationUpper: return "x1=+1";
    case Surface::SaturationLower: return "x1=-1";
    case Surface::SignSwitch: return "x1=0";
    case Surface::Section: return "section";
  }
  return "?";
}

struct TrajectoryEvent {
  double t = 0.0;
  Surface surface = Surface::SignSwitch;
  int direction = 0;  ///< sign of dx1/dt (dx2/dt for the section) after the event
  CartesianState x;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<CartesianState> states;
  std::vector<TrajectoryEvent> events;
  bool sliding = false;  ///< stopped at a non-crossing point of x1 = 0

  bool empty() const { return times.empty(); }
  const CartesianState& back() const { return states.back(); }
};

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double event_tol = 1e-12;   ///< |g| at located events
  double max_step = 0.05;     ///< cap on the accepted step
  int samples_per_step = 8;   ///< dense-output probes per step for sign changes
};

namespace detail {

using OdeState = std::vector<double>;

inline OdeState to_ode(const CartesianState& x) { return OdeState(x.data(), x.data() + x.size()); }

inline CartesianState from_ode(const OdeState& x) {
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

// Piecewise-linear flow with the nonlinearity piece frozen.
class ModalSystem {
 public:
  explicit ModalSystem(const ControlSystem& s)
      : nl_(s.nonlinearity()),
        linear_(s.unperturbed() + s.epsilon() * s.perturbation()),
        forcing_(s.epsilon() * s.forcing()) {}

  /// Mode: saturation -1 / 0 / +1 (clipped low, linear, clipped high); sign -1 / +1.
  int mode() const { return mode_; }
  void set_mode(int m) { mode_ = m; }
  Nonlinearity nonlinearity() const { return nl_; }

  void operator()(const OdeState& x, OdeState& dxdt, double /*t*/) const {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::Map<const Vector> xv(x.data(), n);
    Eigen::Map<Vector> dv(dxdt.data(), n);
    dv.noalias() = linear_ * xv;
    dv += nonlinear_value(xv(0)) * forcing_;
  }

  double nonlinear_value(double x1) const {
    if (nl_ == Nonlinearity::Saturation && mode_ == 0) return x1;
    return static_cast<double>(mode_);
  }

  /// Positive while the state stays on the current piece.
  double inside(const Vector& x) const {
    const double u = x(0);
    if (nl_ == Nonlinearity::Sign) return mode_ * u;
    if (mode_ == 0) return 1.0 - u * u;
    return mode_ > 0 ? u - 1.0 : -u - 1.0;
  }

  /// dx1/dt with the nonlinearity fixed at value v.
  double x1_rate(const Vector& x, double v) const {
    return linear_.row(0).dot(x) + v * forcing_(0);
  }

 private:
  Nonlinearity nl_;
  Matrix linear_;
  Vector forcing_;
  int mode_ = 0;
};

// One-sided x1-rates of the sign system at x (psi = +1 and psi = -1).
inline std::pair<double, double> sign_side_rates(const ModalSystem& sys, const Vector& x) {
  return {sys.x1_rate(x, 1.0), sys.x1_rate(x, -1.0)};
}

}  // namespace detail

/// True when both one-sided fields push x1 the same way across x1 = 0.
inline bool is_crossing_point(const ControlSystem& s, const CartesianState& x) {
  detail::ModalSystem sys(s);
  const auto [plus, minus] = detail::sign_side_rates(sys, x);
  return plus * minus > 0.0;
}

namespace detail {

inline int initial_mode(const ModalSystem& sys, const Vector& x) {
  const double u = x(0);
  if (sys.nonlinearity() == Nonlinearity::Saturation) {
    if (u > 1.0) return 1;
    if (u < -1.0) return -1;
    if (std::abs(u) < 1.0) return 0;
    const double rate = sys.x1_rate(x, u);  // both pieces agree on the boundary
    if (u > 0.0) return rate > 0.0 ? 1 : 0;
    return rate < 0.0 ? -1 : 0;
  }
  if (u > 0.0) return 1;
  if (u < 0.0) return -1;
  const auto [plus, minus] = sign_side_rates(sys, x);
  if (plus > 0.0 && minus > 0.0) return 1;
  if (plus < 0.0 && minus < 0.0) return -1;
  return 0;  // sliding
}

class SwitchedIntegrator {
 public:
  using Stepper = boost::numeric::odeint::runge_kutta_dopri5<OdeState>;

  SwitchedIntegrator(const ControlSystem& s, const IntegratorOptions& opt)
      : sys_(s), opt_(opt) {}

  struct Outcome {
    Trajectory trajectory;
    bool hit_section = false;
  };

  /// Integrates from (x0, t0) to t_end, or to the first upward crossing of the
  /// section x2 = 0 with x1 > 0 after t0 + min_return when stop_at_section is set.
  Outcome run(const CartesianState& x0, double t0, double t_end, bool stop_at_section,
              double min_return = 0.5 * kPi) {
    Outcome out;
    auto& traj = out.trajectory;
    traj.times.push_back(t0);
    traj.states.push_back(x0);

    const int mode0 = initial_mode(sys_, x0);
    if (sys_.nonlinearity() == Nonlinearity::Sign && mode0 == 0) {
      traj.sliding = true;
      traj.events.push_back({t0, Surface::SignSwitch, 0, x0});
      return out;
    }
    sys_.set_mode(mode0);

    auto dense = boost::numeric::odeint::make_dense_output(opt_.abs_tol, opt_.rel_tol,
                                                           opt_.max_step, Stepper());
    double dt = std::min(opt_.max_step, 1e-3);
    dense.initialize(to_ode(x0), t0, dt);

    const int probes = std::max(2, opt_.samples_per_step);
    while (true) {
      const auto [ta, tb] = dense.do_step(std::ref(sys_));
      const CartesianState xa = from_ode(dense.previous_state());
      const double t_hi = std::min(tb, t_end);

      // Probe the dense output for the first interval where something happens.
      OdeState probe(xa.size());
      double prev_t = ta;
      CartesianState prev_x = xa;
      std::optional<std::pair<double, double>> bracket;
      bool is_switch = false;
      for (int k = 1; k <= probes; ++k) {
        const double tk = ta + (t_hi - ta) * static_cast<double>(k) / probes;
        dense.calc_state(tk, probe);
        const CartesianState xk = from_ode(probe);
        const bool left = sys_.inside(prev_x) > 0.0 && sys_.inside(xk) <= 0.0;
        const bool section = stop_at_section && prev_x(1) < 0.0 && xk(1) >= 0.0 &&
                             xk(0) > 0.0 && tk > t0 + min_return;
        if (left || section) {
          bracket = {prev_t, tk};
          is_switch = left;
          if (left && section) {
            // Both in one probe interval: take whichever the dense output says comes first.
            const double ts = locate_dense(dense, prev_t, tk, [](const Vector& x) { return x(1); });
            const double tw = locate_dense(dense, prev_t, tk,
                                           [&](const Vector& x) { return sys_.inside(x); });
            is_switch = tw <= ts;
          }
          break;
        }
        prev_t = tk;
        prev_x = xk;
      }

      if (!bracket) {
        if (tb >= t_end) {
          traj.times.push_back(t_end);
          traj.states.push_back(tb == t_end ? from_ode(dense.current_state())
                                            : substep(xa, ta, t_end));
          return out;
        }
        traj.times.push_back(tb);
        traj.states.push_back(from_ode(dense.current_state()));
        continue;
      }

      // Refine the crossing with real sub-steps from the accepted state xa.
      auto g = is_switch ? std::function<double(const Vector&)>(
                               [this](const Vector& x) { return sys_.inside(x); })
                         : std::function<double(const Vector&)>(
                               [](const Vector& x) { return x(1); });
      const double t_event = locate_substep(xa, ta, bracket->first, bracket->second, g, dense);
      const CartesianState x_event = substep(xa, ta, t_event);
      traj.times.push_back(t_event);
      traj.states.push_back(x_event);

      if (!is_switch) {
        traj.events.push_back({t_event, Surface::Section, 1, x_event});
        out.hit_section = true;
        return out;
      }

      const int old_mode = sys_.mode();
      int new_mode = 0;
      Surface surface = Surface::SignSwitch;
      int direction = 0;
      if (sys_.nonlinearity() == Nonlinearity::Saturation) {
        const bool upper = x_event(0) > 0.0;
        surface = upper ? Surface::SaturationUpper : Surface::SaturationLower;
        new_mode = old_mode == 0 ? (upper ? 1 : -1) : 0;
        direction = (old_mode == 0) == upper ? 1 : -1;
      } else {
        const auto [plus, minus] = sign_side_rates(sys_, x_event);
        if (!(plus * minus > 0.0)) {
          traj.events.push_back({t_event, Surface::SignSwitch, 0, x_event});
          traj.sliding = true;
          return out;
        }
        new_mode = plus > 0.0 ? 1 : -1;
        direction = new_mode;
      }
      traj.events.push_back({t_event, surface, direction, x_event});
      if (t_event >= t_end) return out;
      sys_.set_mode(new_mode);
      dense.initialize(to_ode(x_event), t_event, std::max(dense.current_time_step(), 1e-6));
    }
  }

 private:
  template <class Dense, class G>
  double locate_dense(Dense& dense, double lo, double hi, G g) {
    OdeState probe;
    auto f = [&](double t) {
      dense.calc_state(t, probe);
      return g(from_ode(probe));
    };
    return solve_bracket(f, lo, hi);
  }

  template <class F>
  static double solve_bracket(F f, double lo, double hi) {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0 || flo * fhi > 0.0) return hi;
    std::uintmax_t iters = 100;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(53), iters);
    // Report the side that has crossed (g <= 0 for the inside function, >= 0 for the section).
    return std::abs(f(a)) < std::abs(f(b)) ? a : b;
  }

  template <class Dense>
  double locate_substep(const CartesianState& xa, double ta, double lo, double hi,
                        const std::function<double(const Vector&)>& g, Dense& dense) {
    auto f = [&](double t) { return g(substep(xa, ta, t)); };
    const double flo = f(lo);
    const double fhi = f(hi);
    double t = 0.0;
    if (flo * fhi <= 0.0) {
      t = solve_bracket(f, lo, hi);
    } else {
      // Grazing: the sub-steps disagree with the dense output about the sign change.
      t = locate_dense(dense, lo, hi, g);
    }
    return t;
  }

  CartesianState substep(const CartesianState& xa, double ta, double t) {
    if (t == ta) return xa;
    const OdeState in = to_ode(xa);
    OdeState dxdt_in(in.size()), out(in.size()), dxdt_out(in.size());
    sys_(in, dxdt_in, ta);
    Stepper rk;
    rk.do_step(std::ref(sys_), in, dxdt_in, ta, out, dxdt_out, t - ta);
    return from_ode(out);
  }

  ModalSystem sys_;
  IntegratorOptions opt_;
};

}  // namespace detail

/// Integrates the full system over [t0, t1], locating every switching event.
/// Sign systems stop early (trajectory.sliding = true) at a non-crossing point.
inline Trajectory integrate(const ControlSystem& s, const CartesianState& x0, double t0, double t1,
                            const IntegratorOptions& opt = {}) {
  check_state(s, x0);
  if (!(t1 > t0)) throw DomainError("integrate: empty time span");
  detail::SwitchedIntegrator integrator(s, opt);
  return integrator.run(x0, t0, t1, false).trajectory;
}

struct PoincareReturn {
  CartesianState x;
  double return_time = 0.0;
  Trajectory trajectory;
};

/// Latest return time searched by the Poincare map.
inline constexpr double kMaxReturnTime = 8.0 * kPi;

/// First return to the section x2 = 0, x1 > 0 (upward crossing).
inline PoincareReturn poincare_map(const ControlSystem& s, const CartesianState& x_sec,
                                   const IntegratorOptions& opt = {}) {
  check_state(s, x_sec);
  if (!(x_sec(0) > 0.0)) throw PreconditionError("poincare_map: section point needs x1 > 0");
  if (std::abs(x_sec(1)) > 1e-12 * std::max(1.0, x_sec.cwiseAbs().maxCoeff())) {
    throw PreconditionError("poincare_map: section point needs x2 = 0");
  }
  CartesianState start = x_sec;
  start(1) = 0.0;
  const double rate = vector_field(s, start)(1);
  if (!(rate > 1e-12 * std::max(1.0, start.norm()))) {
    throw TransversalityLost("poincare_map: dx2/dt = " + std::to_string(rate) +
                             " on the section");
  }
  detail::SwitchedIntegrator integrator(s, opt);
  auto outcome = integrator.run(start, 0.0, kMaxReturnTime, true);
  if (outcome.trajectory.sliding) {
    throw SlidingDetected("poincare_map: trajectory reached a non-crossing point of x1 = 0",
                          outcome.trajectory.times.back());
  }
  if (!outcome.hit_section) throw NoReturn("poincare_map: no return within 8 pi");
  PoincareReturn ret;
  ret.x = outcome.trajectory.back();
  ret.return_time = outcome.trajectory.times.back();
  ret.trajectory = std::move(outcome.trajectory);
  return ret;
}

/// Section coordinates (x1, x3, ..., x_2n) of a section state.
inline Vector section_coordinates(const CartesianState& x) {
  Vector y(x.size() - 1);
  y(0) = x(0);
  y.tail(x.size() - 2) = x.tail(x.size() - 2);
  return y;
}

inline CartesianState section_state(const Vector& y) {
  CartesianState x = CartesianState::Zero(y.size() + 1);
  x(0) = y(0);
  x.tail(y.size() - 1) = y.tail(y.size() - 1);
  return x;
}

struct LimitCycleOptions {
  IntegratorOptions integrator{1e-12, 1e-14, 1e-12, 0.05, 8};
  double residual_tol = 1e-9;
  double map_step = 1e-6;  ///< finite-difference step on the section
  int max_iterations = 40;
};

struct LimitCycleResult {
  double epsilon = 0.0;
  CartesianState fixed_point;
  double period = 0.0;
  double poincare_residual = 0.0;
  double distance_to_prediction = 0.0;
  std::optional<double> floquet_max_modulus;
  /// Smallest |lambda - 1| over the eigenvalues of the section-map Jacobian.
  std::optional<double> floquet_min_distance_to_one;
  std::vector<std::complex<double>> map_eigenvalues;
  bool crossing_ok = true;
  int iterations = 0;
  Trajectory cycle;  ///< one period from the fixed point
};

/// Every x1 = 0 event of the trajectory is a genuine crossing (re-checked from stored states).
inline bool audit_crossings(const ControlSystem& s, const Trajectory& traj) {
  if (traj.sliding) return false;
  for (const auto& e : traj.events) {
    if (e.surface == Surface::SignSwitch && !is_crossing_point(s, e.x)) return false;
  }
  return true;
}

/// Newton shooting on the Poincare displacement, seeded from an averaged zero.
inline LimitCycleResult find_limit_cycle(const ControlSystem& s, const PolarPoint& seed,
                                         const LimitCycleOptions& opt = {},
                                         std::optional<CartesianState> initial = std::nullopt) {
  if (s.epsilon() == 0.0) {
    throw PreconditionError(
        "find_limit_cycle: epsilon = 0 gives a continuum of periodic orbits, no isolated cycle");
  }
  check_point(s, seed);
  const CartesianState predicted = seed.section_state();
  Vector y = section_coordinates(initial ? *initial : predicted);
  const Eigen::Index m = y.size();

  auto displacement = [&](const Vector& yy) {
    const auto ret = poincare_map(s, section_state(yy), opt.integrator);
    return Vector(section_coordinates(ret.x) - yy);
  };
  auto map_jacobian = [&](const Vector& yy, const Vector& fy) {
    Matrix jac(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      Vector yk = yy;
      yk(k) += opt.map_step;
      jac.col(k) = (displacement(yk) - fy) / opt.map_step;
    }
    return jac;
  };

  Vector f = displacement(y);
  double res = f.cwiseAbs().maxCoeff();
  int it = 0;
  for (; it < opt.max_iterations && !(res < opt.residual_tol); ++it) {
    const Matrix jac = map_jacobian(y, f);
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) throw NoConvergence("find_limit_cycle: singular map Jacobian", y, res);
    const Vector step = lu.solve(-f);
    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 12; ++halving, lambda *= 0.5) {
      const Vector trial = y + lambda * step;
      if (!(trial(0) > 0.0)) continue;
      Vector ft;
      try {
        ft = displacement(trial);
      } catch (const NoReturn&) {
        continue;
      } catch (const TransversalityLost&) {
        continue;
      }
      const double rt = ft.cwiseAbs().maxCoeff();
      if (rt < res) {
        y = trial;
        f = ft;
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(res < opt.residual_tol)) {
    throw NoConvergence("find_limit_cycle: Poincare residual " + std::to_string(res) +
                            " above tolerance",
                        section_state(y), res);
  }

  LimitCycleResult result;
  result.epsilon = s.epsilon();
  result.fixed_point = section_state(y);
  result.poincare_residual = res;
  result.iterations = it;
  result.distance_to_prediction = (result.fixed_point - predicted).norm();
  const auto ret = poincare_map(s, result.fixed_point, opt.integrator);
  result.period = ret.return_time;
  result.cycle = ret.trajectory;
  result.crossing_ok =
      s.nonlinearity() == Nonlinearity::Sign ? audit_crossings(s, ret.trajectory) : true;

  const Matrix dp = map_jacobian(y, f) + Matrix::Identity(m, m);
  Eigen::EigenSolver<Matrix> eig(dp, false);
  if (eig.info() == Eigen::Success) {
    double max_mod = 0.0;
    double min_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < m; ++k) {
      const std::complex<double> lam = eig.eigenvalues()(k);
      result.map_eigenvalues.push_back(lam);
      max_mod = std::max(max_mod, std::abs(lam));
      min_dist = std::min(min_dist, std::abs(lam - 1.0));
    }
    result.floquet_max_modulus = max_mod;
    result.floquet_min_distance_to_one = min_dist;
  }
  return result;
}

struct SweepRow {
  double epsilon = 0.0;
  std::optional<LimitCycleResult> result;
  std::string error_kind;  ///< empty on success
  std::string error;
};

/// One cycle per epsilon, warm-started from the previous fixed point.
inline std::vector<SweepRow> epsilon_sweep(const ControlSystem& s,
                                           const std::vector<double>& epsilons,
                                           const PolarPoint& seed,
                                           const LimitCycleOptions& opt = {}) {
  for (std::size_t k = 1; k < epsilons.size(); ++k) {
    if (std::abs(epsilons[k]) > std::abs(epsilons[k - 1])) {
      throw PreconditionError("epsilon_sweep: epsilons must be sorted by decreasing magnitude");
    }
  }
  std::vector<SweepRow> rows;
  std::optional<CartesianState> warm;
  for (double eps : epsilons) {
    SweepRow row;
    row.epsilon = eps;
    try {
      row.result = find_limit_cycle(s.with_epsilon(eps), seed, opt, warm);
      warm = row.result->fixed_point;
    } catch (const SlidingDetected& e) {
      row.error_kind = "SlidingDetected";
      row.error = e.what();
    } catch (const NoConvergence& e) {
      row.error_kind = "NoConvergence";
      row.error = e.what();
    } catch (const PreconditionError& e) {
      row.error_kind = "Precondition";
      row.error = e.what();
    } catch (const Error& e) {
      row.error_kind = "Error";
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// CSV: header "t,x1,...,x2n", one row per sample, events as "# event,t,surface,direction".
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.empty()) throw DomainError("write_trajectory_csv: empty trajectory");
  const auto dim = traj.states.front().size();
  os << "t";
  for (Eigen::Index i = 1; i <= dim; ++i) os << ",x" << i;
  os << "\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << traj.times[k];
    for (Eigen::Index i = 0; i < dim; ++i) os << "," << traj.states[k](i);
    os << "\n";
  }
  for (const auto& e : traj.events) {
    os << "# event," << e.t << "," << to_string(e.surface) << "," << e.direction << "\n";
  }
  if (traj.sliding) os << "# sliding\n";
}

inline Trajectory read_trajectory_csv(std::istream& is) {
  Trajectory traj;
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,", 0) != 0) {
    throw DomainError("trajectory CSV: missing header line 't,x1,...'");
  }
  const auto dim = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (line[0] == '#') {
      if (line.rfind("# sliding", 0) == 0) {
        traj.sliding = true;
        continue;
      }
      if (line.rfind("# event,", 0) != 0) continue;
      std::getline(ss, cell, ',');
      TrajectoryEvent e;
      std::getline(ss, cell, ',');
      e.t = std::stod(cell);
      std::getline(ss, cell, ',');
      for (auto s : {Surface::SaturationUpper, Surface::SaturationLower, Surface::SignSwitch,
                     Surface::Section}) {
        if (cell == to_string(s)) e.surface = s;
      }
      std::getline(ss, cell, ',');
      e.direction = std::stoi(cell);
      traj.events.push_back(std::move(e));
      continue;
    }
    std::vector<double> values;
    try {
      while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw DomainError("trajectory CSV: line " + std::to_string(line_no) + " is not numeric");
    }
    if (static_cast<Eigen::Index>(values.size()) != dim + 1) {
      throw DomainError("trajectory CSV: line " + std::to_string(line_no) + " has " +
                        std::to_string(values.size()) + " fields, expected " +
                        std::to_string(dim + 1));
    }
    traj.times.push_back(values[0]);
    traj.states.push_back(Eigen::Map<const Vector>(values.data() + 1, dim));
  }
  return traj;
}

}  // namespace plcycles
