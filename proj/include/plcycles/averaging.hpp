#pragma once

// Closed-form first-order averaged function of the polar normal form.
//
// With x1 = r cos t, x2 = r sin t and, for blocks j = 2..n,
// x_{2j-1} = r_{j-1} cos(w_j t + theta_{j-1}), x_{2j} = r_{j-1} sin(w_j t + theta_{j-1}),
// averaging over the fast angle t in [0, 2 pi] gives
//
//   h_1        = (a11 + a22) pi r + b1 I_1(r)
//   h_{2(j-1)} = (a_{2j-1,2j-1} + a_{2j,2j}) pi r_{j-1}
//                + (b_{2j-1} cos theta_{j-1} + b_{2j} sin theta_{j-1}) I_j(r)
//   h_{2j-1}   = (a_{2j,2j-1} - a_{2j-1,2j} + w_j (a12 - a21)) pi - w_j b2 I_1(r) / r
//                + (b_{2j} cos theta_{j-1} - b_{2j-1} sin theta_{j-1}) I_j(r) / r_{j-1}
//
// where I_j(r) = int_0^{2pi} nl(r cos t) cos(w_j t) dt. The companion sine
// integrals vanish identically because nl(r cos t) is even in t.
//
// For odd w >= 3 and r > 1 the saturation integral is
//   4 / (w (w^2 - 1)) * (w s cos(w atan s) - sin(w atan s)),  s = sqrt(r^2 - 1).
// The prefactor 2 / (j (2j-1)^2) sometimes printed for this integral disagrees
// with quadrature of the definition (I_2(2) = -sqrt(3)/2, not -sqrt(3)/3).

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "plcycles/errors.hpp"
#include "plcycles/model.hpp"

namespace plcycles {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle to [0, 2 pi).
inline double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

/// Angle and radius of one slow block (blocks 2..n).
struct BlockPolar {
  double theta = 0.0;
  double radius = 1.0;
};

/// Point (r, theta_1, r_1, ..., theta_{n-1}, r_{n-1}) of the averaged space.
class PolarPoint {
 public:
  explicit PolarPoint(double r, std::vector<BlockPolar> blocks = {})
      : r_(r), blocks_(std::move(blocks)) {
    if (!(r_ > 0.0) || !std::isfinite(r_)) {
      throw DomainError("PolarPoint: r must be positive and finite, got " + std::to_string(r_));
    }
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      auto& b = blocks_[k];
      if (!(b.radius > 0.0) || !std::isfinite(b.radius)) {
        throw DomainError("PolarPoint: r_" + std::to_string(k + 1) +
                          " must be positive and finite, got " + std::to_string(b.radius));
      }
      if (!std::isfinite(b.theta)) {
        throw DomainError("PolarPoint: theta_" + std::to_string(k + 1) + " is not finite");
      }
      b.theta = wrap_angle(b.theta);
    }
  }

  /// Builds a point from the flat coordinate vector (r, theta_1, r_1, ...).
  static PolarPoint from_coordinates(const Vector& z) {
    if (z.size() < 1 || z.size() % 2 == 0) {
      throw DomainError("PolarPoint: coordinate vector must have odd length, got " +
                        std::to_string(z.size()));
    }
    std::vector<BlockPolar> blocks;
    for (Eigen::Index k = 1; k + 1 < z.size(); k += 2) blocks.push_back({z(k), z(k + 1)});
    return PolarPoint(z(0), std::move(blocks));
  }

  Vector coordinates() const {
    Vector z(dimension());
    z(0) = r_;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      z(2 * k + 1) = blocks_[k].theta;
      z(2 * k + 2) = blocks_[k].radius;
    }
    return z;
  }

  double r() const { return r_; }
  const std::vector<BlockPolar>& blocks() const { return blocks_; }
  /// Number of oscillator blocks represented (1 + slow blocks).
  int n() const { return static_cast<int>(blocks_.size()) + 1; }
  int dimension() const { return 2 * n() - 1; }
  /// theta_{j-1} for block j = 2..n.
  double theta(int j) const { return blocks_.at(j - 2).theta; }
  /// r_{j-1} for block j = 2..n; block 1 returns r.
  double radius(int j) const { return j == 1 ? r_ : blocks_.at(j - 2).radius; }

  /// Point on the section x2 = 0, x1 > 0 (fast angle t = 0).
  CartesianState section_state() const {
    CartesianState x = CartesianState::Zero(2 * n());
    x(0) = r_;
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      x(2 * k + 2) = blocks_[k].radius * std::cos(blocks_[k].theta);
      x(2 * k + 3) = blocks_[k].radius * std::sin(blocks_[k].theta);
    }
    return x;
  }

 private:
  double r_;
  std::vector<BlockPolar> blocks_;
};

/// Components (h_1, h_2, ..., h_{2n-1}); h_{2(j-1)} drives r_{j-1}, h_{2j-1} drives theta_{j-1}.
struct AveragedValue {
  Vector components;

  double operator[](int component) const { return components(component - 1); }
  Eigen::Index size() const { return components.size(); }
  double max_abs() const { return components.size() ? components.cwiseAbs().maxCoeff() : 0.0; }
};

enum class Region {
  InnerBall,  ///< r <= 1: saturation acts linearly on the first block
  Outer,      ///< r > 1
};

struct DegeneracyVerdict {
  enum class Kind { Regular, ContinuumCandidate, NoInformation };
  Kind kind = Kind::Regular;
  std::string reason;
};

inline std::string_view to_string(DegeneracyVerdict::Kind k) {
  switch (k) {
    case DegeneracyVerdict::Kind::Regular: return "Regular";
    case DegeneracyVerdict::Kind::ContinuumCandidate: return "ContinuumCandidate";
    case DegeneracyVerdict::Kind::NoInformation: return "NoInformation";
  }
  return "?";
}

/// K(r) = pi r + (2/r) sqrt(r^2-1) - 2 r atan sqrt(r^2-1); K(1) = pi.
inline double big_k(double r) {
  if (!(r >= 1.0)) throw DomainError("big_k: r must be >= 1, got " + std::to_string(r));
  const double s = std::sqrt(r * r - 1.0);
  return kPi * r + 2.0 * s / r - 2.0 * r * std::atan(s);
}

inline double big_k_derivative(double r) {
  if (!(r >= 1.0)) {
    throw DomainError("big_k_derivative: r must be >= 1, got " + std::to_string(r));
  }
  const double s = std::sqrt(r * r - 1.0);
  return kPi - 2.0 * s / (r * r) - 2.0 * std::atan(s);
}

namespace detail {

// int_0^{2pi} sat(r cos t) cos(w t) dt for r > 1 and odd w >= 3.
inline double saturation_harmonic_outer(int w, double r) {
  const double s = std::sqrt(r * r - 1.0);
  const double a = std::atan(s);
  const double wd = w;
  return 4.0 / (wd * (wd * wd - 1.0)) * (wd * s * std::cos(wd * a) - std::sin(wd * a));
}

}  // namespace detail

/// Closed form of int_0^{2pi} nl(r cos t) cos(w t) dt for harmonic w >= 1.
inline double harmonic_integral(Nonlinearity nl, int w, double r) {
  if (w < 1) throw DomainError("harmonic_integral: harmonic must be >= 1, got " + std::to_string(w));
  if (!(r > 0.0)) throw DomainError("harmonic_integral: r must be > 0, got " + std::to_string(r));
  if (w % 2 == 0) return 0.0;  // odd symmetry under t -> t + pi
  if (nl == Nonlinearity::Sign) {
    const double sign = ((w - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
    return sign * 4.0 / w;
  }
  if (r <= 1.0) return w == 1 ? kPi * r : 0.0;
  return w == 1 ? big_k(r) : detail::saturation_harmonic_outer(w, r);
}

/// L_j(r): the r > 1 saturation integral of block j >= 2 under the given family.
inline double big_l(int j, double r, FrequencyFamily family) {
  if (j < 2) throw DomainError("big_l: j must be >= 2, got " + std::to_string(j));
  if (!(r > 1.0)) throw DomainError("big_l: r must be > 1, got " + std::to_string(r));
  const int w = block_frequency(j, family);
  if (w % 2 == 0) return 0.0;
  return detail::saturation_harmonic_outer(w, r);
}

namespace detail {

inline void check_block_index(int j, const ControlSystem& s, const char* who) {
  if (j < 1 || j > s.n()) {
    throw DomainError(std::string(who) + ": block index j = " + std::to_string(j) +
                      " outside 1.." + std::to_string(s.n()));
  }
}

}  // namespace detail

/// I_j(r) = int_0^{2pi} nl(r cos t) cos(w_j t) dt.
inline double i_integral(int j, double r, const ControlSystem& s) {
  detail::check_block_index(j, s, "i_integral");
  if (!(r > 0.0)) throw DomainError("i_integral: r must be > 0, got " + std::to_string(r));
  return harmonic_integral(s.nonlinearity(), s.frequency(j), r);
}

/// J_j(r) = int_0^{2pi} nl(r cos t) sin(w_j t) dt, identically zero.
inline double j_integral(int j, double r, const ControlSystem& s) {
  detail::check_block_index(j, s, "j_integral");
  if (!(r > 0.0)) throw DomainError("j_integral: r must be > 0, got " + std::to_string(r));
  return 0.0;
}

inline void check_point(const ControlSystem& s, const PolarPoint& z) {
  if (z.n() != s.n()) {
    throw DomainError("polar point has " + std::to_string(z.n()) + " blocks, system has " +
                      std::to_string(s.n()));
  }
}

inline AveragedValue averaged_function(const ControlSystem& s, const PolarPoint& z) {
  check_point(s, z);
  const int n = s.n();
  const double r = z.r();
  const double i1 = i_integral(1, r, s);
  Vector h(2 * n - 1);
  h(0) = (s.a(1, 1) + s.a(2, 2)) * kPi * r + s.b(1) * i1;
  for (int j = 2; j <= n; ++j) {
    const double ij = i_integral(j, r, s);
    const double th = z.theta(j);
    const double rj = z.radius(j);
    const double c = std::cos(th);
    const double sn = std::sin(th);
    const double wj = s.frequency(j);
    const int p = 2 * j - 1;
    const int q = 2 * j;
    h(2 * (j - 1) - 1) =
        (s.a(p, p) + s.a(q, q)) * kPi * rj + (s.b(p) * c + s.b(q) * sn) * ij;
    h(2 * j - 2) = (s.a(q, p) - s.a(p, q) + wj * (s.a(1, 2) - s.a(2, 1))) * kPi -
                   wj * s.b(2) * i1 / r + (s.b(q) * c - s.b(p) * sn) * ij / rj;
  }
  return {h};
}

/// Structural verdict on whether simple zeros can exist in the given region.
inline DegeneracyVerdict classify(const ControlSystem& s, Region region) {
  using Kind = DegeneracyVerdict::Kind;
  if (s.family() == FrequencyFamily::ConsecutiveFrequencies) {
    std::string reason =
        "consecutive frequencies: I_j vanishes for every even j, so theta_{j-1} drops out of h "
        "and zeros are absent or form a continuum";
    if (s.n() == 1) reason += " (n = 1 coincides with the odd family; verdict kept per family)";
    return {Kind::NoInformation, std::move(reason)};
  }
  if (s.nonlinearity() == Nonlinearity::Saturation && region == Region::InnerBall) {
    return {Kind::ContinuumCandidate,
            "saturation with r <= 1: h does not depend on any theta_{j-1}, so zeros come in "
            "continua"};
  }
  return {Kind::Regular, "odd frequencies: h_1 has at most one root and each block is solvable"};
}

}  // namespace plcycles
