#pragma once

// System family x' = A0 x + eps (A x + nl(x1) b) with A0 a block-diagonal
// rotation matrix whose k-th 2x2 block turns at frequency w_k.

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "plcycles/errors.hpp"

namespace plcycles {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Cartesian state (x1, ..., x_2n).
using CartesianState = Eigen::VectorXd;

enum class FrequencyFamily {
  OddFrequencies,          ///< w_k = 2k - 1
  ConsecutiveFrequencies,  ///< w_k = k
};

enum class Nonlinearity {
  Saturation,  ///< continuous clip to [-1, 1]
  Sign,        ///< discontinuous switch on the sign of x1
};

inline std::string_view to_string(FrequencyFamily f) {
  return f == FrequencyFamily::OddFrequencies ? "odd" : "consecutive";
}

inline std::string_view to_string(Nonlinearity nl) {
  return nl == Nonlinearity::Saturation ? "saturation" : "sign";
}

/// Rotation frequency of block k (1-based).
inline int block_frequency(int k, FrequencyFamily family) {
  return family == FrequencyFamily::OddFrequencies ? 2 * k - 1 : k;
}

inline double saturation(double u) {
  if (u < -1.0) return -1.0;
  if (u > 1.0) return 1.0;
  return u;
}

/// psi(u); psi(0) = 0 keeps the function odd.
inline double sign_nonlinearity(double u) {
  if (u < 0.0) return -1.0;
  if (u > 0.0) return 1.0;
  return 0.0;
}

inline double apply_nonlinearity(Nonlinearity nl, double u) {
  return nl == Nonlinearity::Saturation ? saturation(u) : sign_nonlinearity(u);
}

/// Block-diagonal A0 (OddFrequencies) or A1 (ConsecutiveFrequencies).
inline Matrix unperturbed_matrix(int n, FrequencyFamily family) {
  if (n < 1) throw DomainError("unperturbed_matrix: n must be >= 1, got " + std::to_string(n));
  Matrix m = Matrix::Zero(2 * n, 2 * n);
  for (int k = 1; k <= n; ++k) {
    const double w = block_frequency(k, family);
    m(2 * k - 2, 2 * k - 1) = -w;
    m(2 * k - 1, 2 * k - 2) = w;
  }
  return m;
}

/// Full problem statement. Immutable after construction; validated on construction.
class ControlSystem {
 public:
  ControlSystem(int n, FrequencyFamily family, Matrix a, Vector b, Nonlinearity nonlinearity,
                double epsilon = 0.0)
      : n_(n),
        family_(family),
        a_(std::move(a)),
        b_(std::move(b)),
        nonlinearity_(nonlinearity),
        epsilon_(epsilon) {
    if (n_ < 1) throw DomainError("ControlSystem: n must be >= 1, got " + std::to_string(n_));
    const auto dim = static_cast<Eigen::Index>(2 * n_);
    if (a_.rows() != dim || a_.cols() != dim) {
      throw DomainError("ControlSystem: A must be " + std::to_string(dim) + "x" +
                        std::to_string(dim) + ", got " + std::to_string(a_.rows()) + "x" +
                        std::to_string(a_.cols()));
    }
    if (b_.size() != dim) {
      throw DomainError("ControlSystem: b must have length " + std::to_string(dim) + ", got " +
                        std::to_string(b_.size()));
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (!std::isfinite(a_(i, j))) {
          throw DomainError("ControlSystem: A[" + std::to_string(i + 1) + "][" +
                            std::to_string(j + 1) + "] is not finite");
        }
      }
      if (!std::isfinite(b_(i))) {
        throw DomainError("ControlSystem: b[" + std::to_string(i + 1) + "] is not finite");
      }
    }
    if (b_.isZero(0.0)) throw DomainError("ControlSystem: b must have a nonzero entry");
    if (!std::isfinite(epsilon_)) throw DomainError("ControlSystem: epsilon is not finite");
    a0_ = unperturbed_matrix(n_, family_);
  }

  int n() const { return n_; }
  int dimension() const { return 2 * n_; }
  FrequencyFamily family() const { return family_; }
  Nonlinearity nonlinearity() const { return nonlinearity_; }
  double epsilon() const { return epsilon_; }
  const Matrix& perturbation() const { return a_; }
  const Vector& forcing() const { return b_; }
  const Matrix& unperturbed() const { return a0_; }

  /// a_ij with 1-based indices.
  double a(int i, int j) const { return a_(i - 1, j - 1); }
  /// b_i with 1-based index.
  double b(int i) const { return b_(i - 1); }
  int frequency(int block) const { return block_frequency(block, family_); }

  ControlSystem with_epsilon(double eps) const {
    ControlSystem copy = *this;
    if (!std::isfinite(eps)) throw DomainError("ControlSystem: epsilon is not finite");
    copy.epsilon_ = eps;
    return copy;
  }

  friend bool operator==(const ControlSystem& l, const ControlSystem& r) {
    return l.n_ == r.n_ && l.family_ == r.family_ && l.nonlinearity_ == r.nonlinearity_ &&
           l.epsilon_ == r.epsilon_ && l.a_ == r.a_ && l.b_ == r.b_;
  }

 private:
  int n_;
  FrequencyFamily family_;
  Matrix a_;
  Vector b_;
  Nonlinearity nonlinearity_;
  double epsilon_;
  Matrix a0_;
};

inline void check_state(const ControlSystem& s, const CartesianState& x) {
  if (x.size() != s.dimension()) {
    throw DomainError("state has length " + std::to_string(x.size()) + ", expected " +
                      std::to_string(s.dimension()));
  }
  if (!x.allFinite()) throw DomainError("state has non-finite entries");
}

/// A0 x + eps (A x + nl(x1) b).
inline Vector vector_field(const ControlSystem& s, const CartesianState& x) {
  check_state(s, x);
  Vector dx = s.unperturbed() * x;
  if (s.epsilon() != 0.0) {
    dx += s.epsilon() *
          (s.perturbation() * x + apply_nonlinearity(s.nonlinearity(), x(0)) * s.forcing());
  }
  return dx;
}

}  // namespace plcycles
