#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace plcycles {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (bad radius, index, shape).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of the caller was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Quadrature could not reach the requested absolute tolerance.
class ToleranceNotMet : public Error {
 public:
  ToleranceNotMet(const std::string& what, double value, double estimate)
      : Error(what), value_(value), estimate_(estimate) {}
  double value() const { return value_; }
  double estimate() const { return estimate_; }

 private:
  double value_;
  double estimate_;
};

/// Radial bracketing exhausted its search range although a root must exist.
class NoProgress : public Error {
 public:
  using Error::Error;
};

/// A block of the cascade has a vanishing harmonic integral.
class DegenerateBlock : public Error {
 public:
  DegenerateBlock(const std::string& what, int block) : Error(what), block_(block) {}
  int block() const { return block_; }

 private:
  int block_;
};

/// A finite-difference stencil straddles the r = 1 seam of the saturation averaged function.
class SeamError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped without meeting its tolerance.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, Eigen::VectorXd best, double residual)
      : Error(what), best_(std::move(best)), residual_(residual) {}
  const Eigen::VectorXd& best_iterate() const { return best_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd best_;
  double residual_;
};

/// The trajectory met the sign discontinuity at a non-crossing (sliding) point.
class SlidingDetected : public Error {
 public:
  SlidingDetected(const std::string& what, double t) : Error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// No return to the Poincare section within the allowed time.
class NoReturn : public Error {
 public:
  using Error::Error;
};

/// The vector field is (numerically) tangent to the Poincare section.
class TransversalityLost : public Error {
 public:
  using Error::Error;
};

}  // namespace plcycles
