#pragma once

#include <cmath>
#include <random>
#include <string>

#include "plcycles/averaging.hpp"
#include "plcycles/model.hpp"
#include "plcycles/spec_file.hpp"

namespace plcycles::testing {

inline std::string spec_path(const std::string& name) {
  return std::string(PLCYCLES_SOURCE_DIR) + "/specs/" + name;
}

inline ControlSystem load_system(const std::string& name, double eps = 0.0) {
  return load_spec(spec_path(name)).system(eps);
}

/// Random A (entries in [-2, 2]) and b, with b_p, b_q of every block not both zero.
inline ControlSystem random_system(std::mt19937_64& rng, int n, FrequencyFamily family,
                                   Nonlinearity nl) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Matrix a(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < 2 * n; ++j) a(i, j) = u(rng);
  }
  Vector b(2 * n);
  for (int i = 0; i < 2 * n; ++i) b(i) = u(rng);
  for (int i = 0; i < 2 * n; i += 2) {
    if (std::abs(b(i)) + std::abs(b(i + 1)) < 0.1) b(i) = 0.5;
  }
  return ControlSystem(n, family, a, b, nl);
}

/// Random odd-frequency system whose radial equation has a root: b1 (a11 + a22) < 0, and
/// for saturation |b1| > |a11 + a22|.
inline ControlSystem random_regular_system(std::mt19937_64& rng, int n, Nonlinearity nl) {
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::uniform_real_distribution<double> ratio(1.3, 4.0);
  std::bernoulli_distribution coin(0.5);
  auto s = random_system(rng, n, FrequencyFamily::OddFrequencies, nl);
  Matrix a = s.perturbation();
  Vector b = s.forcing();
  const double c = (coin(rng) ? 1.0 : -1.0) * mag(rng);
  a(0, 0) = 0.5 * c + 0.3;
  a(1, 1) = 0.5 * c - 0.3;
  b(0) = -(c > 0 ? 1.0 : -1.0) * std::abs(c) * ratio(rng);
  return ControlSystem(n, FrequencyFamily::OddFrequencies, a, b, nl);
}

inline SystemSpec to_spec(const ControlSystem& s, std::vector<double> eps = {1e-2, 1e-3, 1e-4}) {
  SystemSpec spec;
  spec.n = s.n();
  spec.family = s.family();
  spec.nonlinearity = s.nonlinearity();
  spec.a = s.perturbation();
  spec.b = s.forcing();
  spec.epsilons = std::move(eps);
  return spec;
}

}  // namespace plcycles::testing
