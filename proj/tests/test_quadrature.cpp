#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "plcycles/averaging.hpp"
#include "plcycles/quadrature.hpp"
#include "support.hpp"

using namespace plcycles;

TEST(KinkAngles, SaturationOutsideUnitCircle) {
  const auto k = kink_angles(Nonlinearity::Saturation, 2.0);
  ASSERT_EQ(k.size(), 4u);
  EXPECT_NEAR(k[0], kPi / 3, 1e-15);
  EXPECT_NEAR(k[3], 2 * kPi - kPi / 3, 1e-15);
  EXPECT_TRUE(kink_angles(Nonlinearity::Saturation, 0.5).empty());
  EXPECT_EQ(kink_angles(Nonlinearity::Sign, 0.5).size(), 2u);
}

TEST(KinkAngles, ShiftedStartStaysInPeriod) {
  const double start = 1.0;
  for (double a : kink_angles(Nonlinearity::Saturation, 3.0, start)) {
    EXPECT_GT(a, start);
    EXPECT_LT(a, start + kTwoPi);
  }
}

TEST(IntegratePeriod, ConstantAndTrig) {
  QuadratureConfig cfg;
  auto one = [](double, int) { return 1.0; };
  EXPECT_NEAR(integrate_period(one, Nonlinearity::Sign, 1.0, cfg).value, kTwoPi, 1e-13);
  auto cos2 = [](double t, int) { return std::cos(t) * std::cos(t); };
  EXPECT_NEAR(integrate_period(cos2, Nonlinearity::Saturation, 2.0, cfg).value, kPi, cfg.abs_tol);
}

TEST(IntegratePeriod, BothRulesAgree) {
  QuadratureConfig simpson;
  QuadratureConfig gauss;
  gauss.rule = QuadratureConfig::Rule::GaussLegendre;
  gauss.panels = 8;
  for (int w : {1, 3, 5, 7}) {
    for (double r : {0.5, 1.2, 2.0, 6.0}) {
      const double a =
          harmonic_integral_quadrature(Nonlinearity::Saturation, w, r, Trig::Cos, simpson).value;
      const double b =
          harmonic_integral_quadrature(Nonlinearity::Saturation, w, r, Trig::Cos, gauss).value;
      EXPECT_NEAR(a, b, 1e-10) << "w = " << w << " r = " << r;
    }
  }
}

TEST(IntegratePeriod, BreakpointSplittingMatters) {
  // Without the split the sign jump leaves an O(h) error no tolerance can hide.
  // exp(cos t) keeps the two jump errors from cancelling under t -> t + pi.
  auto f = [](double t, int branch) {
    return nonlinearity_on_branch(Nonlinearity::Sign, branch, std::cos(t)) * std::exp(std::cos(t));
  };
  QuadratureConfig split;
  QuadratureConfig gauss;
  gauss.rule = QuadratureConfig::Rule::GaussLegendre;
  gauss.panels = 8;
  QuadratureConfig whole;
  whole.breakpoint_split = false;
  whole.max_refinements = 0;
  const double start = 0.3;
  const auto good = integrate_period(f, Nonlinearity::Sign, 1.0, split, start);
  const auto reference = integrate_period(f, Nonlinearity::Sign, 1.0, gauss, start);
  const auto bad = integrate_period(f, Nonlinearity::Sign, 1.0, whole, start);
  EXPECT_NEAR(good.value, reference.value, split.abs_tol);
  EXPECT_GT(std::abs(bad.value - reference.value), 1e-6);
}

TEST(IntegratePeriod, StartAngleInvariance) {
  for (double start : {0.0, 0.4, 2.0, 5.5}) {
    const auto q = harmonic_integral_quadrature(Nonlinearity::Saturation, 3, 2.0, Trig::Cos, {},
                                                start);
    EXPECT_NEAR(q.value, -std::sqrt(3.0) / 2.0, 1e-10) << "start = " << start;
  }
}

TEST(QuadratureConfig, Validation) {
  QuadratureConfig cfg;
  cfg.panels = 2;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.abs_tol = 0.0;
  EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(ToleranceNotMet, RaisedWhenRefinementCannotReachTolerance) {
  const auto s = plcycles::testing::load_system("sign-r4.json");
  QuadratureConfig cfg;
  cfg.breakpoint_split = false;
  cfg.max_refinements = 0;
  cfg.panels = 16;
  EXPECT_THROW(integral_numeric(1, 1.0, s, cfg), ToleranceNotMet);
}

TEST(SineIntegrals, VanishForEveryHarmonic) {
  for (auto nl : {Nonlinearity::Saturation, Nonlinearity::Sign}) {
    for (int w = 1; w <= 8; ++w) {
      for (double r : {0.3, 1.5, 4.0}) {
        EXPECT_NEAR(harmonic_integral_quadrature(nl, w, r, Trig::Sin).value, 0.0, 1e-12);
      }
    }
  }
}

TEST(IntegrandH, AveragesToClosedForm) {
  const auto s = plcycles::testing::load_system("example-r4.json");
  const PolarPoint z(2.5, {{1.0, 2.0}});
  const auto closed = averaged_function(s, z);
  for (int c = 1; c <= 3; ++c) {
    EXPECT_NEAR(averaged_component_numeric(s, z, c), closed[c], 1e-9) << "component " << c;
  }
  EXPECT_THROW(integrand_h(s, z, 0.0, 4), DomainError);
  EXPECT_THROW(integrand_h(s, z, 0.0, 0), DomainError);
}

TEST(IntegrandH, PointwiseMatchesPolarVectorField) {
  // H_1 = (x1 f1 + x2 f2) / r with the perturbation f = A x + nl(x1) b
  std::mt19937_64 rng(5);
  const auto s = plcycles::testing::random_system(rng, 2, FrequencyFamily::OddFrequencies,
                                                  Nonlinearity::Saturation);
  const PolarPoint z(1.7, {{0.8, 1.3}});
  for (double t : {0.0, 0.7, 2.2, 4.0}) {
    Vector x(4);
    x << z.r() * std::cos(t), z.r() * std::sin(t), 1.3 * std::cos(3 * t + 0.8),
        1.3 * std::sin(3 * t + 0.8);
    const Vector f = s.perturbation() * x + saturation(x(0)) * s.forcing();
    EXPECT_NEAR(integrand_h(s, z, t, 1), (x(0) * f(0) + x(1) * f(1)) / z.r(), 1e-13);
    EXPECT_NEAR(integrand_h(s, z, t, 2), (x(2) * f(2) + x(3) * f(3)) / 1.3, 1e-13);
  }
}
