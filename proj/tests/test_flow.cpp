#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "plcycles/flow.hpp"
#include "plcycles/zeros.hpp"
#include "support.hpp"

using namespace plcycles;
using plcycles::testing::load_system;

namespace {

CartesianState state(std::initializer_list<double> v) {
  CartesianState x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double d : v) x(k++) = d;
  return x;
}

ControlSystem planar(Nonlinearity nl, double eps) {
  Matrix a(2, 2);
  a << -0.3, 0.1, 0.2, -0.2;
  Vector b(2);
  b << 1.0, 0.3;
  return ControlSystem(1, FrequencyFamily::OddFrequencies, a, b, nl, eps);
}

}  // namespace

TEST(Integrate, UnperturbedPlanarCenterReturns) {
  const auto s = planar(Nonlinearity::Saturation, 0.0);
  const auto traj = integrate(s, state({1, 0}), 0.0, kTwoPi);
  EXPECT_NEAR(traj.times.back(), kTwoPi, 1e-12);
  EXPECT_LT((traj.back() - state({1, 0})).norm(), 1e-9);
}

TEST(Integrate, UnperturbedR4Returns) {
  const auto s = load_system("example-r4.json");
  const auto traj = integrate(s, state({2, 0, 0, 3}), 0.0, kTwoPi);
  EXPECT_LT((traj.back() - state({2, 0, 0, 3})).norm(), 1e-9);
}

TEST(Integrate, BlockRadiiConservedAtZeroEpsilon) {
  const auto s = load_system("example-r4.json");
  const auto x0 = state({2, 0, 0, 3});
  const auto traj = integrate(s, x0, 0.0, kTwoPi);
  for (const auto& x : traj.states) {
    EXPECT_NEAR(x(0) * x(0) + x(1) * x(1), 4.0, 1e-8);
    EXPECT_NEAR(x(2) * x(2) + x(3) * x(3), 9.0, 1e-8);
  }
}

TEST(Integrate, TimesIncreaseAndEventsLieOnSurfaces) {
  const auto s = load_system("example-r4.json", 1e-2);
  const auto traj = integrate(s, state({2, 0, 0, 3}), 0.0, 3 * kTwoPi);
  for (std::size_t k = 1; k < traj.times.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
  EXPECT_EQ(traj.events.size(), 12u);  // four kinks per turn
  for (const auto& e : traj.events) {
    EXPECT_NEAR(std::abs(e.x(0)), 1.0, 1e-10);
    EXPECT_GE(e.t, traj.times.front());
    EXPECT_LE(e.t, traj.times.back());
  }
}

TEST(Integrate, SaturationSegmentsKeepOneSide) {
  // |x1| - 1 is single-signed between consecutive events (no silent kink crossing).
  const auto s = load_system("example-r4.json", 5e-2);
  const auto traj = integrate(s, state({2, 0, 0, 3}), 0.0, 2 * kTwoPi);
  std::size_t ev = 0;
  int side = 0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    while (ev < traj.events.size() && traj.events[ev].t <= traj.times[k]) {
      ++ev;
      side = 0;
    }
    const double g = std::abs(traj.states[k](0)) - 1.0;
    if (std::abs(g) < 1e-9) continue;
    const int sg = g > 0 ? 1 : -1;
    if (side == 0) side = sg;
    EXPECT_EQ(sg, side) << "sample " << k << " t = " << traj.times[k];
  }
}

TEST(Integrate, SignEventsAreTransversal) {
  const auto s = load_system("sign-r4.json", 1e-2);
  const auto traj = integrate(s, state({1.3, 0, 0.02, 0.1}), 0.0, kTwoPi);
  EXPECT_FALSE(traj.sliding);
  ASSERT_EQ(traj.events.size(), 2u);
  for (const auto& e : traj.events) {
    EXPECT_EQ(e.surface, Surface::SignSwitch);
    EXPECT_NEAR(e.x(0), 0.0, 1e-12);
    EXPECT_TRUE(is_crossing_point(s, e.x));
  }
}

TEST(Integrate, SlidingIsDetectedNotSimulated) {
  // Large epsilon with b1 opposing the rotation makes x1 = 0 attractive near x2 = 0.
  Matrix a = Matrix::Zero(2, 2);
  Vector b(2);
  b << -5.0, 0.0;
  const ControlSystem s(1, FrequencyFamily::OddFrequencies, a, b, Nonlinearity::Sign, 1.0);
  const auto traj = integrate(s, state({1.0, 0.5}), 0.0, kTwoPi);
  EXPECT_TRUE(traj.sliding);
  EXPECT_LT(traj.times.back(), kTwoPi);
  EXPECT_FALSE(audit_crossings(s, traj));
  EXPECT_THROW(poincare_map(s, state({1.0, 0.0})), SlidingDetected);
}

TEST(Integrate, RejectsBadInput) {
  const auto s = planar(Nonlinearity::Sign, 0.1);
  EXPECT_THROW(integrate(s, state({1, 0, 0}), 0.0, 1.0), DomainError);
  EXPECT_THROW(integrate(s, state({1, 0}), 1.0, 1.0), DomainError);
}

TEST(PoincareMap, IdentityAtZeroEpsilon) {
  const auto s = load_system("example-r4.json");
  const auto ret = poincare_map(s, state({2, 0, 0, 3}));
  EXPECT_NEAR(ret.return_time, kTwoPi, 1e-9);
  EXPECT_LT((ret.x - state({2, 0, 0, 3})).norm(), 1e-9);
}

TEST(PoincareMap, Preconditions) {
  const auto s = load_system("example-r4.json", 1e-3);
  EXPECT_THROW(poincare_map(s, state({-2, 0, 0, 3})), PreconditionError);
  EXPECT_THROW(poincare_map(s, state({2, 0.5, 0, 3})), PreconditionError);
}

TEST(PoincareMap, SmallDisplacementNearTheCycle) {
  const auto s = load_system("example-r4.json", 1e-3);
  const auto ret = poincare_map(s, state({2, 0, 0, 4.5}));
  EXPECT_LT((ret.x - state({2, 0, 0, 4.5})).norm(), 1e-2);
  EXPECT_NEAR(ret.return_time, kTwoPi, 1e-2);
}

TEST(FindLimitCycle, RequiresNonzeroEpsilon) {
  const auto s = load_system("example-r4.json");
  EXPECT_THROW(find_limit_cycle(s, PolarPoint(2.0, {{kPi / 2, 4.5}})), PreconditionError);
}

TEST(FindLimitCycle, VerbatimExampleAtSmallEpsilon) {
  const auto s = load_system("example-r4.json", 1e-3);
  const auto zero = assemble_zero(s);
  ASSERT_TRUE(zero.zero.has_value());
  const auto lc = find_limit_cycle(s, *zero.zero);
  EXPECT_LT(lc.poincare_residual, 1e-9);
  EXPECT_NEAR(lc.period, kTwoPi, 5e-2);
  EXPECT_LT(lc.distance_to_prediction, 0.1);
  EXPECT_GT(lc.distance_to_prediction, 1e-3);
  ASSERT_TRUE(lc.floquet_min_distance_to_one.has_value());
  EXPECT_GT(*lc.floquet_min_distance_to_one, 1e-4);
  EXPECT_TRUE(lc.crossing_ok);
  EXPECT_NEAR(lc.fixed_point(1), 0.0, 1e-15);
}

TEST(FindLimitCycle, SignCycleAuditsCrossings) {
  const auto s = load_system("sign-r4.json", 1e-3);
  const auto zero = assemble_zero(s);
  ASSERT_TRUE(zero.zero.has_value());
  const auto lc = find_limit_cycle(s, *zero.zero);
  EXPECT_TRUE(lc.crossing_ok);
  int switches = 0;
  for (const auto& e : lc.cycle.events) {
    if (e.surface != Surface::SignSwitch) continue;
    ++switches;
    // one-sided dx1/dt with psi = +1 and psi = -1, straight from the system data
    const double linear = (s.unperturbed().row(0) + s.epsilon() * s.perturbation().row(0)).dot(e.x);
    const double plus = linear + s.epsilon() * s.b(1);
    const double minus = linear - s.epsilon() * s.b(1);
    EXPECT_GT(plus * minus, 0.0);
  }
  EXPECT_EQ(switches, 2);
}

TEST(EpsilonSweep, OrderAndErrors) {
  const auto s = load_system("sign-r4.json");
  const auto seed = *assemble_zero(s).zero;
  EXPECT_TRUE(epsilon_sweep(s, {}, seed).empty());
  EXPECT_THROW(epsilon_sweep(s, {1e-3, 1e-2}, seed), PreconditionError);
  const auto rows = epsilon_sweep(s, {1e-2, 1e-3, 0.0}, seed);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(rows[0].result.has_value());
  EXPECT_TRUE(rows[1].result.has_value());
  EXPECT_FALSE(rows[2].result.has_value());
  EXPECT_EQ(rows[2].error_kind, "Precondition");
}

TEST(EpsilonSweep, PeriodDefectScalesWithEpsilon) {
  const auto s = load_system("example-r4.json");
  const auto seed = *assemble_zero(s).zero;
  const auto rows = epsilon_sweep(s, {1e-2, 1e-3, 1e-4}, seed);
  std::vector<double> c;
  for (const auto& row : rows) {
    ASSERT_TRUE(row.result.has_value()) << row.error;
    c.push_back(std::abs(row.result->period - kTwoPi) / std::abs(row.epsilon));
  }
  // C from the two smallest epsilons; every row within a factor 5 of it
  const double ref = c[2];
  for (double ci : c) {
    EXPECT_LT(ci, 5 * ref);
    EXPECT_GT(ci, ref / 5);
  }
}

TEST(TrajectoryCsv, RoundTrip) {
  const auto s = load_system("example-r4.json", 1e-2);
  const auto traj = integrate(s, state({2, 0, 0, 3}), 0.0, 1.0);
  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  const auto back = read_trajectory_csv(ss);
  ASSERT_EQ(back.times.size(), traj.times.size());
  ASSERT_EQ(back.events.size(), traj.events.size());
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    EXPECT_EQ(back.times[k], traj.times[k]);
    EXPECT_EQ(back.states[k], traj.states[k]);
  }
  for (std::size_t k = 0; k < traj.events.size(); ++k) {
    EXPECT_EQ(back.events[k].surface, traj.events[k].surface);
    EXPECT_EQ(back.events[k].t, traj.events[k].t);
  }
}

TEST(TrajectoryCsv, RejectsBadInput) {
  std::stringstream missing("1,2,3\n");
  EXPECT_THROW(read_trajectory_csv(missing), DomainError);
  std::stringstream ragged("t,x1,x2\n0,1\n");
  EXPECT_THROW(read_trajectory_csv(ragged), DomainError);
  std::stringstream out;
  EXPECT_THROW(write_trajectory_csv(out, Trajectory{}), DomainError);
}
