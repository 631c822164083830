#include <gtest/gtest.h>

#include <random>

#include "plcycles/model.hpp"
#include "support.hpp"

using namespace plcycles;

TEST(UnperturbedMatrix, SingleOddBlock) {
  Matrix expected(2, 2);
  expected << 0, -1, 1, 0;
  EXPECT_EQ(unperturbed_matrix(1, FrequencyFamily::OddFrequencies), expected);
}

TEST(UnperturbedMatrix, TwoBlockFrequencies) {
  const Matrix odd = unperturbed_matrix(2, FrequencyFamily::OddFrequencies);
  EXPECT_EQ(odd(2, 3), -3.0);
  EXPECT_EQ(odd(3, 2), 3.0);
  const Matrix cons = unperturbed_matrix(2, FrequencyFamily::ConsecutiveFrequencies);
  EXPECT_EQ(cons(2, 3), -2.0);
  EXPECT_EQ(cons(3, 2), 2.0);
}

TEST(UnperturbedMatrix, OffBlockEntriesVanish) {
  for (auto family : {FrequencyFamily::OddFrequencies, FrequencyFamily::ConsecutiveFrequencies}) {
    const Matrix m = unperturbed_matrix(4, family);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        if (i / 2 != j / 2) {
          EXPECT_EQ(m(i, j), 0.0);
        }
      }
    }
    // skew-symmetric: x' = A0 x preserves every block radius
    EXPECT_TRUE((m + m.transpose()).isZero(0.0));
  }
}

TEST(UnperturbedMatrix, RejectsNonPositiveN) {
  EXPECT_THROW(unperturbed_matrix(0, FrequencyFamily::OddFrequencies), DomainError);
}

TEST(Nonlinearities, Saturation) {
  EXPECT_EQ(saturation(-3.0), -1.0);
  EXPECT_EQ(saturation(-1.0), -1.0);
  EXPECT_EQ(saturation(0.25), 0.25);
  EXPECT_EQ(saturation(1.0), 1.0);
  EXPECT_EQ(saturation(7.0), 1.0);
}

TEST(Nonlinearities, SignIsOddWithZeroAtOrigin) {
  EXPECT_EQ(sign_nonlinearity(-0.1), -1.0);
  EXPECT_EQ(sign_nonlinearity(0.0), 0.0);
  EXPECT_EQ(sign_nonlinearity(2.0), 1.0);
}

TEST(Nonlinearities, OddSymmetryProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng);
    EXPECT_EQ(saturation(-x), -saturation(x));
    EXPECT_EQ(sign_nonlinearity(-x), -sign_nonlinearity(x));
    EXPECT_LE(std::abs(saturation(x)), 1.0);
  }
}

TEST(ControlSystem, ValidatesShapes) {
  Matrix a = Matrix::Zero(4, 4);
  Vector b = Vector::Ones(4);
  EXPECT_NO_THROW(ControlSystem(2, FrequencyFamily::OddFrequencies, a, b, Nonlinearity::Sign));
  EXPECT_THROW(ControlSystem(2, FrequencyFamily::OddFrequencies, Matrix::Zero(4, 3), b,
                             Nonlinearity::Sign),
               DomainError);
  EXPECT_THROW(ControlSystem(2, FrequencyFamily::OddFrequencies, a, Vector::Ones(3),
                             Nonlinearity::Sign),
               DomainError);
  EXPECT_THROW(ControlSystem(2, FrequencyFamily::OddFrequencies, a, Vector::Zero(4),
                             Nonlinearity::Sign),
               DomainError);
  EXPECT_THROW(ControlSystem(0, FrequencyFamily::OddFrequencies, Matrix(0, 0), Vector(0),
                             Nonlinearity::Sign),
               DomainError);
}

TEST(ControlSystem, ErrorsUseOneBasedIndices) {
  Matrix a = Matrix::Zero(2, 2);
  a(1, 0) = std::nan("");
  try {
    ControlSystem(1, FrequencyFamily::OddFrequencies, a, Vector::Ones(2), Nonlinearity::Sign);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("A[2][1]"), std::string::npos);
  }
}

TEST(ControlSystem, OneBasedAccessors) {
  const auto s = plcycles::testing::load_system("example-r4.json");
  EXPECT_EQ(s.a(1, 2), 1.0);
  EXPECT_EQ(s.a(3, 4), -1.0);
  EXPECT_EQ(s.b(2), 1.0);
  EXPECT_EQ(s.frequency(2), 3);
  EXPECT_EQ(s.epsilon(), 0.0);
  EXPECT_EQ(s.with_epsilon(0.5).epsilon(), 0.5);
}

TEST(VectorField, ZeroEpsilonIsTheCenter) {
  const auto s = plcycles::testing::load_system("example-r4.json");
  CartesianState x(4);
  x << 2, 0, 0, 3;
  Vector expected(4);
  expected << 0, 2, -9, 0;
  EXPECT_TRUE(vector_field(s, x).isApprox(expected));
}

TEST(VectorField, PerturbationTerm) {
  const auto s = plcycles::testing::load_system("example-r4.json", 0.1);
  CartesianState x(4);
  x << 0.5, 0.2, -1, 1;
  const Vector expected =
      s.unperturbed() * x + 0.1 * (s.perturbation() * x + saturation(0.5) * s.forcing());
  EXPECT_TRUE(vector_field(s, x).isApprox(expected, 1e-15));
  EXPECT_THROW(vector_field(s, CartesianState::Zero(3)), DomainError);
}
