#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "plcycles/averaging.hpp"
#include "plcycles/oracle_check.hpp"

using namespace plcycles;

namespace {

json fixture() {
  return load_json_file(std::string(PLCYCLES_SOURCE_DIR) + "/tests/fixtures/oracle_values.json");
}

Nonlinearity nl_of(const std::string& s) {
  return s == "sign" ? Nonlinearity::Sign : Nonlinearity::Saturation;
}

}  // namespace

// The fixture holds quadrature values written by `plcycles oracle-check --write`.
TEST(OracleFixture, ClosedFormsMatchStoredOracleValues) {
  const auto doc = fixture();
  ASSERT_GT(doc["records"].size(), 200u);
  for (const auto& rec : doc["records"]) {
    const auto& in = rec["inputs"];
    const int w = in["harmonic"].get<int>();
    const double r = in["r"].get<double>();
    const double expected = rec["oracle"].get<double>();
    const double closed = in["integral"] == "J"
                              ? 0.0
                              : harmonic_integral(nl_of(in["nonlinearity"].get<std::string>()), w, r);
    EXPECT_NEAR(closed, expected, 1e-8) << rec["case"].get<std::string>();
  }
}

TEST(OracleFixture, OracleReproducesFixture) {
  const auto mismatches = compare_fixture(fixture(), run_oracle_check());
  for (const auto& m : mismatches) ADD_FAILURE() << m.label << " " << m.expected << " " << m.actual;
}

TEST(OracleFixture, NamedValues) {
  // Cases the closed forms are most easily gotten wrong on.
  const auto doc = fixture();
  auto value = [&](const std::string& label) {
    for (const auto& rec : doc["records"]) {
      if (rec["case"] == label) return rec["oracle"].get<double>();
    }
    ADD_FAILURE() << "missing " << label;
    return std::nan("");
  };
  EXPECT_NEAR(value("I:saturation:odd:j=2:r=2"), -std::sqrt(3.0) / 2.0, 1e-10);
  EXPECT_NEAR(value("I:saturation:consecutive:j=3:r=2"), -std::sqrt(3.0) / 2.0, 1e-10);
  EXPECT_NEAR(value("I:saturation:odd:j=1:r=2"), 2 * kPi / 3 + std::sqrt(3.0), 1e-10);
  EXPECT_NEAR(value("I:sign:odd:j=2:r=0.5"), -4.0 / 3.0, 1e-10);
  EXPECT_NEAR(value("I:sign:consecutive:j=2:r=3"), 0.0, 1e-10);
  EXPECT_NEAR(value("J:saturation:odd:j=3:r=5"), 0.0, 1e-10);
}

TEST(OracleCheck, DefaultGridPasses) {
  const auto summary = run_oracle_check();
  EXPECT_TRUE(summary.passed());
  EXPECT_LT(summary.max_deviation, 1e-8);
  EXPECT_EQ(summary.rows.size(), 2u * 2 * 2 * 4 * 9);
}

TEST(OracleCheck, WorstIsSorted) {
  const auto worst = run_oracle_check().worst(5);
  ASSERT_EQ(worst.size(), 5u);
  for (std::size_t k = 1; k < worst.size(); ++k) {
    EXPECT_GE(worst[k - 1].deviation(), worst[k].deviation());
  }
}

TEST(OracleCheck, RejectsBadGrid) {
  OracleGrid grid;
  grid.radii = {0.0};
  EXPECT_THROW(run_oracle_check(grid), DomainError);
  EXPECT_THROW(run_oracle_check({}, 0.0), DomainError);
}
