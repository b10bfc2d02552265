// Copyright 2026 The crowdbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tests for adoption.hpp.

#include "crowdbench/adoption.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "reference_tables.hpp"

namespace crowdbench {
namespace {

using testing::kBenchmarkRows;
using testing::kThresholdExposures;
using testing::kThresholdRows;

TEST(DeltaFromRhoTest, Examples) {
  EXPECT_EQ(delta_from_rho(1.0, 0.3), 0.0);
  EXPECT_EQ(delta_from_rho(1.5, 0.7), 0.0);
  EXPECT_NEAR(delta_from_rho(0.372, 0.706), 0.1846, 1e-4);
  EXPECT_NEAR(delta_from_rho(0.372, 0.706), 0.186, 0.002);
  EXPECT_THROW(delta_from_rho(0.5, 1.0), Error);
}

TEST(DeltaFromRhoTest, BenchmarkRowsAreConsistent) {
  for (const auto& row : kBenchmarkRows) {
    EXPECT_NEAR(delta_from_rho(row.rho, row.kappa_h), row.delta, 0.006)
        << row.model << " " << row.task;
    EXPECT_NEAR((1.0 - row.kappa_a) / (1.0 - row.kappa_h), row.rho, 0.006)
        << row.model << " " << row.task;
    EXPECT_NEAR(row.kappa_a - row.kappa_h, row.delta, 0.0015);
  }
}

TEST(RedundancyCostTest, Examples) {
  for (std::uint64_t x : {0u, 1u, 10u, 1000u}) {
    EXPECT_EQ(redundancy_cost(1.0, 0.0, x), 0.0);
  }
  EXPECT_NEAR(redundancy_cost(1.0, 0.186, 5), 0.605, 5e-4);
  EXPECT_NEAR(redundancy_cost(2.0, 0.1, 10000), 2.0, 1e-6);
  EXPECT_EQ(redundancy_cost(0.0, 0.3, 4), 0.0);
  EXPECT_THROW(redundancy_cost(-1.0, 0.1, 1), Error);
  EXPECT_THROW(redundancy_cost(1.0, -0.1, 1), Error);
}

TEST(RedundancyCostTest, MassAdoptionLimit) {
  for (double delta : {0.01, 0.1, 0.331}) {
    EXPECT_NEAR(redundancy_cost(1.5, delta, 100000), 1.5, 1e-9);
    double prev = 0.0;
    for (std::uint64_t x = 0; x < 200; ++x) {
      const double c = redundancy_cost(1.5, delta, x);
      EXPECT_GE(c, prev);
      EXPECT_LE(c, 1.5);
      prev = c;
    }
  }
}

TEST(CriticalBenefitTest, Examples) {
  EXPECT_NEAR(critical_benefit(0.331, 1), 0.282, 5e-4);
  EXPECT_NEAR(critical_benefit(0.132, 10), 0.733, 5e-4);
  EXPECT_EQ(critical_benefit(0.0, 25), 0.0);
  EXPECT_EQ(critical_benefit(0.2, 0), 0.0);
}

TEST(CriticalBenefitTest, ThresholdTable) {
  for (const auto& row : kThresholdRows) {
    for (std::size_t k = 0; k < kThresholdExposures.size(); ++k) {
      EXPECT_NEAR(critical_benefit(row.delta, kThresholdExposures[k]),
                  row.thresholds[k], 1e-3)
          << "delta " << row.delta << " X " << kThresholdExposures[k];
    }
  }
}

TEST(CriticalBenefitTest, MonotoneInExposureDeltaAndRho) {
  const double h = 1e-6;
  for (int i = 0; i <= 20; ++i) {
    const double delta = 0.5 * i / 20.0;
    for (std::uint64_t x = 0; x < 40; ++x) {
      EXPECT_GE(critical_benefit(delta, x + 1) - critical_benefit(delta, x),
                -1e-12);
      EXPECT_GE(critical_benefit(delta + h, x) - critical_benefit(delta, x),
                -1e-12);
    }
  }
  for (int i = 0; i < 20; ++i) {
    const double rho = 0.05 * i;
    for (double kh : {0.2, 0.6, 0.9}) {
      EXPECT_LE(critical_benefit(delta_from_rho(rho + h, kh), 10),
                critical_benefit(delta_from_rho(rho, kh), 10) + 1e-12);
    }
  }
}

TEST(AdoptionRationalTest, ComparesBenefitWithThreshold) {
  AdoptionScenario s;
  s.gamma = 2.0;
  s.delta = 0.186;
  s.exposure = 5;
  s.private_benefit = 1.3;  // threshold is 2 * 0.605 = 1.21
  EXPECT_TRUE(adoption_rational(s));
  s.private_benefit = 1.1;
  EXPECT_FALSE(adoption_rational(s));
  s.delta = 0.0;
  s.private_benefit = 1e-9;
  EXPECT_TRUE(adoption_rational(s));
  s.adoption_prob = 1.5;
  EXPECT_THROW(adoption_rational(s), Error);
}

TEST(ExpectedCostTest, Examples) {
  EXPECT_EQ(expected_cost(1.0, 0.3, 20, 0.0), 0.0);
  EXPECT_NEAR(expected_cost(1.0, 0.186, 6, 1.0), 0.605, 5e-4);
  EXPECT_EQ(expected_cost(1.0, 0.186, 6, 1.0), redundancy_cost(1.0, 0.186, 5));
  EXPECT_EQ(expected_cost(1.0, 0.2, 1, 0.7), 0.0);
  EXPECT_THROW(expected_cost(1.0, 0.2, 0, 0.5), Error);
  EXPECT_THROW(expected_cost(1.0, 0.2, 5, -0.1), Error);
}

TEST(ExpectedCostTest, MatchesBinomialSum) {
  // Direct summation over the binomial pmf.
  for (std::uint64_t n : {2u, 7u, 30u}) {
    for (double p : {0.1, 0.5, 0.9}) {
      for (double delta : {0.05, 0.3}) {
        const std::uint64_t m = n - 1;
        double sum = 0.0;
        for (std::uint64_t x = 0; x <= m; ++x) {
          const double log_pmf = std::lgamma(m + 1.0) - std::lgamma(x + 1.0) -
                                 std::lgamma(m - x + 1.0) + x * std::log(p) +
                                 (m - x) * std::log1p(-p);
          sum += std::exp(log_pmf) * (1.0 - std::exp(-(double)x * delta));
        }
        EXPECT_NEAR(expected_cost(1.7, delta, n, p), 1.7 * sum, 1e-12);
      }
    }
  }
}

TEST(ExpectedCostTest, ExactAtFullAdoptionOnGrid) {
  for (int i = 0; i <= 20; ++i) {
    for (std::uint64_t n = 1; n < 60; n += 7) {
      const double delta = 0.05 * i;
      EXPECT_EQ(expected_cost(1.3, delta, n, 1.0),
                redundancy_cost(1.3, delta, n - 1));
    }
  }
}

TEST(MonteCarloTest, DegenerateProbabilitiesAreExact) {
  const auto zero = monte_carlo_expected_cost(1.0, 0.2, 50, 0.0, 10000, 1);
  EXPECT_EQ(zero.estimate, 0.0);
  EXPECT_EQ(zero.standard_error, 0.0);
  const auto one = monte_carlo_expected_cost(1.0, 0.2, 50, 1.0, 10000, 1);
  EXPECT_EQ(one.estimate, expected_cost(1.0, 0.2, 50, 1.0));
  EXPECT_EQ(one.standard_error, 0.0);
}

TEST(MonteCarloTest, AgreesWithClosedForm) {
  const auto mc = monte_carlo_expected_cost(1.0, 0.2, 50, 0.3, 100000, 3);
  const double exact = expected_cost(1.0, 0.2, 50, 0.3);
  EXPECT_NEAR(mc.estimate, exact, 0.005);
  EXPECT_LE(std::abs(mc.estimate - exact), 4 * mc.standard_error);
  EXPECT_GT(mc.standard_error, 0.0);
}

TEST(MonteCarloTest, DeterministicAcrossWorkers) {
  const auto a = monte_carlo_expected_cost(1.0, 0.1, 20, 0.4, 50000, 9, 1);
  const auto b = monte_carlo_expected_cost(1.0, 0.1, 20, 0.4, 50000, 9, 4);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(MonteCarloTest, RejectsTooFewTrials) {
  EXPECT_THROW(monte_carlo_expected_cost(1.0, 0.1, 20, 0.4, 9999, 1), Error);
}

TEST(ParityCheckTest, Examples) {
  const ParityReport equal = parity_check(0.5, 0.5);
  EXPECT_EQ(equal.delta, 0.0);
  EXPECT_EQ(equal.rho, 1.0);
  EXPECT_TRUE(equal.parity);

  const ParityReport slogans = parity_check(0.597, 0.928);
  EXPECT_NEAR(slogans.delta, 0.331, 1e-12);
  EXPECT_NEAR(slogans.rho, 0.179, 5e-4);
  EXPECT_FALSE(slogans.parity);

  const ParityReport above = parity_check(0.6, 0.4);
  EXPECT_EQ(above.delta, 0.0);
  EXPECT_GT(above.rho, 1.0);
  EXPECT_TRUE(above.parity);

  EXPECT_THROW(parity_check(1.0, 0.5), Error);
}

TEST(ParityCheckTest, DenseGridHasNoViolations) {
  int violations = 0;
  for (int i = 0; i <= 999; ++i) {
    for (int j = 0; j <= 1000; ++j) {
      const ParityReport r = parity_check(i / 1000.0, j / 1000.0);
      if ((r.delta == 0.0) != (r.rho >= 1.0)) ++violations;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(ThresholdTableTest, Layout) {
  const auto rows = threshold_table({{"GPT-5.4", "slogans"}, {"x", "y"}},
                                    {0.331, 0.0}, {1, 5, 10, 25});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].model, "GPT-5.4");
  EXPECT_EQ(rows[0].task, "slogans");
  ASSERT_EQ(rows[0].thresholds.size(), 4u);
  EXPECT_NEAR(rows[0].thresholds[3], 1.0, 5e-4);
  EXPECT_EQ(rows[1].thresholds, (std::vector<double>{0, 0, 0, 0}));
  EXPECT_THROW(threshold_table({{"a", "b"}}, {0.1, 0.2}, {1}), Error);
}

}  // namespace
}  // namespace crowdbench
