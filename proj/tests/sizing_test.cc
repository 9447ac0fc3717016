// Copyright 2026 The bfce Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bfce/sizing.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include <gtest/gtest.h>

#include "bfce/error.h"
#include "bfce/estimator.h"
#include "bfce/fpp.h"

namespace bfce {
namespace {

// Cumulative error sum evaluated in extended precision.
long double Objective(uint64_t m, uint32_t k, uint64_t s_max) {
  long double sum = 0;
  for (uint64_t s = 0; s <= s_max; ++s) {
    const long double t = std::pow(1.0L - std::exp(-static_cast<long double>(k) * s / m), k);
    sum += t / (1 - t);
  }
  return sum;
}

// Argmin over a window twice as wide as the library's scan.
uint32_t BruteForceKOpt(uint64_t m, uint64_t s_max) {
  const double ratio = static_cast<double>(m) / static_cast<double>(s_max);
  const auto limit = static_cast<uint64_t>(std::ceil(4 * ratio * std::log(2.0))) + 16;
  uint32_t best_k = 1;
  long double best = Objective(m, 1, s_max);
  for (uint32_t k = 2; k <= std::min(m, limit); ++k) {
    const long double e = Objective(m, k, s_max);
    if (e < best * (1 - 1e-12L)) {
      best = e;
      best_k = k;
    }
  }
  return best_k;
}

TEST(ClassicalSizeTest, ReferenceConfiguration) {
  EXPECT_EQ(ClassicalSize(17000, 0.01), (FilterSize{162945, 6}));
  EXPECT_EQ(ClassicalSize(1, 0.5), (FilterSize{1, 1}));
}

TEST(ClassicalSizeTest, AchievesTarget) {
  for (double target : {0.01, 0.001}) {
    for (uint64_t s_max : {1000ull, 10000ull}) {
      const FilterSize size = ClassicalSize(s_max, target);
      EXPECT_LE(ApproxFpp(size.m, size.k, s_max), 1.05 * target)
          << "s_max=" << s_max << " target=" << target;
    }
  }
}

TEST(ClassicalSizeTest, RejectsInvalidInput) {
  EXPECT_THROW(ClassicalSize(0, 0.01), Error);
  EXPECT_THROW(ClassicalSize(10, 0.0), Error);
  EXPECT_THROW(ClassicalSize(10, 1.0), Error);
}

TEST(CumulativeErrorTest, MatchesExtendedPrecisionSum) {
  for (uint32_t k = 1; k <= 10; ++k) {
    EXPECT_NEAR(CumulativeCountingError(160000, k, 17000),
                static_cast<double>(Objective(160000, k, 17000)), 1e-9);
  }
}

TEST(CumulativeErrorTest, DecreasesWithM) {
  for (uint32_t k = 1; k <= 8; ++k) {
    double prev = CumulativeCountingError(1000, k, 500);
    for (uint64_t m = 1100; m <= 20000; m += 100) {
      const double e = CumulativeCountingError(m, k, 500);
      EXPECT_LT(e, prev) << "m=" << m << " k=" << k;
      prev = e;
    }
  }
}

TEST(KOptCumulativeTest, MatchesBruteForce) {
  const uint64_t cases[][2] = {{160000, 17000}, {162945, 17000}, {1000, 100}, {5000, 100},
                               {64, 10},        {1, 1},          {10, 3},    {100000, 1000}};
  for (const auto& c : cases) {
    EXPECT_EQ(KOptCumulative(c[0], c[1]), BruteForceKOpt(c[0], c[1]))
        << "m=" << c[0] << " s_max=" << c[1];
  }
}

TEST(KOptCumulativeTest, IsLocalMinimum) {
  for (uint64_t m : {2000ull, 30000ull, 160000ull}) {
    const uint64_t s_max = 1700;
    const uint32_t k = KOptCumulative(m, s_max);
    const double at = CumulativeCountingError(m, k, s_max);
    if (k > 1) {
      EXPECT_LE(at, CumulativeCountingError(m, k - 1, s_max));
    }
    EXPECT_LE(at, CumulativeCountingError(m, k + 1, s_max));
  }
}

TEST(KOptCumulativeTest, NegligibleErrorForOversizedFilter) {
  const uint32_t k = KOptCumulative(1000000, 10);
  const double at = CumulativeCountingError(1000000, k, 10);
  EXPECT_LT(at, 1e-9);
  for (uint32_t other = 1; other <= KOptScanLimit(1000000, 10); other += 97) {
    EXPECT_GE(CumulativeCountingError(1000000, other, 10), at);
  }
}

TEST(KOptCumulativeTest, ScanLimit) {
  EXPECT_EQ(KOptScanLimit(162945, 17000), 22u);
  EXPECT_EQ(KOptScanLimit(3, 1000), 3u);
}

TEST(MeanErrorUpperBoundTest, ReferenceConfiguration) {
  const double t = ApproxFpp(162945, 6, 17000);
  const double bound = MeanErrorUpperBound(162945, 6, 17000);
  EXPECT_NEAR(bound, 17000 * t / (1 - t), 1e-9);
  EXPECT_NEAR(bound, 173.5, 1.0);
  EXPECT_GE(bound, CumulativeCountingError(162945, 6, 17000));
  EXPECT_EQ(MeanErrorUpperBound(100, 3, 0), 0.0);
  EXPECT_THROW(MeanErrorUpperBound(1, 1, 100), Error);
}

TEST(MeanErrorUpperBoundTest, BoundsAccumulatedSums) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const uint64_t m = 50 + rng() % 5000;
    const auto k = static_cast<uint32_t>(1 + rng() % 6);
    const uint64_t s_max = 1 + rng() % (m / (2 * k));
    CardinalityCounter c(m, k, rng());
    for (uint64_t x = 0; c.filter().s() < s_max; ++x) c.Add(Mix64(x));
    EXPECT_LE(c.accumulator().sum_mean(), MeanErrorUpperBound(m, k, s_max))
        << "m=" << m << " k=" << k << " s_max=" << s_max;
    EXPECT_LE(CumulativeCountingError(m, k, s_max), MeanErrorUpperBound(m, k, s_max));
  }
}

void ExpectBudgetCertificate(uint64_t s_max, double budget) {
  const FilterSize size = SizeForErrorBudget(s_max, budget);
  EXPECT_EQ(size.k, KOptCumulative(size.m, s_max));
  EXPECT_LE(CumulativeCountingError(size.m, size.k, s_max), budget);
  if (size.m > 1) {
    const uint64_t below = size.m - 1;
    EXPECT_GT(CumulativeCountingError(below, KOptCumulative(below, s_max), s_max), budget);
  }
}

TEST(SizeForErrorBudgetTest, Certificates) {
  ExpectBudgetCertificate(17000, 31.3);
  ExpectBudgetCertificate(1000, 1.0);
  ExpectBudgetCertificate(100, 0.01);
  ExpectBudgetCertificate(1, 0.5);
}

TEST(SizeForErrorBudgetTest, LargeBudget) { ExpectBudgetCertificate(1000, 10000.0); }

TEST(SizeForErrorBudgetTest, RejectsInvalidInput) {
  EXPECT_THROW(SizeForErrorBudget(0, 1.0), Error);
  EXPECT_THROW(SizeForErrorBudget(10, 0.0), Error);
  EXPECT_THROW(SizeForErrorBudget(10, -1.0), Error);
}

}  // namespace
}  // namespace bfce
