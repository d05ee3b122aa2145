//
// Copyright 2026 The dplearn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <cmath>
#include <optional>
#include <vector>

#include "dplearn/histogram.h"
#include "dplearn/noise.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dplearn {
namespace {

std::vector<BucketKey> Keys(const std::vector<int64_t>& idx) {
  std::vector<BucketKey> out;
  for (int64_t i : idx) out.push_back(BucketKey::Of(i));
  return out;
}

TEST(BucketKeyTest, BottomSortsFirst) {
  EXPECT_LT(BucketKey::Bottom(), BucketKey::Of(-100));
  EXPECT_LT(BucketKey::Of(-1), BucketKey::Of(3));
  EXPECT_EQ(BucketKey::Of(2), BucketKey::Of(2));
  EXPECT_EQ(BucketKey::Bottom().DebugString(), "bottom");
}

TEST(StableHistogramTest, ZeroNoiseGivesExactFrequencies) {
  const std::vector<BucketKey> data = Keys({1, 1, 2, 5, 5, 5, -3, 1});
  NoiseSource z = NoiseSource::ZeroNoise();
  ASSERT_OK_AND_ASSIGN(HistogramResult h,
                       StableHistogram(data, 1.0, 0.01, 0.1, z));
  EXPECT_DOUBLE_EQ(h.entries.at(BucketKey::Of(1)), 3.0 / 8);
  EXPECT_DOUBLE_EQ(h.entries.at(BucketKey::Of(5)), 3.0 / 8);
  EXPECT_DOUBLE_EQ(h.entries.at(BucketKey::Of(-3)), 1.0 / 8);
  double total = 0;
  for (const auto& [k, v] : h.entries) total += v;
  EXPECT_DOUBLE_EQ(total, 1.0);
}

TEST(StableHistogramTest, RejectsBadParameters) {
  const std::vector<BucketKey> data = Keys({1, 2, 3, 4});
  NoiseSource s = NoiseSource::Seeded(1);
  EXPECT_FALSE(StableHistogram(data, 1.0, 0.25, 0.1, s).ok());  // delta*n = 1
  EXPECT_FALSE(StableHistogram(data, 0.0, 0.01, 0.1, s).ok());
  EXPECT_FALSE(StableHistogram({}, 1.0, 0.01, 0.1, s).ok());
}

// A singleton bucket is released iff its Laplace noise exceeds
// 2 ln(2/delta) / (eps n), which happens with probability delta / 4.
// Reference values computed separately in double precision.
TEST(HistogramFormulaTest, MatchesReferenceValues) {
  EXPECT_NEAR(StableHistogramAccuracy(1000, 1, 1e-4, 0.05),
              0.07922790042028902, 1e-15);
  EXPECT_NEAR(StableHistogramThreshold(1000, 1, 1e-4), 0.020806975105072255,
              1e-15);
  EXPECT_NEAR(StableHistogramNoiseScale(1000, 1), 0.002, 1e-15);
  EXPECT_NEAR(GaussianHistogramAccuracy(2000, 40, 0.5, 0.05),
              0.0038412911652796833, 1e-15);
}

TEST(StableHistogramTest, SingletonReleaseRateMatchesLaplaceTail) {
  const int64_t n = 10;
  const double eps = 1.0, delta = 0.08;
  std::vector<int64_t> idx(n - 1, 0);
  idx.push_back(7);
  const std::vector<BucketKey> data = Keys(idx);
  NoiseSource s = NoiseSource::Seeded(21);
  const int trials = 100000;
  int released = 0;
  for (int t = 0; t < trials; ++t) {
    ASSERT_OK_AND_ASSIGN(HistogramResult h,
                         StableHistogram(data, eps, delta, 0.1, s));
    released += h.entries.count(BucketKey::Of(7));
  }
  const double p = delta / 4;
  const double se = std::sqrt(p * (1 - p) / trials);
  EXPECT_NEAR(static_cast<double>(released) / trials, p, 4 * se);
}

TEST(StableHistogramTest, AccuracyBoundHolds) {
  NoiseSource s = NoiseSource::Seeded(22);
  std::vector<int64_t> idx;
  for (int i = 0; i < 2000; ++i) idx.push_back(i % 7 == 0 ? 1 : i % 3);
  const std::vector<BucketKey> data = Keys(idx);
  std::map<int64_t, double> truth;
  for (int64_t i : idx) truth[i] += 1.0 / idx.size();
  const double beta = 0.1;
  int failures = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    ASSERT_OK_AND_ASSIGN(HistogramResult h,
                         StableHistogram(data, 0.5, 1e-6, beta, s));
    for (const auto& [i, f] : truth) {
      auto it = h.entries.find(BucketKey::Of(i));
      const double got = it == h.entries.end() ? 0 : it->second;
      if (std::abs(got - f) > h.accuracy_bound) {
        ++failures;
        break;
      }
    }
  }
  EXPECT_LE(failures, beta * trials);
}

TEST(GaussianHistogramTest, ReportsWholeUniverseWithRightNoise) {
  const int64_t n = 50;
  std::vector<int64_t> idx(n, 0);
  const std::vector<BucketKey> data = Keys(idx);
  const std::vector<BucketKey> universe = Keys({-1, 0, 1, 2});
  NoiseSource s = NoiseSource::Seeded(23);
  const double rho = 0.5;
  double sq = 0;
  int count = 0;
  for (int t = 0; t < 20000; ++t) {
    ASSERT_OK_AND_ASSIGN(HistogramResult h,
                         GaussianHistogram(data, universe, rho, 0.1, s));
    ASSERT_EQ(h.entries.size(), 4u);
    for (const auto& [k, v] : h.entries) {
      const double truth = k == BucketKey::Of(0) ? 1.0 : 0.0;
      sq += (v - truth) * (v - truth);
      ++count;
    }
  }
  // Sensitivity sqrt(2)/n gives variance 1 / (n^2 rho).
  EXPECT_NEAR(sq / count * n * n * rho, 1.0, 0.03);
}

TEST(GaussianHistogramTest, RejectsKeysOutsideUniverse) {
  NoiseSource s = NoiseSource::Seeded(1);
  const std::vector<BucketKey> data = Keys({0, 5});
  const std::vector<BucketKey> universe = Keys({0, 1});
  EXPECT_FALSE(GaussianHistogram(data, universe, 1, 0.1, s).ok());
  const std::vector<BucketKey> dup = Keys({0, 0});
  EXPECT_FALSE(GaussianHistogram(Keys({0}), dup, 1, 0.1, s).ok());
}

TEST(ArgmaxBucketTest, TiesAndThreshold) {
  HistogramResult h;
  h.entries[BucketKey::Bottom()] = 0.9;
  h.entries[BucketKey::Of(4)] = 0.3;
  h.entries[BucketKey::Of(2)] = 0.3;
  h.entries[BucketKey::Of(9)] = 0.1;
  std::optional<BucketKey> best = ArgmaxBucket(h, 0.25);
  ASSERT_TRUE(best.has_value());
  EXPECT_EQ(*best, BucketKey::Of(2));
  EXPECT_FALSE(ArgmaxBucket(h, 0.31).has_value());
}

}  // namespace
}  // namespace dplearn
