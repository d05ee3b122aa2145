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
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "dplearn/noise.h"
#include "dplearn/normal.h"
#include "dplearn/privacy.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dplearn {
namespace {

// Composite Simpson rule, an oracle for the normal CDF that avoids erfc.
double Simpson(double (*f)(double), double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4 : 2);
  return sum * h / 3;
}

double StdNormalDensity(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi);
}

TEST(NoiseTest, SameSeedSameStream) {
  NoiseSource a = NoiseSource::Seeded(7);
  NoiseSource b = NoiseSource::Seeded(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.NextBits(), b.NextBits());
  NoiseSource c = NoiseSource::Seeded(8);
  EXPECT_NE(NoiseSource::Seeded(7).NextBits(), c.NextBits());
}

TEST(NoiseTest, RepeatedSplitsGiveFreshChildren) {
  NoiseSource root = NoiseSource::Seeded(1);
  NoiseSource c0 = root.Split(0);
  NoiseSource c1 = root.Split(0);
  EXPECT_NE(c0.NextBits(), c1.NextBits());
  NoiseSource again = NoiseSource::Seeded(1);
  EXPECT_EQ(again.Split(0).NextBits(), NoiseSource::Seeded(1).Split(0).NextBits());
}

TEST(NoiseTest, UniformInOpenInterval) {
  NoiseSource s = NoiseSource::Seeded(3);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.Uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(NoiseTest, GaussianMoments) {
  NoiseSource s = NoiseSource::Seeded(11);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double g = s.Gaussian();
    m1 += g;
    m2 += g * g;
    m4 += g * g * g * g;
  }
  EXPECT_NEAR(m1 / n, 0.0, 0.01);
  EXPECT_NEAR(m2 / n, 1.0, 0.015);
  EXPECT_NEAR(m4 / n, 3.0, 0.1);
}

TEST(NoiseTest, LaplaceMoments) {
  NoiseSource s = NoiseSource::Seeded(12);
  const int n = 200000;
  const double b = 2.5;
  double abs_mean = 0, second = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.Laplace(b);
    abs_mean += std::abs(x);
    second += x * x;
  }
  EXPECT_NEAR(abs_mean / n, b, 0.03);
  EXPECT_NEAR(second / n, 2 * b * b, 0.3);
}

TEST(NoiseTest, ZeroNoiseIsDegenerate) {
  NoiseSource z = NoiseSource::ZeroNoise();
  EXPECT_EQ(z.Gaussian(), 0.0);
  EXPECT_EQ(z.Laplace(3.0), 0.0);
  EXPECT_TRUE(z.Split(4).is_zero_noise());
}

TEST(NormalTest, CdfMatchesQuadrature) {
  for (double x : {-4.0, -1.3, 0.0, 0.7, 2.2, 5.0}) {
    const double half = Simpson(StdNormalDensity, 0, std::abs(x), 2000);
    const double oracle = x >= 0 ? 0.5 + half : 0.5 - half;
    EXPECT_NEAR(NormalCdf(x), oracle, 1e-10) << x;
  }
}

TEST(NormalTest, QuantileInvertsCdf) {
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.99}) {
    EXPECT_NEAR(NormalCdf(NormalQuantile(p)) / p, 1.0, 1e-9) << p;
  }
  // Upper tail through the complement.
  const double x = NormalQuantile(1 - 1e-9);
  EXPECT_NEAR(0.5 * std::erfc(x / std::numbers::sqrt2) / 1e-9, 1.0, 1e-6);
  EXPECT_TRUE(std::isinf(NormalQuantile(0.0)));
  EXPECT_TRUE(std::isnan(NormalQuantile(1.5)));
}

TEST(PrivacyBudgetTest, Validation) {
  EXPECT_FALSE(PrivacyBudget::Zcdp(-1).ok());
  EXPECT_FALSE(PrivacyBudget::ApproxDp(1, 1).ok());
  EXPECT_FALSE(PrivacyBudget::PureDp(std::nan("")).ok());
  EXPECT_TRUE(PrivacyBudget::ApproxDp(1, 1e-6).ok());
}

TEST(PrivacyBudgetTest, ZcdpComposesAdditively) {
  const std::vector<double> rhos = {0.1, 0.25, 0.05};
  ASSERT_OK_AND_ASSIGN(double total, ComposeZcdp(rhos));
  EXPECT_DOUBLE_EQ(total, 0.4);
  const std::vector<double> bad = {0.1, -0.2};
  EXPECT_FALSE(ComposeZcdp(bad).ok());
}

TEST(PrivacyBudgetTest, ZcdpConversion) {
  // rho + 2 sqrt(rho ln(1/delta)) computed by hand for rho = 0.5, delta = e^-8.
  ASSERT_OK_AND_ASSIGN(PrivacyBudget b, ZcdpToApproxDp(0.5, std::exp(-8.0)));
  EXPECT_NEAR(b.epsilon(), 0.5 + 2 * 2, 1e-12);
  EXPECT_DOUBLE_EQ(PureDpToZcdp(2.0), 2.0);
}

TEST(PrivacyBudgetTest, BasicAndAdvancedComposition) {
  ASSERT_OK_AND_ASSIGN(PrivacyBudget a, PrivacyBudget::ApproxDp(0.1, 1e-6));
  std::vector<PrivacyBudget> many(100, a);
  ASSERT_OK_AND_ASSIGN(PrivacyBudget basic, ComposeApproxDp(many));
  EXPECT_NEAR(basic.epsilon(), 10.0, 1e-9);
  EXPECT_NEAR(basic.delta(), 1e-4, 1e-15);
  ASSERT_OK_AND_ASSIGN(PrivacyBudget adv, ComposeApproxDpAdvanced(many, 1e-6));
  EXPECT_NEAR(adv.epsilon(), 0.1 * std::sqrt(600 * std::log(1e6)), 1e-9);
  EXPECT_NEAR(adv.delta(), 1e-6 + 1e-4, 1e-15);
  ASSERT_OK_AND_ASSIGN(PrivacyBudget z, PrivacyBudget::Zcdp(1));
  std::vector<PrivacyBudget> mixed = {a, z};
  EXPECT_FALSE(ComposeApproxDp(mixed).ok());
}

TEST(BudgetLedgerTest, TotalsAndPrefixes) {
  BudgetLedger inner;
  inner.Record("a", *PrivacyBudget::Zcdp(0.2));
  inner.Record("b", *PrivacyBudget::Zcdp(0.3));
  BudgetLedger outer;
  outer.Record("x", *PrivacyBudget::Zcdp(0.5));
  outer.Append(inner, "inner/");
  ASSERT_OK_AND_ASSIGN(double total, outer.TotalRho());
  EXPECT_DOUBLE_EQ(total, 1.0);
  EXPECT_EQ(outer.charges()[2].label, "inner/b");
  outer.Record("dp", *PrivacyBudget::PureDp(1));
  EXPECT_FALSE(outer.TotalRho().ok());
}

TEST(GaussianMechanismTest, NoiseScale) {
  EXPECT_DOUBLE_EQ(GaussianMechanismStddev(2.0, 0.5), 2.0);
  NoiseSource s = NoiseSource::Seeded(5);
  const Eigen::VectorXd v = Eigen::VectorXd::Zero(200000);
  ASSERT_OK_AND_ASSIGN(Eigen::VectorXd out, GaussianMechanism(v, 3.0, 2.0, s));
  const double var = out.squaredNorm() / out.size();
  EXPECT_NEAR(var, 9.0 / 4.0, 0.03);
}

TEST(GaussianMechanismTest, ZeroNoiseAndErrors) {
  NoiseSource z = NoiseSource::ZeroNoise();
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(4, 0, 3);
  ASSERT_OK_AND_ASSIGN(Eigen::VectorXd out, GaussianMechanism(v, 1, 1, z));
  EXPECT_EQ(out, v);
  EXPECT_FALSE(GaussianMechanism(v, 1, 0, z).ok());
  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
  asym(0, 1) = 1;
  EXPECT_FALSE(GaussianMechanismSymmetric(asym, 1, 1, z).ok());
}

TEST(GaussianMechanismTest, SymmetricNoiseIsSymmetricWithRightScale) {
  NoiseSource s = NoiseSource::Seeded(6);
  const int d = 300;
  ASSERT_OK_AND_ASSIGN(
      Eigen::MatrixXd out,
      GaussianMechanismSymmetric(Eigen::MatrixXd::Zero(d, d), 1.0, 0.5, s));
  EXPECT_TRUE(out.isApprox(out.transpose()));
  const double var = out.squaredNorm() / (d * d);
  EXPECT_NEAR(var, 1.0, 0.02);
}

}  // namespace
}  // namespace dplearn
