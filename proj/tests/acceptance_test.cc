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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Runtime limits are part of each criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "absl/strings/str_cat.h"
#include "dplearn/attacks.h"
#include "dplearn/covariance.h"
#include "dplearn/covariance_unbounded.h"
#include "dplearn/harness.h"
#include "dplearn/linalg.h"
#include "dplearn/mean.h"
#include "dplearn/metrics.h"
#include "dplearn/noise.h"
#include "dplearn/product.h"
#include "dplearn/sampling.h"

namespace dplearn {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Bails out of a criterion with FAIL when a StatusOr is not ok.
#define ACCEPT_ASSIGN(lhs, expr)                                          \
  ACCEPT_ASSIGN_IMPL_(ACCEPT_CONCAT_(_acc_, __LINE__), lhs, expr)
#define ACCEPT_CONCAT_INNER_(a, b) a##b
#define ACCEPT_CONCAT_(a, b) ACCEPT_CONCAT_INNER_(a, b)
#define ACCEPT_ASSIGN_IMPL_(tmp, lhs, expr)                            \
  auto tmp = (expr);                                                   \
  if (!tmp.ok()) {                                                     \
    return Outcome{false, absl::StrCat("error: ", tmp.status().ToString())}; \
  }                                                                    \
  lhs = std::move(tmp).value()

Eigen::MatrixXd RandomOrthogonal(int d, NoiseSource& s) {
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = s.Gaussian();
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
}

// Rotated covariance with eigenvalues geometric in [1, kappa].
Eigen::MatrixXd GeometricCov(int d, double kappa, NoiseSource& s) {
  Eigen::VectorXd spec(d);
  for (int i = 0; i < d; ++i) {
    spec[i] = std::pow(kappa, static_cast<double>(i) / std::max(1, d - 1));
  }
  const Eigen::MatrixXd q = RandomOrthogonal(d, s);
  return Symmetrize(q * spec.asDiagonal() * q.transpose());
}

std::vector<double> GeometricSpectrum(int d, double kappa) {
  std::vector<double> out(d);
  for (int i = 0; i < d; ++i) {
    out[i] = std::pow(kappa, static_cast<double>(i) / std::max(1, d - 1));
  }
  return out;
}

double RelErr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / b.norm();
}

// 1. Declared sensitivities are never exceeded on adversarial neighbours.
Outcome SensitivityExactness() {
  NoiseSource s = NoiseSource::Seeded(101);
  NoiseSource zero = NoiseSource::ZeroNoise();
  const int pairs = 1000;
  int tmean_violations = 0, cov_violations = 0;
  double tmean_worst = 0, cov_worst = 0;
  for (int t = 0; t < pairs; ++t) {
    // Truncated mean over {0,1} rows, the estimator's domain.
    const int m = 16, d = 10;
    const double b = 1 + 3 * s.Uniform();
    Eigen::MatrixXd x(m, d);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) = s.Bernoulli(0.4) ? 1 : 0;
    }
    Eigen::MatrixXd y = x;
    const int row = t % m;
    for (int j = 0; j < d; ++j) {
      // Half the pairs use disjoint supports, the extremal case.
      if (t % 2 == 0) {
        x(row, j) = j < d / 2 ? 1 : 0;
        y(row, j) = j < d / 2 ? 0 : 1;
      } else {
        y(row, j) = s.Bernoulli(0.5) ? 1 : 0;
      }
    }
    ACCEPT_ASSIGN(Eigen::VectorXd ta, TruncatedMean(x, b));
    ACCEPT_ASSIGN(Eigen::VectorXd tb, TruncatedMean(y, b));
    const double declared_t = TruncatedMeanSensitivity(b, m);
    if (std::abs(declared_t - std::sqrt(2.0) * b / m) > 1e-15) {
      return {false, "declared tmean sensitivity is not sqrt(2) B/m"};
    }
    const double ratio_t = (ta - tb).norm() / declared_t;
    tmean_worst = std::max(tmean_worst, ratio_t);
    if (ratio_t > 1 + 1e-12) ++tmean_violations;

    // Clamped covariance: replace one row by another near the radius.
    const int n = 40, dc = 5;
    const double kappa = 1 + 4 * s.Uniform();
    const double r2 = NaivePceClampRadiusSq(n, dc, 0.1, kappa);
    Eigen::MatrixXd u(n, dc);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < dc; ++j) u(i, j) = s.Gaussian();
    }
    Eigen::MatrixXd v = u;
    Eigen::VectorXd a(dc), c(dc);
    for (int j = 0; j < dc; ++j) {
      a[j] = s.Gaussian();
      c[j] = s.Gaussian();
    }
    const double scale = std::sqrt(r2) * (1 - 1e-12);
    u.row(0) = a.normalized() * scale;
    switch (t % 3) {
      case 0: v.row(0) = -a.normalized() * scale; break;
      case 1: v.row(0) = c.normalized() * scale; break;
      default: v.row(0) = c.normalized() * 10 * scale; break;  // clamped away
    }
    ACCEPT_ASSIGN(NaivePceResult pa, NaivePce(u, 1, 0.1, kappa, zero));
    ACCEPT_ASSIGN(NaivePceResult pb, NaivePce(v, 1, 0.1, kappa, zero));
    const double declared_c = pa.diagnostics.frobenius_sensitivity;
    if (std::abs(declared_c - 2 * r2 / n) > 1e-12 * declared_c) {
      return {false, "declared covariance sensitivity is not 2B^2/n"};
    }
    const double ratio_c = (pa.sigma - pb.sigma).norm() / declared_c;
    cov_worst = std::max(cov_worst, ratio_c);
    if (ratio_c > 1 + 1e-12) ++cov_violations;
  }
  return {tmean_violations == 0 && cov_violations == 0,
          absl::StrCat(pairs, " pairs each; worst change/declared: tmean ",
                       tmean_worst, ", covariance ", cov_worst,
                       "; violations ", tmean_violations + cov_violations)};
}

// 2. Zero-noise runs reproduce the plug-in estimates.
Outcome OracleEquivalence() {
  NoiseSource s = NoiseSource::Seeded(202);
  NoiseSource zero = NoiseSource::ZeroNoise();
  double worst = 0;
  std::string where;
  auto track = [&](double err, const std::string& name) {
    if (err >= worst) {
      worst = err;
      where = name;
    }
  };
  for (int d : {2, 5, 8}) {
    GaussianParams p;
    p.mean = Eigen::VectorXd::Zero(d);
    p.cov = GeometricCov(d, 5000, s);
    ACCEPT_ASSIGN(Eigen::MatrixXd x, SampleGaussian(p, 6000, s));
    const Eigen::MatrixXd moment = x.transpose() * x / x.rows();

    ACCEPT_ASSIGN(CovEstimate pgce, Pgce(x, 1, 0.1, 5000, zero));
    if (pgce.final_diagnostics.kept != x.rows()) {
      return {false, "clamping triggered in pgce instance"};
    }
    track(RelErr(pgce.sigma_hat, moment), absl::StrCat("pgce d=", d));

    ACCEPT_ASSIGN(UnboundedCovEstimate unb, PgceNoBound(x, 1, 1e-6, 0.1, zero));
    if (unb.inner.final_diagnostics.kept != x.rows()) {
      return {false, "clamping triggered in pgce_no_bound instance"};
    }
    track(RelErr(unb.sigma_hat, moment), absl::StrCat("pgce_no_bound d=", d));

    GaussianParams pm = p;
    pm.mean = Eigen::VectorXd::LinSpaced(d, -20, 30);
    ACCEPT_ASSIGN(Eigen::MatrixXd xm, SampleGaussian(pm, 6000, s));
    ACCEPT_ASSIGN(MeanEstimate pme, Pme(xm, 1, 0.1, 0.1, 50, 5000, zero));
    if (!pme.mu_hat.has_value()) return {false, "pme aborted"};
    // The mean is read from the held-out half of the last third.
    const Eigen::VectorXd plug_in =
        xm.middleRows(5000, 1000).colwise().mean().transpose();
    const Eigen::VectorXd diff = *pme.mu_hat - plug_in;
    track(diff.norm() / plug_in.norm(), absl::StrCat("pme d=", d));

    Eigen::VectorXd bias(d);
    for (int j = 0; j < d; ++j) bias[j] = 0.45 / (1 + j);
    ACCEPT_ASSIGN(Eigen::MatrixXd bits, SampleBernoulliProduct(bias, 20000, s));
    PpdeOptions options;
    options.block_size = 20000 / PpdeBlockCount(d);
    ACCEPT_ASSIGN(PpdeResult ppde, Ppde(bits, 1, 0.1, 0.1, zero, options));
    std::vector<bool> done(d, false);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(d);
    for (const PpdeRound& r : ppde.rounds) {
      const Eigen::VectorXd mean = bits.middleRows(r.block_start, *options.block_size)
                                       .colwise()
                                       .mean()
                                       .transpose();
      for (int j = 0; j < d; ++j) {
        if (!done[j] && (r.final_round || mean[j] >= r.tau)) {
          expected[j] = mean[j];
          done[j] = true;
        }
      }
    }
    track((ppde.q - expected).norm() / expected.norm(),
          absl::StrCat("ppde d=", d));
  }
  return {worst <= 1e-6,
          absl::StrCat("max relative error ", worst, " (", where, ")")};
}

// 3. The preconditioner certificate holds against the true covariance.
Outcome PreconditionerCertificate() {
  const int d = 8, seeds = 20;
  const double kappa = 1e4;
  int held = 0;
  double worst_lo = INFINITY, worst_hi = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    NoiseSource root = NoiseSource::Seeded(300 + seed);
    NoiseSource data = root.Split(0);
    NoiseSource mech = root.Split(1);
    GaussianParams p;
    p.mean = Eigen::VectorXd::Zero(d);
    p.cov = GeometricCov(d, kappa, data);
    ACCEPT_ASSIGN(Eigen::MatrixXd x, SampleGaussian(p, 200000, data));
    ACCEPT_ASSIGN(CovEstimate est, Pgce(x, 1, 0.05, kappa, mech));
    const Eigen::MatrixXd& a = est.preconditioner.a;
    ACCEPT_ASSIGN(auto eig, Eigendecompose(Eigen::MatrixXd(
                                a * p.cov * a.transpose())));
    const double lo = eig.values.minCoeff(), hi = eig.values.maxCoeff();
    worst_lo = std::min(worst_lo, lo);
    worst_hi = std::max(worst_hi, hi);
    if (lo >= 1 && hi <= 1000) ++held;
  }
  return {held >= 0.9 * seeds,
          absl::StrCat(held, "/", seeds,
                       " seeds with I <= A Sigma A^T <= 1000 I; extreme "
                       "eigenvalues ",
                       worst_lo, " and ", worst_hi)};
}

// 4. Covariance error falls with n.
Outcome CovarianceTrend() {
  ExperimentConfig c;
  c.task = Task::kGaussianCov;
  c.d = 4;
  c.kappa = 100;
  c.rho = 1;
  c.beta = 0.05;
  c.spectrum = GeometricSpectrum(4, 100);
  c.rotate = true;
  for (int k = 14; k <= 18; ++k) c.sweep_n.push_back(int64_t{1} << k);
  c.seeds.clear();
  for (uint64_t seed = 0; seed < 20; ++seed) c.seeds.push_back(400 + seed);
  ACCEPT_ASSIGN(TrialReport r, RunSweep(c));
  std::vector<double> medians;
  std::string shown;
  for (int64_t n : c.sweep_n) {
    const std::optional<double> m = MedianMetric(r, "cov_error", n);
    if (!m.has_value()) return {false, absl::StrCat("no results at n=", n)};
    medians.push_back(*m);
    absl::StrAppend(&shown, shown.empty() ? "" : ", ", n, ":", *m);
  }
  bool monotone = true;
  for (size_t i = 1; i < medians.size(); ++i) {
    if (!(medians[i] < medians[i - 1])) monotone = false;
  }
  return {monotone && medians.back() < 0.3 && BudgetLedgerCheck(r).pass,
          absl::StrCat("median error by n {", shown, "}",
                       monotone ? "" : " not monotone")};
}

// 5. Product learner accuracy.
Outcome ProductAccuracy() {
  const int d = 12, seeds = 20;
  const int64_t m = 20000;
  const Eigen::VectorXd p = MixedBiasProduct(d);
  PpdeOptions options;
  options.block_size = m;
  int good = 0;
  double worst = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    NoiseSource root = NoiseSource::Seeded(500 + seed);
    NoiseSource data = root.Split(0);
    NoiseSource mech = root.Split(1);
    ACCEPT_ASSIGN(Eigen::MatrixXd x,
                  SampleBernoulliProduct(p, PpdeBlockCount(d) * m, data));
    ACCEPT_ASSIGN(PpdeResult fit, Ppde(x, 1, 0.15, 0.1, mech, options));
    ACCEPT_ASSIGN(double tv, TvProductExact(p, fit.q));
    worst = std::max(worst, tv);
    if (tv <= 0.15) ++good;
  }
  return {good >= 0.85 * seeds,
          absl::StrCat(good, "/", seeds, " seeds with TV <= 0.15 (block size ",
                       m, ", worst TV ", worst, ")")};
}

// 6. Trace bucket contains the true trace.
Outcome TraceBand() {
  const int d = 16, n = 5000, seeds = 20;
  int inside = 0, bottom = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    NoiseSource root = NoiseSource::Seeded(600 + seed);
    NoiseSource data = root.Split(0);
    NoiseSource mech = root.Split(1);
    GaussianParams p;
    p.mean = Eigen::VectorXd::Zero(d);
    p.cov = Eigen::MatrixXd::Identity(d, d);
    ACCEPT_ASSIGN(Eigen::MatrixXd x, SampleGaussian(p, n, data));
    ACCEPT_ASSIGN(std::optional<TraceEstimate> t,
                  PEstimateTrace(x, 1, 1e-5, 0.1, mech));
    if (!t.has_value()) {
      ++bottom;
      continue;
    }
    if (d >= t->t / kTraceBase && d <= kTraceBase * t->t) ++inside;
  }
  return {inside >= 0.9 * seeds && bottom <= 0.1 * seeds,
          absl::StrCat(inside, "/", seeds, " in [T/C, CT]; ", bottom,
                       " bottom")};
}

// 7. Fingerprinting lemma for the clamped empirical mean.
Outcome FingerprintingLemma() {
  TracingAttackConfig c;
  c.d = 64;
  c.n = 8;
  c.trials = 10000;
  NoiseSource s = NoiseSource::Seeded(707);
  ACCEPT_ASSIGN(FingerprintReport r,
                RunTracingAttack(EmpiricalMeanMechanism(), c, s));
  const double bound = 1.0 / 27 - 3 * r.fp_lemma_std_error;
  return {r.fp_lemma_lhs >= bound,
          absl::StrCat("E[Z + (f-P)^2] per coordinate = ", r.fp_lemma_lhs,
                       " +- ", r.fp_lemma_std_error, " vs 1/27 = ", 1.0 / 27)};
}

// 8. Attack separation shrinks with the privacy budget.
Outcome PrivacyAttackTrend() {
  const int seeds = 20, trials = 50;
  TracingAttackConfig c;
  c.d = 16;
  c.n = 3000;
  c.trials = trials;
  c.non_members_per_trial = c.n;
  PpdeOptions options;
  options.block_size = c.n / PpdeBlockCount(c.d);
  std::vector<double> seps;
  std::string shown;
  for (double rho : {1.0, 0.1, 0.01}) {
    const MeanMechanism mech = PpdeMechanism(rho, 0.1, 0.1, options);
    double total = 0;
    for (int seed = 0; seed < seeds; ++seed) {
      // Same seeds for every rho: common data across budgets.
      NoiseSource s = NoiseSource::Seeded(800 + seed);
      ACCEPT_ASSIGN(FingerprintReport r, RunTracingAttack(mech, c, s));
      if (r.failed_trials > 0) return {false, "mechanism failed"};
      total += r.separation;
    }
    seps.push_back(total / seeds);
    absl::StrAppend(&shown, shown.empty() ? "" : ", ", "rho=", rho, ":",
                    seps.back());
  }
  const bool monotone = seps[0] > seps[1] && seps[1] > seps[2];
  return {monotone, absl::StrCat("mean separation {", shown, "}")};
}

// 9. Every estimator spends exactly what it declares.
Outcome BudgetLedgers() {
  NoiseSource s = NoiseSource::Seeded(909);
  std::vector<std::string> bad;
  int checked = 0;
  auto check = [&](const std::string& name, double spent, double declared) {
    ++checked;
    if (std::abs(spent - declared) > 1e-12 * std::max(1.0, declared)) {
      bad.push_back(absl::StrCat(name, " spent ", spent, " declared ",
                                 declared));
    }
  };
  GaussianParams p;
  p.mean = Eigen::VectorXd::Constant(3, 2);
  p.cov = GeometricCov(3, 3000, s);
  ACCEPT_ASSIGN(Eigen::MatrixXd x, SampleGaussian(p, 9000, s));
  for (double kappa : {100.0, 3000.0}) {
    ACCEPT_ASSIGN(CovEstimate cov, Pgce(x, 0.6, 0.1, kappa, s));
    ACCEPT_ASSIGN(double ledger_rho, cov.ledger.TotalRho());
    check(absl::StrCat("pgce kappa=", kappa), cov.budget_spent.rho(), 0.6);
    check(absl::StrCat("pgce ledger kappa=", kappa), ledger_rho, 0.6);
    ACCEPT_ASSIGN(MeanEstimate mean, Pme(x, 0.3, 0.1, 0.1, 5, kappa, s));
    check(absl::StrCat("pme kappa=", kappa), mean.budget_spent.rho(), 0.6);
    ACCEPT_ASSIGN(GaussianEstimate full,
                  LearnGaussian(x, 0.8, 0.1, 0.1, 5, kappa, s));
    check(absl::StrCat("learn_gaussian kappa=", kappa),
          full.budget_spent.rho(), 0.8);
  }
  ACCEPT_ASSIGN(UnboundedCovEstimate unb, PgceNoBound(x, 1, 1e-6, 0.1, s));
  ACCEPT_ASSIGN(PrivacyBudget declared_unb, PgceNoBoundBudget(1, 1e-6, 3));
  check("pgce_no_bound eps", unb.budget_spent.epsilon(),
        declared_unb.epsilon());
  check("pgce_no_bound delta", unb.budget_spent.delta(), declared_unb.delta());

  const Eigen::VectorXd bias = MixedBiasProduct(9);
  ACCEPT_ASSIGN(Eigen::MatrixXd bits, SampleBernoulliProduct(bias, 8000, s));
  PpdeOptions options;
  options.block_size = 2000;
  ACCEPT_ASSIGN(PpdeResult ppde, Ppde(bits, 0.4, 0.1, 0.1, s, options));
  check("ppde", ppde.budget_spent.rho(), 0.4);
  ACCEPT_ASSIGN(FlipHeavyResult flip,
                PpdeFlipHeavy(bits, 0.4, 0.1, 0.1, s, options));
  check("ppde flip-heavy", flip.budget_spent.rho(), 0.4);

  // The abort path declares only the histogram half.
  Eigen::VectorXd spread(4000);
  for (int i = 0; i < 4000; ++i) spread[i] = -100 + 0.05 * (i % 4000);
  ACCEPT_ASSIGN(MeanEstimate aborted, UnivariateMean(spread, 0.5, 0.1, 100, 1,
                                                     s));
  if (!aborted.aborted) bad.push_back("spread data did not abort");
  check("univariate abort", aborted.budget_spent.rho(), 0.25);
  std::string detail = absl::StrCat(checked, " checks");
  for (const std::string& b : bad) absl::StrAppend(&detail, "; ", b);
  return {bad.empty(), detail};
}

// 10. Distance metrics agree with their oracles.
Outcome MetricCrossOracles() {
  NoiseSource s = NoiseSource::Seeded(1010);
  int mc_ok = 0;
  const int pairs = 20;
  for (int t = 0; t < pairs; ++t) {
    const int d = 1 + t % 4;
    GaussianParams a, b;
    a.cov = b.cov = GeometricCov(d, 1 + 9 * s.Uniform(), s);
    a.mean = Eigen::VectorXd::Zero(d);
    b.mean = Eigen::VectorXd(d);
    for (int j = 0; j < d; ++j) b.mean[j] = 0.6 * s.Gaussian();
    ACCEPT_ASSIGN(double exact, TvGaussianSameCov(a.mean, b.mean, a.cov));
    ACCEPT_ASSIGN(McEstimate mc, TvGaussianMc(a, b, 20000, s));
    if (std::abs(mc.estimate - exact) <= 3 * mc.std_error) ++mc_ok;
  }
  int violations = 0;
  const int bern = 1000;
  for (int t = 0; t < bern; ++t) {
    const double p = s.Uniform(), q = s.Uniform();
    ACCEPT_ASSIGN(Chi2Kl r, Chi2KlBernoulli(p, q));
    const double tv = std::abs(p - q);
    if (2 * tv * tv > r.kl * (1 + 1e-12) || r.kl > r.chi2 * (1 + 1e-12)) {
      ++violations;
    }
  }
  return {mc_ok == pairs && violations == 0,
          absl::StrCat(mc_ok, "/", pairs, " MC TV within 3 stderr; ",
                       violations, "/", bern, " Pinsker chain violations")};
}

struct Criterion {
  const char* id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace dplearn

int main() {
  using dplearn::Criterion;
  const Criterion criteria[] = {
      {"AC1", "sensitivity exactness", 10, dplearn::SensitivityExactness},
      {"AC2", "zero-noise oracle equivalence", 30, dplearn::OracleEquivalence},
      {"AC3", "preconditioner certificate", 300,
       dplearn::PreconditionerCertificate},
      {"AC4", "covariance accuracy trend", 600, dplearn::CovarianceTrend},
      {"AC5", "product learner accuracy", 300, dplearn::ProductAccuracy},
      {"AC6", "trace estimator band", 60, dplearn::TraceBand},
      {"AC7", "fingerprinting lemma", 120, dplearn::FingerprintingLemma},
      {"AC8", "privacy vs attack trend", 600, dplearn::PrivacyAttackTrend},
      {"AC9", "budget ledger", 60, dplearn::BudgetLedgers},
      {"AC10", "distance metric cross-oracles", 60,
       dplearn::MetricCrossOracles},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    dplearn::Outcome o = c.run();
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    if (secs > c.limit_seconds) {
      o.pass = false;
      absl::StrAppend(&o.detail, "; over the ", c.limit_seconds, " s limit");
    }
    if (!o.pass) ++failed;
    std::printf("%s %s %s: %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL",
                c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
