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

#ifndef DPLEARN_COVARIANCE_UNBOUNDED_H_
#define DPLEARN_COVARIANCE_UNBOUNDED_H_

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "absl/status/statusor.h"
#include "dplearn/covariance.h"
#include "dplearn/histogram.h"
#include "dplearn/noise.h"
#include "dplearn/privacy.h"

namespace dplearn {

// Bucket base C. Powers of 16 are exact in binary, so bucketing is exact.
inline constexpr double kTraceBase = 16.0;
// Interval constants: a = xi T and b = Xi d T.
inline constexpr double kTraceXi = 1.0 / kTraceBase;
inline constexpr double kTraceXiUpper = kTraceBase;

// Smallest bucket index in the universe: floor(log_C d) - 1.
int64_t TraceMinBucket(int64_t d);

// The r with C^{r-1} < s <= C^r, or bottom when s <= 0 or r is below
// TraceMinBucket(d).
BucketKey TraceBucket(double norm_sq, int64_t d);

struct TraceEstimate {
  // T = C^r.
  double t = 0;
  double base = kTraceBase;
  int64_t r = 0;
  // [xi T / d, Xi d T].
  double certificate_lower = 0;
  double certificate_upper = 0;
  HistogramResult histogram;
};

// (epsilon, delta)-DP estimate of tr(Sigma) for mean-zero rows: a stable
// histogram of the bucketed squared norms, released as C^r for a bucket with
// frequency >= 1/4, or nullopt (bottom) when no bucket qualifies.
absl::StatusOr<std::optional<TraceEstimate>> PEstimateTrace(
    const Eigen::MatrixXd& x, double epsilon, double delta, double beta,
    NoiseSource& noise);

// ceil(ln(2b/a) / ln(100/99)).
int64_t WeakPpcNoBoundSteps(double a, double b);

struct WeakPpcNoBoundResult {
  Eigen::MatrixXd basis;
  // (d / sqrt(kappa)) P_V + P_{V-perp}.
  Eigen::MatrixXd a;
  double kappa = 0;
  int64_t steps_run = 0;
  int64_t steps_budgeted = 0;
  double step_rho = 0;
};

// rho-zCDP sweep of kappa from b down by 99/100 while kappa > a/2, calling
// WeakPpc with K = kappa/d^2 until a nonempty subspace appears. The budget is
// split evenly over the worst-case step count whether or not the sweep stops
// early. Returns nullopt when no step finds a subspace.
absl::StatusOr<std::optional<WeakPpcNoBoundResult>> WeakPpcNoBound(
    const Eigen::MatrixXd& x, double rho, double beta, double a, double b,
    NoiseSource& noise);

struct PpcRangeParams {
  double epsilon_round = 0;
  double delta_round = 0;
  double rho_round = 0;
  double beta_round = 0;
};

// eps' = eps/sqrt(d ln(1/delta)), delta' = delta/d,
// rho' = eps'^2/ln(1/delta), beta' = beta/d.
PpcRangeParams PpcRangeParameters(double epsilon, double delta, double beta,
                                  int64_t d);

// Worst-case (epsilon, delta) of PpcRange over d rounds.
absl::StatusOr<PrivacyBudget> PpcRangeBudget(double epsilon, double delta,
                                             int64_t d);

// Final-stage zCDP budget of PgceNoBound: eps^2/(8 ln(1/delta)).
double PgceNoBoundFinalRho(double epsilon, double delta);

// Total (epsilon, delta) of PgceNoBound.
absl::StatusOr<PrivacyBudget> PgceNoBoundBudget(double epsilon, double delta,
                                                int64_t d);

// Condition bound advertised after PpcRange: 40 Xi d^4.
double PpcRangeAdvertisedKappa(int64_t d);

struct PpcRangeRound {
  int round = 0;
  double trace_estimate = 0;
  int64_t bucket = 0;
  double interval_lower = 0;
  double interval_upper = 0;
  // Set when the round ran the sweep (a >= 40 d^3).
  bool swept = false;
  int64_t subspace_dim = 0;
  double kappa_found = 0;
  int64_t sweep_steps = 0;
  // dim of U + V, carried in the current coordinates.
  int64_t accumulated_dim = 0;
};

struct RangePreconditioner {
  // Rows of x * a^T have covariance a Sigma a^T.
  Eigen::MatrixXd a;
  std::vector<Eigen::MatrixXd> round_bases;
  std::vector<PpcRangeRound> round_log;
  double advertised_kappa = 0;
  PrivacyBudget budget_spent = *PrivacyBudget::ApproxDp(0, 0);
  BudgetLedger ledger;
};

// Recursive preconditioning without a condition-number bound. Fails with
// estimation-failed when a trace estimate or a sweep returns bottom.
absl::StatusOr<RangePreconditioner> PpcRange(const Eigen::MatrixXd& x,
                                             double epsilon, double delta,
                                             double beta, NoiseSource& noise);

struct UnboundedCovEstimate {
  Eigen::MatrixXd sigma_hat;
  PrivacyBudget budget_spent = *PrivacyBudget::ApproxDp(0, 0);
  BudgetLedger ledger;
  RangePreconditioner range;
  CovEstimate inner;
};

// (epsilon, delta)-DP covariance estimate for mean-zero rows with Sigma >= I.
absl::StatusOr<UnboundedCovEstimate> PgceNoBound(const Eigen::MatrixXd& x,
                                                 double epsilon, double delta,
                                                 double beta,
                                                 NoiseSource& noise);

}  // namespace dplearn

#endif  // DPLEARN_COVARIANCE_UNBOUNDED_H_
