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

#include "dplearn/covariance_unbounded.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/QR>

#include "absl/strings/str_cat.h"
#include "dplearn/linalg.h"
#include "dplearn/status_macros.h"

namespace dplearn {
namespace {

// C^r computed exactly: C = 2^4.
double TracePower(int64_t r) { return std::ldexp(1.0, static_cast<int>(4 * r)); }

// Orthonormal basis for the column span of m.
Eigen::MatrixXd OrthonormalSpan(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return Eigen::MatrixXd(m.rows(), 0);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-8);
  const Eigen::Index rank = qr.rank();
  Eigen::MatrixXd q = qr.householderQ() *
                      Eigen::MatrixXd::Identity(m.rows(), m.rows());
  return q.leftCols(rank);
}

}  // namespace

int64_t TraceMinBucket(int64_t d) {
  int64_t k = 0;
  while (TracePower(k + 1) <= static_cast<double>(d)) ++k;
  return k - 1;
}

BucketKey TraceBucket(double norm_sq, int64_t d) {
  if (!(norm_sq > 0) || !std::isfinite(norm_sq)) return BucketKey::Bottom();
  int64_t r = static_cast<int64_t>(std::ceil(std::log2(norm_sq) / 4.0));
  // Exact correction for rounding in log2.
  while (TracePower(r - 1) >= norm_sq) --r;
  while (TracePower(r) < norm_sq) ++r;
  if (r < TraceMinBucket(d)) return BucketKey::Bottom();
  return BucketKey::Of(r);
}

absl::StatusOr<std::optional<TraceEstimate>> PEstimateTrace(
    const Eigen::MatrixXd& x, double epsilon, double delta, double beta,
    NoiseSource& noise) {
  if (x.rows() == 0) return EmptyInputError("no samples");
  if (!x.allFinite()) return InvalidInputError("non-finite samples");
  const int64_t d = x.cols();
  std::vector<BucketKey> keys;
  keys.reserve(x.rows());
  const Eigen::VectorXd norms_sq = x.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    keys.push_back(TraceBucket(norms_sq[i], d));
  }
  ASSIGN_OR_RETURN(HistogramResult h,
                   StableHistogram(keys, epsilon, delta, beta, noise));
  std::optional<BucketKey> top = ArgmaxBucket(h, 0.25);
  if (!top.has_value()) return std::optional<TraceEstimate>();
  TraceEstimate out;
  out.r = top->index();
  out.t = TracePower(out.r);
  out.certificate_lower = kTraceXi * out.t / static_cast<double>(d);
  out.certificate_upper = kTraceXiUpper * static_cast<double>(d) * out.t;
  out.histogram = std::move(h);
  return std::optional<TraceEstimate>(std::move(out));
}

int64_t WeakPpcNoBoundSteps(double a, double b) {
  return static_cast<int64_t>(
      std::ceil(std::log(2.0 * b / a) / std::log(100.0 / 99.0)));
}

absl::StatusOr<std::optional<WeakPpcNoBoundResult>> WeakPpcNoBound(
    const Eigen::MatrixXd& x, double rho, double beta, double a, double b,
    NoiseSource& noise) {
  const double d = static_cast<double>(x.cols());
  if (!(a > 40.0 * d * d * d)) {
    return InvalidParameterError(
        absl::StrCat("interval start ", a, " must exceed 40 d^3 = ",
                     40.0 * d * d * d));
  }
  if (!(b >= a) || !std::isfinite(b)) {
    return InvalidParameterError("interval end must be >= start");
  }
  if (!(rho > 0)) return InvalidParameterError("rho must be > 0");
  if (!(beta > 0 && beta < 1)) {
    return InvalidParameterError("beta must lie in (0, 1)");
  }
  const int64_t steps = WeakPpcNoBoundSteps(a, b);
  const double step_rho = rho / static_cast<double>(steps);
  const double step_beta = beta / static_cast<double>(steps);

  NaivePceCache cache(x);
  double kappa = b;
  int64_t run = 0;
  while (kappa > a / 2 && run < steps) {
    ++run;
    ASSIGN_OR_RETURN(NaivePceResult z,
                     cache.Run(step_rho, step_beta, kappa, noise));
    ASSIGN_OR_RETURN(WeakPpcResult step,
                     WeakPpcFromEstimate(z, kappa, kappa / (d * d)));
    if (step.basis.cols() > 0) {
      WeakPpcNoBoundResult out;
      out.basis = std::move(step.basis);
      out.a = std::move(step.a);
      out.kappa = kappa;
      out.steps_run = run;
      out.steps_budgeted = steps;
      out.step_rho = step_rho;
      return std::optional<WeakPpcNoBoundResult>(std::move(out));
    }
    kappa *= 0.99;
  }
  return std::optional<WeakPpcNoBoundResult>();
}

PpcRangeParams PpcRangeParameters(double epsilon, double delta, double beta,
                                  int64_t d) {
  const double dd = static_cast<double>(d);
  const double log_inv_delta = std::log(1.0 / delta);
  PpcRangeParams p;
  p.epsilon_round = epsilon / std::sqrt(dd * log_inv_delta);
  p.delta_round = delta / dd;
  p.rho_round = p.epsilon_round * p.epsilon_round / log_inv_delta;
  p.beta_round = beta / dd;
  return p;
}

absl::StatusOr<PrivacyBudget> PpcRangeBudget(double epsilon, double delta,
                                             int64_t d) {
  if (!(epsilon > 0)) return InvalidParameterError("epsilon must be > 0");
  if (!(delta > 0 && delta < 1)) {
    return InvalidParameterError("delta must lie in (0, 1)");
  }
  if (d < 1) return InvalidParameterError("d must be >= 1");
  const PpcRangeParams p = PpcRangeParameters(epsilon, delta, 0.5, d);
  ASSIGN_OR_RETURN(PrivacyBudget trace,
                   PrivacyBudget::ApproxDp(p.epsilon_round, p.delta_round));
  ASSIGN_OR_RETURN(PrivacyBudget sweep,
                   ZcdpToApproxDp(p.rho_round, p.delta_round));
  const PrivacyBudget parts[] = {trace, sweep};
  ASSIGN_OR_RETURN(PrivacyBudget round, ComposeApproxDp(parts));
  const std::vector<PrivacyBudget> rounds(d, round);
  ASSIGN_OR_RETURN(PrivacyBudget basic, ComposeApproxDp(rounds));
  if (round.epsilon() > 1) return basic;
  ASSIGN_OR_RETURN(PrivacyBudget advanced,
                   ComposeApproxDpAdvanced(rounds, delta));
  return advanced.epsilon() < basic.epsilon() ? advanced : basic;
}

double PgceNoBoundFinalRho(double epsilon, double delta) {
  return epsilon * epsilon / (8.0 * std::log(1.0 / delta));
}

absl::StatusOr<PrivacyBudget> PgceNoBoundBudget(double epsilon, double delta,
                                                int64_t d) {
  ASSIGN_OR_RETURN(PrivacyBudget range, PpcRangeBudget(epsilon, delta, d));
  ASSIGN_OR_RETURN(PrivacyBudget final_stage,
                   ZcdpToApproxDp(PgceNoBoundFinalRho(epsilon, delta), delta));
  const PrivacyBudget parts[] = {range, final_stage};
  return ComposeApproxDp(parts);
}

double PpcRangeAdvertisedKappa(int64_t d) {
  const double dd = static_cast<double>(d);
  return 40.0 * kTraceXiUpper * dd * dd * dd * dd;
}

absl::StatusOr<RangePreconditioner> PpcRange(const Eigen::MatrixXd& x,
                                             double epsilon, double delta,
                                             double beta, NoiseSource& noise) {
  if (x.rows() == 0) return EmptyInputError("no samples");
  if (!(beta > 0 && beta < 1)) {
    return InvalidParameterError("beta must lie in (0, 1)");
  }
  const int64_t d = x.cols();
  const double dd = static_cast<double>(d);
  ASSIGN_OR_RETURN(PrivacyBudget declared, PpcRangeBudget(epsilon, delta, d));
  const PpcRangeParams p = PpcRangeParameters(epsilon, delta, beta, d);
  ASSIGN_OR_RETURN(PrivacyBudget trace_charge,
                   PrivacyBudget::ApproxDp(p.epsilon_round, p.delta_round));
  ASSIGN_OR_RETURN(PrivacyBudget sweep_charge,
                   PrivacyBudget::Zcdp(p.rho_round));

  RangePreconditioner out;
  out.a = Eigen::MatrixXd::Identity(d, d);
  out.advertised_kappa = PpcRangeAdvertisedKappa(d);
  Eigen::MatrixXd current = x;
  Eigen::MatrixXd accumulated(d, 0);
  for (int j = 1; j <= d; ++j) {
    ASSIGN_OR_RETURN(
        std::optional<TraceEstimate> trace,
        PEstimateTrace(current, p.epsilon_round, p.delta_round, p.beta_round,
                       noise));
    out.ledger.Record(absl::StrCat("ppc_range round ", j, " trace"),
                      trace_charge);
    if (!trace.has_value()) {
      return EstimationFailedError(
          absl::StrCat("trace estimate returned bottom in round ", j));
    }
    PpcRangeRound log;
    log.round = j;
    log.trace_estimate = trace->t;
    log.bucket = trace->r;
    log.interval_lower = kTraceXi * trace->t;
    log.interval_upper = kTraceXiUpper * dd * trace->t;
    log.accumulated_dim = accumulated.cols();
    if (log.interval_lower < 40.0 * dd * dd * dd) {
      out.round_log.push_back(log);
      break;
    }
    ASSIGN_OR_RETURN(
        std::optional<WeakPpcNoBoundResult> step,
        WeakPpcNoBound(current, p.rho_round, p.beta_round, log.interval_lower,
                       log.interval_upper, noise));
    out.ledger.Record(absl::StrCat("ppc_range round ", j, " sweep"),
                      sweep_charge);
    if (!step.has_value()) {
      return EstimationFailedError(
          absl::StrCat("preconditioning sweep found no subspace in round ", j));
    }
    log.swept = true;
    log.subspace_dim = step->basis.cols();
    log.kappa_found = step->kappa;
    log.sweep_steps = step->steps_run;

    Eigen::MatrixXd joined(d, accumulated.cols() + step->basis.cols());
    joined << accumulated, step->basis;
    accumulated = OrthonormalSpan(step->a * OrthonormalSpan(joined));
    log.accumulated_dim = accumulated.cols();
    out.round_log.push_back(log);

    out.a = step->a * out.a;
    current = TransformRows(current, step->a);
    out.round_bases.push_back(std::move(step->basis));
  }
  out.a *= 2.0;
  out.budget_spent = declared;
  return out;
}

absl::StatusOr<UnboundedCovEstimate> PgceNoBound(const Eigen::MatrixXd& x,
                                                 double epsilon, double delta,
                                                 double beta,
                                                 NoiseSource& noise) {
  UnboundedCovEstimate out;
  ASSIGN_OR_RETURN(out.range, PpcRange(x, epsilon, delta, beta, noise));
  out.ledger.Append(out.range.ledger, "pgce_no_bound/");
  const double final_rho = PgceNoBoundFinalRho(epsilon, delta);
  ASSIGN_OR_RETURN(out.inner, Pgce(TransformRows(x, out.range.a), final_rho,
                                   beta, out.range.advertised_kappa, noise));
  out.ledger.Append(out.inner.ledger, "pgce_no_bound/");
  ASSIGN_OR_RETURN(out.sigma_hat,
                   Unprecondition(out.inner.sigma_hat, out.range.a));
  ASSIGN_OR_RETURN(out.budget_spent,
                   PgceNoBoundBudget(epsilon, delta, x.cols()));
  return out;
}

}  // namespace dplearn
