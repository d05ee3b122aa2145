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

#include "dplearn/mean.h"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "absl/strings/str_cat.h"
#include "dplearn/histogram.h"
#include "dplearn/linalg.h"
#include "dplearn/normal.h"
#include "dplearn/status_macros.h"

namespace dplearn {
namespace {

absl::Status CheckMeanParams(double rho, double beta, double R, double kappa) {
  if (!(rho > 0)) return InvalidParameterError("rho must be > 0");
  if (!(beta > 0 && beta < 1)) {
    return InvalidParameterError("beta must lie in (0, 1)");
  }
  if (!(R >= 0) || !std::isfinite(R)) {
    return InvalidParameterError("R must be >= 0");
  }
  if (!(kappa >= 1) || !std::isfinite(kappa)) {
    return InvalidParameterError("kappa must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<PrivacyBudget> TotalSpent(const BudgetLedger& ledger) {
  ASSIGN_OR_RETURN(double rho, ledger.TotalRho());
  return PrivacyBudget::Zcdp(rho);
}

}  // namespace

double UnivariateClipHalfWidth(int64_t m, double beta) {
  return 2.0 + std::sqrt(2.0 * std::log(2.0 * static_cast<double>(m) / beta));
}

absl::StatusOr<MeanEstimate> UnivariateMean(const Eigen::VectorXd& x,
                                            double rho, double beta, double R,
                                            double kappa, NoiseSource& noise) {
  RETURN_IF_ERROR(CheckMeanParams(rho, beta, R, kappa));
  if (x.size() < 2) return EmptyInputError("need at least 2 samples");
  if (!x.allFinite()) return InvalidInputError("non-finite samples");

  const double scale = std::sqrt(kappa);
  const Eigen::Index half = x.size() / 2;
  const int64_t m = x.size() - half;
  const Eigen::VectorXd w = x / scale;
  const int64_t k = static_cast<int64_t>(std::ceil(std::max(1.0, R / scale)));

  std::vector<BucketKey> universe;
  for (int64_t r = -k; r < k; ++r) universe.push_back(BucketKey::Of(r));
  std::vector<BucketKey> keys;
  keys.reserve(half);
  for (Eigen::Index i = 0; i < half; ++i) {
    const double f = std::floor(std::clamp(w[i], -1e15, 1e15));
    keys.push_back(BucketKey::Of(
        std::clamp(static_cast<int64_t>(f), -k, k - 1)));
  }

  MeanEstimate out;
  out.preconditioner = Eigen::MatrixXd::Identity(1, 1);
  ASSIGN_OR_RETURN(HistogramResult h,
                   GaussianHistogram(keys, universe, rho / 2, beta / 2, noise));
  ASSIGN_OR_RETURN(PrivacyBudget half_budget, PrivacyBudget::Zcdp(rho / 2));
  out.ledger.Record("histogram", half_budget);
  std::optional<BucketKey> top = ArgmaxBucket(h, 0.25);
  if (!top.has_value()) {
    out.aborted = true;
    out.aborted_coordinate = 0;
    ASSIGN_OR_RETURN(out.budget_spent, TotalSpent(out.ledger));
    return out;
  }
  const Eigen::VectorXd held_out = w.tail(m);
  const double md = static_cast<double>(m);
  double estimate_w = 0;
  double weak_w = 0;
  if (kappa == 1.0) {
    // Unit variance: invert the noisy empirical CDF at the bucket's left end.
    weak_w = static_cast<double>(top->index());
    const double p_tilde =
        static_cast<double>((held_out.array() <= weak_w).count()) / md;
    ASSIGN_OR_RETURN(
        Eigen::VectorXd p_hat,
        GaussianMechanism(Eigen::VectorXd::Constant(1, p_tilde), 1.0 / md,
                          rho / 2, noise));
    const double clamped =
        std::clamp(p_hat[0], 1.0 / (2.0 * md), 1.0 - 1.0 / (2.0 * md));
    estimate_w = weak_w - NormalQuantile(clamped);
  } else {
    // Unknown variance in [1/kappa, 1] after rescaling: the CDF inversion
    // would be biased, so take a clipped mean around the bucket center.
    weak_w = static_cast<double>(top->index()) + 0.5;
    const double width = UnivariateClipHalfWidth(m, beta);
    const double clipped =
        held_out.array().max(weak_w - width).min(weak_w + width).mean();
    ASSIGN_OR_RETURN(
        Eigen::VectorXd noisy,
        GaussianMechanism(Eigen::VectorXd::Constant(1, clipped),
                          2.0 * width / md, rho / 2, noise));
    estimate_w = noisy[0];
  }
  out.ledger.Record("refine", half_budget);
  out.weak_estimate = Eigen::VectorXd::Constant(1, weak_w * scale);
  out.mu_hat = Eigen::VectorXd::Constant(1, estimate_w * scale);
  ASSIGN_OR_RETURN(out.budget_spent, TotalSpent(out.ledger));
  return out;
}

absl::StatusOr<MeanEstimate> NaivePme(const Eigen::MatrixXd& x, double rho,
                                      double alpha, double beta, double R,
                                      double kappa, NoiseSource& noise) {
  RETURN_IF_ERROR(CheckMeanParams(rho, beta, R, kappa));
  if (!(alpha > 0)) return InvalidParameterError("alpha must be > 0");
  const Eigen::Index d = x.cols();
  if (d == 0) return InvalidInputError("zero-dimensional samples");
  const double dd = static_cast<double>(d);

  MeanEstimate out;
  out.preconditioner = Eigen::MatrixXd::Identity(d, d);
  out.weak_estimate = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mu(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    NoiseSource child = noise.Split(static_cast<uint64_t>(j));
    ASSIGN_OR_RETURN(MeanEstimate coord,
                     UnivariateMean(x.col(j), rho / dd, beta / dd, R, kappa,
                                    child));
    out.ledger.Append(coord.ledger, absl::StrCat("coordinate ", j, "/"));
    if (coord.aborted) {
      out.aborted = true;
      out.aborted_coordinate = j;
      break;
    }
    out.weak_estimate[j] = coord.weak_estimate[0];
    mu[j] = (*coord.mu_hat)[0];
  }
  if (!out.aborted) out.mu_hat = std::move(mu);
  ASSIGN_OR_RETURN(out.budget_spent, TotalSpent(out.ledger));
  return out;
}

Eigen::MatrixXd DifferencePairs(const Eigen::MatrixXd& x) {
  const Eigen::Index pairs = x.rows() / 2;
  Eigen::MatrixXd z(pairs, x.cols());
  for (Eigen::Index i = 0; i < pairs; ++i) {
    z.row(i) = (x.row(2 * i + 1) - x.row(2 * i)) / std::sqrt(2.0);
  }
  return z;
}

absl::StatusOr<MeanEstimate> Pme(const Eigen::MatrixXd& x, double rho,
                                 double alpha, double beta, double R,
                                 double kappa, NoiseSource& noise,
                                 const PpcOptions& options) {
  RETURN_IF_ERROR(CheckMeanParams(rho, beta, R, kappa));
  const Eigen::Index n = x.rows() / 3;
  if (n < 2) return EmptyInputError("need at least 6 samples");
  const Eigen::Index d = x.cols();

  const bool needs_ppc = PpcRoundCount(kappa, options) > 0;
  Preconditioner pre;
  pre.a = Eigen::MatrixXd::Identity(d, d);
  pre.certified_kappa = kappa;
  if (needs_ppc) {
    ASSIGN_OR_RETURN(pre, Ppc(DifferencePairs(x.topRows(2 * n)), rho, beta,
                              kappa, noise, options));
  }
  const Eigen::MatrixXd y = TransformRows(x.middleRows(2 * n, n), pre.a);
  // ||A mu|| <= ||A||_2 ||mu||; the bound is public since A is.
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(pre.a);
  const double a_norm = svd.singularValues()(0);
  ASSIGN_OR_RETURN(
      MeanEstimate inner,
      NaivePme(y, needs_ppc ? rho : 2 * rho, alpha, beta,
               needs_ppc ? R * a_norm : R, pre.certified_kappa, noise));

  const BudgetLedger inner_ledger = inner.ledger;
  MeanEstimate out = std::move(inner);
  out.ledger = BudgetLedger();
  out.ledger.Append(pre.ledger, "pme/");
  out.ledger.Append(inner_ledger, "pme/");
  out.ignored_rows = x.rows() - 3 * n;
  out.preconditioner = pre.a;
  if (out.mu_hat.has_value()) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(pre.a);
    if (!lu.isInvertible()) {
      return SingularMatrixError("preconditioner is not invertible");
    }
    out.mu_hat = lu.solve(*out.mu_hat);
    out.weak_estimate = lu.solve(out.weak_estimate);
  }
  ASSIGN_OR_RETURN(out.budget_spent, TotalSpent(out.ledger));
  return out;
}

absl::StatusOr<GaussianEstimate> LearnGaussian(const Eigen::MatrixXd& x,
                                               double rho, double alpha,
                                               double beta, double R,
                                               double kappa,
                                               NoiseSource& noise) {
  if (!(rho > 0)) return InvalidParameterError("rho must be > 0");
  GaussianEstimate out;
  ASSIGN_OR_RETURN(out.cov,
                   Pgce(DifferencePairs(x), rho / 2, beta / 2, kappa, noise));
  ASSIGN_OR_RETURN(out.mean,
                   Pme(x, rho / 4, alpha, beta / 2, R, kappa, noise));
  out.ledger.Append(out.cov.ledger, "learn_gaussian/");
  out.ledger.Append(out.mean.ledger, "learn_gaussian/");
  ASSIGN_OR_RETURN(out.budget_spent, TotalSpent(out.ledger));
  return out;
}

}  // namespace dplearn
