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

#include "dplearn/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "absl/strings/str_cat.h"
#include "dplearn/linalg.h"
#include "dplearn/normal.h"
#include "dplearn/status_macros.h"

namespace dplearn {
namespace {

McEstimate Summarize(const Eigen::VectorXd& values) {
  McEstimate out;
  out.trials = values.size();
  if (values.size() == 0) return out;
  out.estimate = values.mean();
  if (values.size() > 1) {
    const double var = (values.array() - out.estimate).square().sum() /
                       static_cast<double>(values.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return out;
}

// Log density of N(mean, L L^T) at each row of x, up to the shared constant.
Eigen::VectorXd LogDensity(const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& mean,
                           const Eigen::LLT<Eigen::MatrixXd>& llt) {
  Eigen::MatrixXd centered = (x.rowwise() - mean.transpose()).transpose();
  llt.matrixL().solveInPlace(centered);
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (centered.colwise().squaredNorm().transpose().array() +
                 log_det);
}

absl::Status CheckProbabilities(const Eigen::VectorXd& p,
                                const Eigen::VectorXd& q) {
  if (p.size() != q.size()) return InvalidInputError("dimensions differ");
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (!(p[j] >= 0 && p[j] <= 1 && q[j] >= 0 && q[j] <= 1)) {
      return InvalidInputError(
          absl::StrCat("coordinate ", j, " is outside [0, 1]"));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<double> TvGaussianSameCov(const Eigen::VectorXd& mu1,
                                         const Eigen::VectorXd& mu2,
                                         const Eigen::MatrixXd& sigma) {
  ASSIGN_OR_RETURN(double dist, MahalanobisNorm(mu1 - mu2, sigma));
  return 2.0 * NormalCdf(dist / 2.0) - 1.0;
}

absl::StatusOr<McEstimate> TvGaussianMc(const GaussianParams& p,
                                        const GaussianParams& q,
                                        int64_t trials, NoiseSource& noise) {
  if (trials < 2) return InvalidParameterError("need at least 2 trials");
  if (p.mean.size() != q.mean.size()) {
    return InvalidInputError("dimensions differ");
  }
  RETURN_IF_ERROR(ValidateGaussianParams(p));
  RETURN_IF_ERROR(ValidateGaussianParams(q));
  Eigen::LLT<Eigen::MatrixXd> llt_p(p.cov);
  Eigen::LLT<Eigen::MatrixXd> llt_q(q.cov);
  if (llt_p.info() != Eigen::Success || llt_q.info() != Eigen::Success) {
    return SingularMatrixError("covariance is not positive definite");
  }
  ASSIGN_OR_RETURN(Eigen::MatrixXd x, SampleGaussian(p, trials, noise));
  const Eigen::VectorXd log_ratio =
      LogDensity(x, q.mean, llt_q) - LogDensity(x, p.mean, llt_p);
  // 1 - exp(t) is <= 0 for t >= 0, so exp never overflows where it matters.
  const Eigen::VectorXd values = log_ratio.unaryExpr(
      [](double t) { return t >= 0 ? 0.0 : -std::expm1(t); });
  return Summarize(values);
}

absl::StatusOr<double> TvProductExact(const Eigen::VectorXd& p,
                                      const Eigen::VectorXd& q) {
  RETURN_IF_ERROR(CheckProbabilities(p, q));
  const int64_t d = p.size();
  if (d > kMaxExactProductDim) {
    return TooLargeError(absl::StrCat("exact product TV needs d <= ",
                                      kMaxExactProductDim, ", got ", d));
  }
  // Probabilities of all 2^d outcomes, built one coordinate at a time.
  std::vector<double> pp(size_t{1} << d);
  std::vector<double> qq(size_t{1} << d);
  pp[0] = 1;
  qq[0] = 1;
  for (int64_t j = 0; j < d; ++j) {
    const size_t width = size_t{1} << j;
    for (size_t s = 0; s < width; ++s) {
      pp[s | width] = pp[s] * p[j];
      pp[s] *= 1 - p[j];
      qq[s | width] = qq[s] * q[j];
      qq[s] *= 1 - q[j];
    }
  }
  double total = 0;
  for (size_t s = 0; s < pp.size(); ++s) total += std::abs(pp[s] - qq[s]);
  return std::min(1.0, total / 2);
}

absl::StatusOr<McEstimate> TvProductMc(const Eigen::VectorXd& p,
                                       const Eigen::VectorXd& q,
                                       int64_t trials, NoiseSource& noise) {
  RETURN_IF_ERROR(CheckProbabilities(p, q));
  if (trials < 2) return InvalidParameterError("need at least 2 trials");
  Eigen::VectorXd values(trials);
  for (int64_t t = 0; t < trials; ++t) {
    double log_ratio = 0;
    bool q_zero = false;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      const bool bit = noise.Bernoulli(p[j]);
      const double pj = bit ? p[j] : 1 - p[j];
      const double qj = bit ? q[j] : 1 - q[j];
      if (qj == 0) {
        q_zero = true;
        break;
      }
      log_ratio += std::log(qj) - std::log(pj);
    }
    values[t] = q_zero ? 1.0 : (log_ratio >= 0 ? 0.0 : -std::expm1(log_ratio));
  }
  return Summarize(values);
}

absl::StatusOr<Chi2Kl> Chi2KlBernoulli(double p, double q) {
  if (!(p >= 0 && p <= 1 && q >= 0 && q <= 1)) {
    return InvalidInputError("probabilities must lie in [0, 1]");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Chi2Kl out;
  if (p == q) return out;
  if (q == 0 || q == 1) {
    out.chi2 = kInf;
    out.kl = kInf;
    return out;
  }
  out.chi2 = (p - q) * (p - q) / (q * (1 - q));
  auto term = [](double a, double b) {
    return a == 0 ? 0.0 : a * std::log(a / b);
  };
  out.kl = std::max(0.0, term(p, q) + term(1 - p, 1 - q));
  return out;
}

double ProductSdUpper(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return (p - q).cwiseAbs().sum();
}

absl::StatusOr<GaussianParamErrors> GaussianParamError(
    const GaussianParams& truth, const GaussianParams& estimate) {
  if (truth.mean.size() != estimate.mean.size() ||
      truth.cov.rows() != estimate.cov.rows()) {
    return InvalidInputError("dimensions differ");
  }
  GaussianParamErrors out;
  ASSIGN_OR_RETURN(out.mean_error,
                   MahalanobisNorm(truth.mean - estimate.mean, truth.cov));
  ASSIGN_OR_RETURN(out.cov_error,
                   MahalanobisMatrixNorm(truth.cov - estimate.cov, truth.cov));
  return out;
}

}  // namespace dplearn
