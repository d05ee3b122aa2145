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

#ifndef DPLEARN_METRICS_H_
#define DPLEARN_METRICS_H_

#include <cstdint>

#include <Eigen/Core>

#include "absl/status/statusor.h"
#include "dplearn/noise.h"
#include "dplearn/sampling.h"

namespace dplearn {

// Monte Carlo estimate with its standard error.
struct McEstimate {
  double estimate = 0;
  double std_error = 0;
  int64_t trials = 0;
};

// TV(N(mu1, sigma), N(mu2, sigma)) = 2 Phi(||mu1 - mu2||_sigma / 2) - 1.
absl::StatusOr<double> TvGaussianSameCov(const Eigen::VectorXd& mu1,
                                         const Eigen::VectorXd& mu2,
                                         const Eigen::MatrixXd& sigma);

// E_{x ~ P}[max(0, 1 - q(x)/p(x))], with the density ratio taken in log space.
absl::StatusOr<McEstimate> TvGaussianMc(const GaussianParams& p,
                                        const GaussianParams& q,
                                        int64_t trials, NoiseSource& noise);

// Largest dimension TvProductExact accepts.
inline constexpr int64_t kMaxExactProductDim = 20;

// (1/2) sum over {0,1}^d of |P(x) - Q(x)| for product distributions.
absl::StatusOr<double> TvProductExact(const Eigen::VectorXd& p,
                                      const Eigen::VectorXd& q);

// Monte Carlo TV between product distributions, sampling from P.
absl::StatusOr<McEstimate> TvProductMc(const Eigen::VectorXd& p,
                                       const Eigen::VectorXd& q,
                                       int64_t trials, NoiseSource& noise);

struct Chi2Kl {
  double chi2 = 0;
  double kl = 0;
};

// chi^2(p || q) = (p - q)^2 / (q (1 - q)) and KL(Ber(p) || Ber(q)) with
// 0 ln 0 = 0. Both are +infinity when q is 0 or 1 and p differs from q.
absl::StatusOr<Chi2Kl> Chi2KlBernoulli(double p, double q);

// sum_j |p_j - q_j|, an upper bound on the product TV.
double ProductSdUpper(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

struct GaussianParamErrors {
  // ||mu - mu_hat||_Sigma.
  double mean_error = 0;
  // ||Sigma - Sigma_hat||_Sigma.
  double cov_error = 0;
};

absl::StatusOr<GaussianParamErrors> GaussianParamError(
    const GaussianParams& truth, const GaussianParams& estimate);

}  // namespace dplearn

#endif  // DPLEARN_METRICS_H_
