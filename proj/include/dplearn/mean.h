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

#ifndef DPLEARN_MEAN_H_
#define DPLEARN_MEAN_H_

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "absl/status/statusor.h"
#include "dplearn/covariance.h"
#include "dplearn/noise.h"
#include "dplearn/privacy.h"

namespace dplearn {

struct MeanEstimate {
  // Absent when the estimate aborted.
  std::optional<Eigen::VectorXd> mu_hat;
  // Coarse per-coordinate location from the histogram vote.
  Eigen::VectorXd weak_estimate;
  bool aborted = false;
  // Coordinate whose histogram found no heavy bucket, or -1.
  int64_t aborted_coordinate = -1;
  // Rows left over when the sample count is not a multiple of 3 (Pme only).
  int64_t ignored_rows = 0;
  // Preconditioner used by Pme; identity otherwise.
  Eigen::MatrixXd preconditioner;
  PrivacyBudget budget_spent = *PrivacyBudget::Zcdp(0);
  BudgetLedger ledger;
};

// Half-width of the clipping window used when kappa > 1, in units of the
// rescaled data: 2 + sqrt(2 ln(2m/beta)).
double UnivariateClipHalfWidth(int64_t m, double beta);

// rho-zCDP estimate of the mean of N(mu, s^2) with |mu| <= R and
// 1 <= s^2 <= kappa. The data are scaled by 1/sqrt(kappa); the first half
// votes on a unit bucket with a Gaussian histogram (rho/2). With kappa = 1 the
// second half is used for a noisy CDF inversion at the bucket's left end;
// with kappa > 1 it gives a noisy clipped mean around the bucket's center
// (rho/2 either way). Aborts when no bucket reaches frequency 1/4.
absl::StatusOr<MeanEstimate> UnivariateMean(const Eigen::VectorXd& x,
                                            double rho, double beta, double R,
                                            double kappa, NoiseSource& noise);

// Coordinate-wise UnivariateMean with rho/d and beta/d per coordinate. Each
// coordinate draws from its own child of `noise`.
absl::StatusOr<MeanEstimate> NaivePme(const Eigen::MatrixXd& x, double rho,
                                      double alpha, double beta, double R,
                                      double kappa, NoiseSource& noise);

// Preconditioned mean estimate; spends 2 rho. The first 2n rows form
// difference pairs for Ppc(rho), the last n rows are mapped through the
// preconditioner and passed to NaivePme(rho). When kappa needs no
// preconditioning NaivePme gets the whole 2 rho.
absl::StatusOr<MeanEstimate> Pme(const Eigen::MatrixXd& x, double rho,
                                 double alpha, double beta, double R,
                                 double kappa, NoiseSource& noise,
                                 const PpcOptions& options = {});

// Rows (x_{2i+1} - x_{2i}) / sqrt(2) for i < rows/2.
Eigen::MatrixXd DifferencePairs(const Eigen::MatrixXd& x);

struct GaussianEstimate {
  MeanEstimate mean;
  CovEstimate cov;
  PrivacyBudget budget_spent = *PrivacyBudget::Zcdp(0);
  BudgetLedger ledger;
};

// Pgce on difference pairs with rho/2 and Pme with rho/4 (which spends rho/2).
absl::StatusOr<GaussianEstimate> LearnGaussian(const Eigen::MatrixXd& x,
                                               double rho, double alpha,
                                               double beta, double R,
                                               double kappa,
                                               NoiseSource& noise);

}  // namespace dplearn

#endif  // DPLEARN_MEAN_H_
