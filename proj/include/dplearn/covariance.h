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

#ifndef DPLEARN_COVARIANCE_H_
#define DPLEARN_COVARIANCE_H_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "absl/status/statusor.h"
#include "dplearn/noise.h"
#include "dplearn/privacy.h"

namespace dplearn {

struct NaivePceDiagnostics {
  int64_t n = 0;
  // Rows with squared norm within the clamp radius.
  int64_t kept = 0;
  double clamp_radius_sq = 0;
  double frobenius_sensitivity = 0;
  double noise_stddev = 0;
};

struct NaivePceResult {
  Eigen::MatrixXd sigma;
  NaivePceDiagnostics diagnostics;
};

// B^2 = kappa d (1 + 3 ln(2n/beta)).
double NaivePceClampRadiusSq(int64_t n, int64_t d, double beta, double kappa);

// rho-zCDP estimate of E[x x^T] for mean-zero rows with I <= Sigma <= kappa I.
// Rows with ||x||^2 > B^2 are dropped, the rest are averaged with divisor n,
// symmetric Gaussian noise with Frobenius sensitivity 2B^2/n is added, and the
// result is projected onto the PSD cone.
absl::StatusOr<NaivePceResult> NaivePce(const Eigen::MatrixXd& x, double rho,
                                        double beta, double kappa,
                                        NoiseSource& noise);

// Runs NaivePce repeatedly on one sample matrix. The clamped second moment is
// recomputed only when the set of kept rows changes; the noise is fresh on
// every call. `x` must outlive the cache.
class NaivePceCache {
 public:
  explicit NaivePceCache(const Eigen::MatrixXd& x);

  absl::StatusOr<NaivePceResult> Run(double rho, double beta, double kappa,
                                     NoiseSource& noise);

 private:
  const Eigen::MatrixXd& x_;
  Eigen::VectorXd norms_sq_;
  int64_t cached_kept_ = -1;
  Eigen::MatrixXd cached_moment_;
};

// scale * P_V + P_{V-perp} for an orthonormal basis V (d x k, k may be 0).
Eigen::MatrixXd SubspaceScaling(const Eigen::MatrixXd& basis, double scale);

struct WeakPpcResult {
  // Orthonormal columns spanning the eigenvectors of the noisy estimate with
  // eigenvalue >= kappa/2. May have zero columns.
  Eigen::MatrixXd basis;
  // (1/sqrt(K)) P_V + P_{V-perp}.
  Eigen::MatrixXd a;
  // Eigenvalues of the noisy estimate, descending.
  Eigen::VectorXd eigenvalues;
  NaivePceDiagnostics diagnostics;
};

absl::StatusOr<WeakPpcResult> WeakPpc(const Eigen::MatrixXd& x, double rho,
                                      double beta, double kappa, double k,
                                      NoiseSource& noise);

// The post-processing half of WeakPpc, given the noisy estimate z.
absl::StatusOr<WeakPpcResult> WeakPpcFromEstimate(const NaivePceResult& z,
                                                  double kappa, double k);

struct PpcOptions {
  double shrink_k = 2.0;
  // Each round's matrix is this factor times the one-step preconditioner.
  double round_scale = 1.1;
  double kappa_decay = 0.7;
  double target_kappa = 1000.0;
};

// T = max(0, ceil(ln(kappa/target)/ln(1/decay))).
int PpcRoundCount(double kappa, const PpcOptions& options = {});

struct PpcRound {
  int round = 0;
  double kappa = 0;
  double threshold = 0;
  int64_t subspace_dim = 0;
  double rho = 0;
  double beta = 0;
  NaivePceDiagnostics diagnostics;
};

// A preconditioner for samples x: the rows of x * a^T have covariance
// a Sigma a^T with I <= a Sigma a^T <= certified_kappa I with high
// probability. `a` is a product of symmetric round matrices and is not itself
// symmetric in general.
struct Preconditioner {
  Eigen::MatrixXd a;
  // The subspace V found in each round, in that round's coordinates.
  std::vector<Eigen::MatrixXd> round_bases;
  double shrink_k = 2.0;
  double certified_kappa = 1.0;
  std::vector<PpcRound> round_log;
  BudgetLedger ledger;
};

absl::StatusOr<Preconditioner> Ppc(const Eigen::MatrixXd& x, double rho,
                                   double beta, double kappa,
                                   NoiseSource& noise,
                                   const PpcOptions& options = {});

struct CovEstimate {
  Eigen::MatrixXd sigma_hat;
  PrivacyBudget budget_spent = *PrivacyBudget::Zcdp(0);
  BudgetLedger ledger;
  Preconditioner preconditioner;
  NaivePceDiagnostics final_diagnostics;
};

// rho-zCDP covariance estimate for mean-zero Gaussian rows with
// I <= Sigma <= kappa I. Half of rho and beta go to Ppc and half to a final
// NaivePce on the preconditioned rows at the certified condition bound; when
// no preconditioning round is needed the whole budget goes to the final step.
absl::StatusOr<CovEstimate> Pgce(const Eigen::MatrixXd& x, double rho,
                                 double beta, double kappa, NoiseSource& noise,
                                 const PpcOptions& options = {});

// Rows of x mapped through a: x * a^T.
Eigen::MatrixXd TransformRows(const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& a);

// a^{-1} s a^{-T}, symmetrized. Fails if a is numerically singular.
absl::StatusOr<Eigen::MatrixXd> Unprecondition(const Eigen::MatrixXd& s,
                                               const Eigen::MatrixXd& a);

}  // namespace dplearn

#endif  // DPLEARN_COVARIANCE_H_
