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

#ifndef DPLEARN_ATTACKS_H_
#define DPLEARN_ATTACKS_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "absl/status/statusor.h"
#include "dplearn/noise.h"
#include "dplearn/product.h"

namespace dplearn {

// sum_j ((1/9 - p_j^2)/(1 - p_j^2)) (est_j - p_j) (x_j - p_j), for {-1,+1}
// data with mean p in (-1, 1)^d.
absl::StatusOr<double> FingerprintScoreProduct(const Eigen::VectorXd& est,
                                               const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& p);

// sum_j (R^2 - mu_j^2) (est_j - mu_j) (x_j - mu_j).
absl::StatusOr<double> FingerprintScoreGaussian(const Eigen::VectorXd& est,
                                                const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& mu,
                                                double R);

// A mean estimator under attack: members in, estimate out. The population
// mean is passed only so oracle baselines can be scored through the same
// interface; a private mechanism must ignore it.
using MeanMechanism = std::function<absl::StatusOr<Eigen::VectorXd>(
    const Eigen::MatrixXd& members, const Eigen::VectorXd& population_mean,
    NoiseSource& noise)>;

enum class AttackModel {
  // {-1,+1}^d with means uniform on [-prior, prior]; prior defaults to 1/3.
  kProduct,
  // N(mu, I) with mu uniform on [-prior, prior]^d.
  kGaussian,
};

struct TracingAttackConfig {
  AttackModel model = AttackModel::kProduct;
  int64_t d = 1;
  int64_t n = 1;
  int64_t trials = 1;
  int64_t non_members_per_trial = 1;
  double prior = 1.0 / 3.0;
};

struct FingerprintReport {
  // Per trial: the mean score over members and over non-members.
  std::vector<double> in_scores;
  std::vector<double> out_scores;
  double in_mean = 0;
  double in_std_error = 0;
  double out_mean = 0;
  double out_std_error = 0;
  // in_mean - out_mean, with the standard error of the per-trial difference.
  double separation = 0;
  double separation_std_error = 0;
  // Product model only: per trial, the average over coordinates of
  // w_j (f_j - P_j) sum_i (x_ij - P_j) + (f_j - P_j)^2.
  std::vector<double> fp_lemma_values;
  double fp_lemma_lhs = 0;
  double fp_lemma_std_error = 0;
  int64_t failed_trials = 0;

  std::string ToJson() const;
};

// Each trial draws a population from the prior, n members and
// non_members_per_trial non-members, runs the mechanism on the members, clamps
// its output to [-prior, prior], and scores both groups. Trial t uses child t
// of `noise`, so runs with the same seed see the same populations.
absl::StatusOr<FingerprintReport> RunTracingAttack(
    const MeanMechanism& mechanism, const TracingAttackConfig& config,
    NoiseSource& noise);

// Clamped empirical mean.
MeanMechanism EmpiricalMeanMechanism();
// Returns the population mean and ignores the data.
MeanMechanism PopulationMeanOracle();
// Ppde with flip-heavy preprocessing on (x + 1)/2, mapped back by 2q - 1.
MeanMechanism PpdeMechanism(double rho, double alpha, double beta,
                            PpdeOptions options = {});

// Up to `count` distinct matrices I + v, v symmetric with zero diagonal and
// off-diagonal entries +-alpha/(2d), chosen by a generator seeded with `seed`.
// Fewer are returned when fewer than `count` exist.
absl::StatusOr<std::vector<Eigen::MatrixXd>> CovPacking(int64_t d,
                                                        double alpha,
                                                        int64_t count,
                                                        uint64_t seed);

}  // namespace dplearn

#endif  // DPLEARN_ATTACKS_H_
