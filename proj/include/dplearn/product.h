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

#ifndef DPLEARN_PRODUCT_H_
#define DPLEARN_PRODUCT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "absl/status/statusor.h"
#include "dplearn/noise.h"
#include "dplearn/privacy.h"

namespace dplearn {

// x if ||x||_2 <= b, else (b/||x||_2) x.
Eigen::VectorXd Truncate(const Eigen::VectorXd& x, double b);

// (1/m) sum_i Truncate(row_i, b).
absl::StatusOr<Eigen::VectorXd> TruncatedMean(const Eigen::MatrixXd& x,
                                              double b);

// Declared l2 sensitivity of TruncatedMean for rows with nonnegative entries
// under replacement of one row: sqrt(2) b / m.
double TruncatedMeanSensitivity(double b, int64_t m);

// floor(log2 d) + 1: the most rounds (partitioning plus final) PPDE can run.
int PpdeBlockCount(int64_t d);

// max(1, log2(d/2)), the R inside log(mR/beta).
double PpdeLogFactor(int64_t d);

// m = c' d / alpha^2 + c d / (alpha sqrt(2 rho)) with
// c = 128 ln^{5/4}(d/(alpha beta sqrt(2 rho))) and c' = 128 ln^3(dR/beta).
int64_t PpdeDefaultBlockSize(int64_t d, double rho, double alpha, double beta);

struct PpdeOptions {
  // Rows per block; defaults to PpdeDefaultBlockSize.
  std::optional<int64_t> block_size;
  // Called once per row read, with the row index and the round reading it.
  std::function<void(int64_t row, int round)> row_observer;
};

struct PpdeRound {
  int round = 0;
  bool final_round = false;
  double u = 0;
  double tau = 0;
  double b = 0;
  int64_t active = 0;
  int64_t frozen = 0;
  int64_t block_start = 0;
  double noise_stddev = 0;
};

struct PpdeResult {
  // Estimated Bernoulli means, in [0, 1].
  Eigen::VectorXd q;
  std::vector<PpdeRound> rounds;
  int64_t block_size = 0;
  int blocks = 0;
  PrivacyBudget budget_spent = *PrivacyBudget::Zcdp(0);
  BudgetLedger ledger;
};

// rho-zCDP estimate of a product distribution over {0,1}^d with all means at
// most 1/2. Each round reads its own block of rows, so the rounds do not
// compose. Fails with insufficient-samples when n < blocks * block_size.
absl::StatusOr<PpdeResult> Ppde(const Eigen::MatrixXd& x, double rho,
                                double alpha, double beta, NoiseSource& noise,
                                const PpdeOptions& options = {});

struct FlipHeavyResult {
  Eigen::VectorXd q;
  // Coordinates that were flipped before Ppde and unflipped after.
  std::vector<bool> flipped;
  PpdeResult inner;
  PrivacyBudget budget_spent = *PrivacyBudget::Zcdp(0);
  BudgetLedger ledger;
};

// Removes the means <= 1/2 assumption: a Gaussian vote on the coordinate
// means (rho/10) picks coordinates to flip, Ppde runs with 9 rho/10, and the
// flipped coordinates of q are mapped back to 1 - q.
absl::StatusOr<FlipHeavyResult> PpdeFlipHeavy(const Eigen::MatrixXd& x,
                                              double rho, double alpha,
                                              double beta, NoiseSource& noise,
                                              const PpdeOptions& options = {});

}  // namespace dplearn

#endif  // DPLEARN_PRODUCT_H_
