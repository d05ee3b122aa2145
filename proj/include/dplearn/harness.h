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

#ifndef DPLEARN_HARNESS_H_
#define DPLEARN_HARNESS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "dplearn/privacy.h"

namespace dplearn {

enum class Task {
  kGaussianCov,
  kGaussianCovUnbounded,
  kGaussianMean,
  kGaussianFull,
  kProduct,
  kAttack,
};

absl::string_view TaskName(Task task);
absl::StatusOr<Task> ParseTask(absl::string_view name);

struct ExperimentConfig {
  Task task = Task::kGaussianCov;
  int64_t n = 0;
  int64_t d = 0;
  double kappa = 1.0;
  double R = 1.0;
  double alpha = 0.1;
  double beta = 0.05;
  // Exactly one of rho and (epsilon, delta) is set.
  std::optional<double> rho;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::vector<uint64_t> seeds = {0};
  int64_t trials = 1;
  std::string output_dir;
  // Replaces every mechanism's noise by the zero-noise oracle. No privacy.
  bool zero_noise = false;
  // Load samples from this CSV instead of a synthetic model. Ground-truth
  // metrics are then skipped.
  std::string data_path;
  bool data_has_header = false;
  bool echo_samples = false;

  // Gaussian model: covariance eigenvalues (default all 1), rotated by a
  // seeded random orthogonal matrix when `rotate` is set; mean given directly
  // or drawn with norm `mean_norm`.
  std::vector<double> spectrum;
  bool rotate = false;
  std::vector<double> mean;
  double mean_norm = 0;

  // Product model: explicit p, or the mixed-bias generator when empty.
  std::vector<double> p;
  std::optional<int64_t> block_size;
  bool flip_heavy = false;

  // Attack: "ppde", "empirical" or "oracle".
  std::string mechanism = "ppde";
  int64_t non_members = 1;
  double prior = 1.0 / 3.0;

  // Sweep: sample sizes to run.
  std::vector<int64_t> sweep_n;
  int workers = 0;
};

// Parses a JSON object whose keys mirror the field names above; "task" takes
// the names accepted by ParseTask. Unknown keys are rejected.
absl::StatusOr<ExperimentConfig> ParseConfigJson(absl::string_view text);
absl::Status ValidateConfig(const ExperimentConfig& config);

// p with d/3 coordinates at 0.4, d/3 at 0.05 and the rest at 1/d.
Eigen::VectorXd MixedBiasProduct(int64_t d);

struct TrialResult {
  uint64_t seed = 0;
  int64_t trial = 0;
  int64_t n = 0;
  double runtime_ms = 0;
  std::vector<std::pair<std::string, double>> metrics;
  PrivacyBudget declared = *PrivacyBudget::Zcdp(0);
  PrivacyBudget spent = *PrivacyBudget::Zcdp(0);
  std::string ledger;
  // Empty on success.
  std::string error;
};

struct TrialReport {
  ExperimentConfig config;
  // Sorted by (n, seed, trial).
  std::vector<TrialResult> trials;
  // Data of the first (seed, trial) when config.echo_samples is set.
  std::optional<Eigen::MatrixXd> echoed_samples;
};

absl::StatusOr<TrialReport> RunExperiment(const ExperimentConfig& config);

// Runs config once per entry of config.sweep_n and merges the trials.
absl::StatusOr<TrialReport> RunSweep(const ExperimentConfig& config);

// Long-format CSV: task,seed,trial,n,d,param_json,metric_name,metric_value.
std::string ReportCsv(const TrialReport& report);
// Summary JSON with per-trial metrics, runtimes, budgets and medians.
std::string ReportJson(const TrialReport& report);
absl::Status WriteReport(const TrialReport& report);

struct BudgetCheck {
  bool pass = true;
  std::string breakdown;
};

// Every successful trial's spent budget equals its declared budget within
// 1e-9.
BudgetCheck BudgetLedgerCheck(const TrialReport& report);

// Median of a metric over trials that report it, or nullopt.
std::optional<double> MedianMetric(const TrialReport& report,
                                   absl::string_view metric,
                                   std::optional<int64_t> n = std::nullopt);

}  // namespace dplearn

#endif  // DPLEARN_HARNESS_H_
