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

#ifndef DPLEARN_PRIVACY_H_
#define DPLEARN_PRIVACY_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "absl/types/span.h"
#include "dplearn/noise.h"

namespace dplearn {

enum class PrivacyRegime { kZcdp, kPureDp, kApproxDp };

// An immutable privacy guarantee. Exactly one regime's parameters are set;
// the others read as zero.
class PrivacyBudget {
 public:
  static absl::StatusOr<PrivacyBudget> Zcdp(double rho);
  static absl::StatusOr<PrivacyBudget> PureDp(double epsilon);
  static absl::StatusOr<PrivacyBudget> ApproxDp(double epsilon, double delta);

  PrivacyRegime regime() const { return regime_; }
  double rho() const { return rho_; }
  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }

  std::string DebugString() const;

 private:
  PrivacyBudget(PrivacyRegime regime, double rho, double epsilon, double delta)
      : regime_(regime), rho_(rho), epsilon_(epsilon), delta_(delta) {}

  PrivacyRegime regime_;
  double rho_;
  double epsilon_;
  double delta_;
};

// rho-zCDP composes additively.
absl::StatusOr<double> ComposeZcdp(absl::Span<const double> rhos);

// rho-zCDP implies (rho + 2 sqrt(rho ln(1/delta)), delta)-DP.
absl::StatusOr<PrivacyBudget> ZcdpToApproxDp(double rho, double delta);

// epsilon-DP implies epsilon^2/2-zCDP.
double PureDpToZcdp(double epsilon);

// Basic composition: epsilons and deltas add. Pure-DP entries count as
// (epsilon, 0); zCDP entries are rejected.
absl::StatusOr<PrivacyBudget> ComposeApproxDp(
    absl::Span<const PrivacyBudget> budgets);

// Advanced composition of T mechanisms that are each (eps0, delta_t)-DP with a
// common eps0 <= 1: (eps0 sqrt(6 T ln(1/delta0)), delta0 + sum delta_t).
absl::StatusOr<PrivacyBudget> ComposeApproxDpAdvanced(
    absl::Span<const PrivacyBudget> budgets, double delta0);

// Record of every charge an estimator makes against its budget.
class BudgetLedger {
 public:
  struct Charge {
    std::string label;
    PrivacyBudget budget;
  };

  void Record(std::string label, PrivacyBudget budget);
  void Append(const BudgetLedger& other, absl::string_view prefix);

  const std::vector<Charge>& charges() const { return charges_; }
  bool empty() const { return charges_.empty(); }

  // Sum of rho over all charges; fails if any charge is not zCDP.
  absl::StatusOr<double> TotalRho() const;
  std::string DebugString() const;

 private:
  std::vector<Charge> charges_;
};

// Standard deviation Delta / sqrt(2 rho) of the rho-zCDP Gaussian mechanism.
double GaussianMechanismStddev(double l2_sensitivity, double rho);

// Releases v + N(0, s^2 I) with s = l2_sensitivity / sqrt(2 rho).
absl::StatusOr<Eigen::VectorXd> GaussianMechanism(const Eigen::VectorXd& v,
                                                  double l2_sensitivity,
                                                  double rho,
                                                  NoiseSource& noise);

// Releases M + N for a symmetric M, where N is symmetric with i.i.d.
// N(0, s^2) entries on and above the diagonal, s = frobenius_sensitivity /
// sqrt(2 rho). The upper triangle of a symmetric difference has l2 norm at
// most its Frobenius norm, so this is rho-zCDP.
absl::StatusOr<Eigen::MatrixXd> GaussianMechanismSymmetric(
    const Eigen::MatrixXd& m, double frobenius_sensitivity, double rho,
    NoiseSource& noise);

}  // namespace dplearn

#endif  // DPLEARN_PRIVACY_H_
