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

#include "dplearn/privacy.h"

#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dplearn/linalg.h"
#include "dplearn/sampling.h"
#include "dplearn/status_macros.h"

namespace dplearn {

absl::StatusOr<PrivacyBudget> PrivacyBudget::Zcdp(double rho) {
  if (!(rho >= 0) || !std::isfinite(rho)) {
    return InvalidParameterError(absl::StrCat("rho must be >= 0, got ", rho));
  }
  return PrivacyBudget(PrivacyRegime::kZcdp, rho, 0, 0);
}

absl::StatusOr<PrivacyBudget> PrivacyBudget::PureDp(double epsilon) {
  if (!(epsilon >= 0) || !std::isfinite(epsilon)) {
    return InvalidParameterError(
        absl::StrCat("epsilon must be >= 0, got ", epsilon));
  }
  return PrivacyBudget(PrivacyRegime::kPureDp, 0, epsilon, 0);
}

absl::StatusOr<PrivacyBudget> PrivacyBudget::ApproxDp(double epsilon,
                                                      double delta) {
  if (!(epsilon >= 0) || !std::isfinite(epsilon)) {
    return InvalidParameterError(
        absl::StrCat("epsilon must be >= 0, got ", epsilon));
  }
  if (!(delta >= 0 && delta < 1)) {
    return InvalidParameterError(
        absl::StrCat("delta must lie in [0, 1), got ", delta));
  }
  return PrivacyBudget(PrivacyRegime::kApproxDp, 0, epsilon, delta);
}

std::string PrivacyBudget::DebugString() const {
  switch (regime_) {
    case PrivacyRegime::kZcdp:
      return absl::StrCat("zCDP(rho=", rho_, ")");
    case PrivacyRegime::kPureDp:
      return absl::StrCat("DP(eps=", epsilon_, ")");
    case PrivacyRegime::kApproxDp:
      return absl::StrCat("DP(eps=", epsilon_, ", delta=", delta_, ")");
  }
  return "unknown";
}

absl::StatusOr<double> ComposeZcdp(absl::Span<const double> rhos) {
  double total = 0;
  for (double rho : rhos) {
    if (!(rho >= 0)) {
      return InvalidParameterError(
          absl::StrCat("zCDP budgets must be >= 0, got ", rho));
    }
    total += rho;
  }
  return total;
}

absl::StatusOr<PrivacyBudget> ZcdpToApproxDp(double rho, double delta) {
  if (!(rho >= 0)) {
    return InvalidParameterError(absl::StrCat("rho must be >= 0, got ", rho));
  }
  if (!(delta > 0 && delta < 1)) {
    return InvalidParameterError(
        absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  return PrivacyBudget::ApproxDp(
      rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta)), delta);
}

double PureDpToZcdp(double epsilon) { return 0.5 * epsilon * epsilon; }

absl::StatusOr<PrivacyBudget> ComposeApproxDp(
    absl::Span<const PrivacyBudget> budgets) {
  double epsilon = 0;
  double delta = 0;
  for (const PrivacyBudget& b : budgets) {
    if (b.regime() == PrivacyRegime::kZcdp) {
      return InvalidParameterError(
          "basic composition takes (epsilon, delta) budgets; convert zCDP "
          "first");
    }
    epsilon += b.epsilon();
    delta += b.delta();
  }
  return PrivacyBudget::ApproxDp(epsilon, delta);
}

absl::StatusOr<PrivacyBudget> ComposeApproxDpAdvanced(
    absl::Span<const PrivacyBudget> budgets, double delta0) {
  if (!(delta0 > 0 && delta0 < 1)) {
    return InvalidParameterError(
        absl::StrCat("delta0 must lie in (0, 1), got ", delta0));
  }
  if (budgets.empty()) return PrivacyBudget::ApproxDp(0, delta0);
  const double eps0 = budgets.front().epsilon();
  if (eps0 > 1) {
    return InvalidParameterError(absl::StrCat(
        "advanced composition needs a common epsilon <= 1, got ", eps0));
  }
  double delta = delta0;
  for (const PrivacyBudget& b : budgets) {
    if (b.regime() == PrivacyRegime::kZcdp) {
      return InvalidParameterError(
          "advanced composition takes (epsilon, delta) budgets");
    }
    if (std::abs(b.epsilon() - eps0) > 1e-12 * std::max(1.0, eps0)) {
      return InvalidParameterError(
          "advanced composition needs every mechanism to share one epsilon");
    }
    delta += b.delta();
  }
  const double t = static_cast<double>(budgets.size());
  return PrivacyBudget::ApproxDp(eps0 * std::sqrt(6.0 * t * std::log(1.0 / delta0)),
                                 delta);
}

void BudgetLedger::Record(std::string label, PrivacyBudget budget) {
  charges_.push_back(Charge{std::move(label), budget});
}

void BudgetLedger::Append(const BudgetLedger& other, absl::string_view prefix) {
  for (const Charge& c : other.charges_) {
    charges_.push_back(Charge{absl::StrCat(prefix, c.label), c.budget});
  }
}

absl::StatusOr<double> BudgetLedger::TotalRho() const {
  std::vector<double> rhos;
  rhos.reserve(charges_.size());
  for (const Charge& c : charges_) {
    if (c.budget.regime() != PrivacyRegime::kZcdp) {
      return InvalidParameterError(
          absl::StrCat("ledger entry '", c.label, "' is not zCDP"));
    }
    rhos.push_back(c.budget.rho());
  }
  return ComposeZcdp(rhos);
}

std::string BudgetLedger::DebugString() const {
  std::string out;
  for (const Charge& c : charges_) {
    absl::StrAppend(&out, c.label, ": ", c.budget.DebugString(), "\n");
  }
  return out;
}

double GaussianMechanismStddev(double l2_sensitivity, double rho) {
  return l2_sensitivity / std::sqrt(2.0 * rho);
}

absl::StatusOr<Eigen::VectorXd> GaussianMechanism(const Eigen::VectorXd& v,
                                                  double l2_sensitivity,
                                                  double rho,
                                                  NoiseSource& noise) {
  if (!(rho > 0)) {
    return InvalidParameterError(absl::StrCat("rho must be > 0, got ", rho));
  }
  if (!(l2_sensitivity >= 0)) {
    return InvalidParameterError("sensitivity must be >= 0");
  }
  if (noise.is_zero_noise() || l2_sensitivity == 0) return v;
  const double stddev = GaussianMechanismStddev(l2_sensitivity, rho);
  Eigen::VectorXd out = v;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += noise.Gaussian(stddev);
  return out;
}

absl::StatusOr<Eigen::MatrixXd> GaussianMechanismSymmetric(
    const Eigen::MatrixXd& m, double frobenius_sensitivity, double rho,
    NoiseSource& noise) {
  if (!(rho > 0)) {
    return InvalidParameterError(absl::StrCat("rho must be > 0, got ", rho));
  }
  if (!(frobenius_sensitivity >= 0)) {
    return InvalidParameterError("sensitivity must be >= 0");
  }
  if (!IsSymmetric(m)) return InvalidInputError("matrix is not symmetric");
  if (noise.is_zero_noise() || frobenius_sensitivity == 0) return m;
  const double stddev = GaussianMechanismStddev(frobenius_sensitivity, rho);
  return Eigen::MatrixXd(m + SampleSymmetricGaussian(m.rows(), stddev, noise));
}

}  // namespace dplearn
