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

#include "dplearn/attacks.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dplearn/status_macros.h"
#include "json.hpp"

namespace dplearn {
namespace {

void MeanAndError(const std::vector<double>& v, double& mean, double& err) {
  mean = 0;
  err = 0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  err = std::sqrt(ss / static_cast<double>(v.size() - 1) /
                  static_cast<double>(v.size()));
}

// A row of {-1,+1} bits with P(+1) = (1 + p_j)/2, or of N(mu, I).
Eigen::RowVectorXd DrawRow(AttackModel model, const Eigen::VectorXd& center,
                           NoiseSource& noise) {
  Eigen::RowVectorXd row(center.size());
  for (Eigen::Index j = 0; j < center.size(); ++j) {
    if (model == AttackModel::kProduct) {
      row[j] = noise.Bernoulli((1.0 + center[j]) / 2.0) ? 1.0 : -1.0;
    } else {
      row[j] = center[j] + noise.Gaussian();
    }
  }
  return row;
}

}  // namespace

absl::StatusOr<double> FingerprintScoreProduct(const Eigen::VectorXd& est,
                                               const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& p) {
  if (est.size() != p.size() || x.size() != p.size()) {
    return InvalidInputError("dimensions differ");
  }
  double total = 0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double pj2 = p[j] * p[j];
    if (!(pj2 < 1)) {
      return InvalidInputError(
          absl::StrCat("|p_", j, "| must be < 1 (division by zero)"));
    }
    total += (1.0 / 9.0 - pj2) / (1.0 - pj2) * (est[j] - p[j]) * (x[j] - p[j]);
  }
  return total;
}

absl::StatusOr<double> FingerprintScoreGaussian(const Eigen::VectorXd& est,
                                                const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& mu,
                                                double R) {
  if (est.size() != mu.size() || x.size() != mu.size()) {
    return InvalidInputError("dimensions differ");
  }
  double total = 0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    total += (R * R - mu[j] * mu[j]) * (est[j] - mu[j]) * (x[j] - mu[j]);
  }
  return total;
}

std::string FingerprintReport::ToJson() const {
  nlohmann::json j;
  j["in_scores"] = in_scores;
  j["out_scores"] = out_scores;
  j["in_mean"] = in_mean;
  j["in_std_error"] = in_std_error;
  j["out_mean"] = out_mean;
  j["out_std_error"] = out_std_error;
  j["separation"] = separation;
  j["separation_std_error"] = separation_std_error;
  j["fp_lemma_lhs"] = fp_lemma_lhs;
  j["fp_lemma_std_error"] = fp_lemma_std_error;
  j["failed_trials"] = failed_trials;
  return j.dump(2);
}

absl::StatusOr<FingerprintReport> RunTracingAttack(
    const MeanMechanism& mechanism, const TracingAttackConfig& config,
    NoiseSource& noise) {
  if (config.d < 1 || config.n < 1 || config.trials < 1 ||
      config.non_members_per_trial < 1) {
    return InvalidParameterError("d, n, trials and non-members must be >= 1");
  }
  const bool product = config.model == AttackModel::kProduct;
  if (!(config.prior > 0) || (product && !(config.prior < 1))) {
    return InvalidParameterError("prior radius out of range");
  }
  const double radius = config.prior;
  FingerprintReport report;
  std::vector<double> differences;
  for (int64_t t = 0; t < config.trials; ++t) {
    NoiseSource trial = noise.Split(static_cast<uint64_t>(t));
    NoiseSource data_noise = trial.Split(0);
    NoiseSource mech_noise = trial.Split(1);

    Eigen::VectorXd center(config.d);
    for (int64_t j = 0; j < config.d; ++j) {
      center[j] = radius * (2.0 * data_noise.Uniform() - 1.0);
    }
    Eigen::MatrixXd members(config.n, config.d);
    for (int64_t i = 0; i < config.n; ++i) {
      members.row(i) = DrawRow(config.model, center, data_noise);
    }
    Eigen::MatrixXd outsiders(config.non_members_per_trial, config.d);
    for (int64_t i = 0; i < config.non_members_per_trial; ++i) {
      outsiders.row(i) = DrawRow(config.model, center, data_noise);
    }

    absl::StatusOr<Eigen::VectorXd> raw = mechanism(members, center, mech_noise);
    if (!raw.ok() || raw->size() != config.d || !raw->allFinite()) {
      ++report.failed_trials;
      continue;
    }
    const Eigen::VectorXd est = raw->cwiseMax(-radius).cwiseMin(radius);

    auto score = [&](const Eigen::RowVectorXd& row) -> absl::StatusOr<double> {
      if (product) return FingerprintScoreProduct(est, row.transpose(), center);
      return FingerprintScoreGaussian(est, row.transpose(), center, radius);
    };
    double in = 0;
    for (int64_t i = 0; i < config.n; ++i) {
      ASSIGN_OR_RETURN(double z, score(members.row(i)));
      in += z;
    }
    in /= static_cast<double>(config.n);
    double out = 0;
    for (int64_t i = 0; i < config.non_members_per_trial; ++i) {
      ASSIGN_OR_RETURN(double z, score(outsiders.row(i)));
      out += z;
    }
    out /= static_cast<double>(config.non_members_per_trial);
    report.in_scores.push_back(in);
    report.out_scores.push_back(out);
    differences.push_back(in - out);

    if (product) {
      const Eigen::VectorXd deviation =
          (members.rowwise() - center.transpose()).colwise().sum().transpose();
      double lhs = 0;
      for (int64_t j = 0; j < config.d; ++j) {
        const double pj2 = center[j] * center[j];
        const double err = est[j] - center[j];
        lhs += (1.0 / 9.0 - pj2) / (1.0 - pj2) * err * deviation[j] + err * err;
      }
      report.fp_lemma_values.push_back(lhs / static_cast<double>(config.d));
    }
  }
  MeanAndError(report.in_scores, report.in_mean, report.in_std_error);
  MeanAndError(report.out_scores, report.out_mean, report.out_std_error);
  MeanAndError(differences, report.separation, report.separation_std_error);
  MeanAndError(report.fp_lemma_values, report.fp_lemma_lhs,
               report.fp_lemma_std_error);
  return report;
}

MeanMechanism EmpiricalMeanMechanism() {
  return [](const Eigen::MatrixXd& members, const Eigen::VectorXd&,
            NoiseSource&) -> absl::StatusOr<Eigen::VectorXd> {
    return Eigen::VectorXd(members.colwise().mean().transpose());
  };
}

MeanMechanism PopulationMeanOracle() {
  return [](const Eigen::MatrixXd&, const Eigen::VectorXd& population_mean,
            NoiseSource&) -> absl::StatusOr<Eigen::VectorXd> {
    return population_mean;
  };
}

MeanMechanism PpdeMechanism(double rho, double alpha, double beta,
                            PpdeOptions options) {
  return [=](const Eigen::MatrixXd& members, const Eigen::VectorXd&,
             NoiseSource& noise) -> absl::StatusOr<Eigen::VectorXd> {
    const Eigen::MatrixXd bits = (members.array() + 1.0) / 2.0;
    ASSIGN_OR_RETURN(FlipHeavyResult fit,
                     PpdeFlipHeavy(bits, rho, alpha, beta, noise, options));
    return Eigen::VectorXd(2.0 * fit.q.array() - 1.0);
  };
}

absl::StatusOr<std::vector<Eigen::MatrixXd>> CovPacking(int64_t d,
                                                        double alpha,
                                                        int64_t count,
                                                        uint64_t seed) {
  if (d < 2) return InvalidParameterError("d must be >= 2");
  if (count < 1) return InvalidParameterError("count must be >= 1");
  const double entry = alpha / (2.0 * static_cast<double>(d));
  if (!(entry > 0 && entry < 0.5)) {
    return InvalidParameterError(
        absl::StrCat("need 0 < alpha/(2d) < 1/2, got ", entry));
  }
  const int64_t pairs = d * (d - 1) / 2;
  // 2^pairs sign patterns exist; cap the request when that is smaller.
  if (pairs < 62) count = std::min<int64_t>(count, int64_t{1} << pairs);

  NoiseSource noise = NoiseSource::Seeded(seed);
  std::set<std::vector<bool>> seen;
  std::vector<Eigen::MatrixXd> out;
  while (static_cast<int64_t>(out.size()) < count) {
    std::vector<bool> signs(pairs);
    for (int64_t k = 0; k < pairs; ++k) signs[k] = (noise.NextBits() >> 63) != 0;
    if (!seen.insert(signs).second) continue;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
    int64_t k = 0;
    for (int64_t i = 0; i < d; ++i) {
      for (int64_t j = i + 1; j < d; ++j) {
        m(i, j) = m(j, i) = signs[k++] ? entry : -entry;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace dplearn
