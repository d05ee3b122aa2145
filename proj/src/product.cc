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

#include "dplearn/product.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dplearn/status_macros.h"

namespace dplearn {

Eigen::VectorXd Truncate(const Eigen::VectorXd& x, double b) {
  const double norm = x.norm();
  if (norm <= b) return x;
  return (b / norm) * x;
}

absl::StatusOr<Eigen::VectorXd> TruncatedMean(const Eigen::MatrixXd& x,
                                              double b) {
  if (x.rows() == 0) return EmptyInputError("truncated mean of no rows");
  if (!(b >= 0)) return InvalidParameterError("radius must be >= 0");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sum += Truncate(x.row(i).transpose(), b);
  }
  return sum / static_cast<double>(x.rows());
}

double TruncatedMeanSensitivity(double b, int64_t m) {
  return std::sqrt(2.0) * b / static_cast<double>(m);
}

int PpdeBlockCount(int64_t d) {
  int k = 0;
  while ((int64_t{2} << k) <= d) ++k;
  return k + 1;
}

double PpdeLogFactor(int64_t d) {
  return std::max(1.0, std::log2(static_cast<double>(d) / 2.0));
}

int64_t PpdeDefaultBlockSize(int64_t d, double rho, double alpha, double beta) {
  const double dd = static_cast<double>(d);
  const double s = std::sqrt(2.0 * rho);
  const double c =
      128.0 * std::pow(std::max(1.0, std::log(dd / (alpha * beta * s))), 1.25);
  const double c_prime =
      128.0 * std::pow(std::max(1.0, std::log(dd * PpdeLogFactor(d) / beta)),
                       3.0);
  return static_cast<int64_t>(
      std::ceil(c_prime * dd / (alpha * alpha) + c * dd / (alpha * s)));
}

absl::StatusOr<PpdeResult> Ppde(const Eigen::MatrixXd& x, double rho,
                                double alpha, double beta, NoiseSource& noise,
                                const PpdeOptions& options) {
  if (!(rho > 0)) return InvalidParameterError("rho must be > 0");
  if (!(alpha > 0)) return InvalidParameterError("alpha must be > 0");
  if (!(beta > 0 && beta < 1)) {
    return InvalidParameterError("beta must lie in (0, 1)");
  }
  const int64_t d = x.cols();
  if (d == 0) return InvalidInputError("zero-dimensional samples");
  if (!((x.array() == 0.0) || (x.array() == 1.0)).all()) {
    return InvalidInputError("samples must be 0/1");
  }
  const int blocks = PpdeBlockCount(d);
  const int64_t m = options.block_size.has_value()
                        ? *options.block_size
                        : PpdeDefaultBlockSize(d, rho, alpha, beta);
  if (m < 1) return InvalidParameterError("block size must be >= 1");
  if (x.rows() < blocks * m) {
    return InsufficientSamplesError(absl::StrCat(
        "need ", blocks, " blocks of m = ", m, " rows (n >= ", blocks * m,
        "), got n = ", x.rows()));
  }
  const double md = static_cast<double>(m);
  const double log_factor = PpdeLogFactor(d);

  PpdeResult out;
  out.q = Eigen::VectorXd::Zero(d);
  out.block_size = m;
  out.blocks = blocks;
  std::vector<Eigen::Index> active(d);
  for (int64_t j = 0; j < d; ++j) active[j] = j;

  // Noisy truncated mean of block `round` restricted to `active`.
  auto noisy_block_mean = [&](int round, double b, PpdeRound& log)
      -> absl::StatusOr<Eigen::VectorXd> {
    const int64_t start = (round - 1) * m;
    log.block_start = start;
    if (options.row_observer) {
      for (int64_t i = start; i < start + m; ++i) {
        options.row_observer(i, round);
      }
    }
    Eigen::MatrixXd block = x(Eigen::seqN(start, m), active);
    ASSIGN_OR_RETURN(Eigen::VectorXd mean, TruncatedMean(block, b));
    const double sensitivity = TruncatedMeanSensitivity(b, m);
    log.noise_stddev = GaussianMechanismStddev(sensitivity, rho);
    return GaussianMechanism(mean, sensitivity, rho, noise);
  };

  double u = 0.5;
  double tau = 3.0 / 16.0;
  int round = 1;
  while (u * static_cast<double>(active.size()) >= 1.0) {
    PpdeRound log;
    log.round = round;
    log.u = u;
    log.tau = tau;
    log.active = static_cast<int64_t>(active.size());
    log.b = std::sqrt(6.0 * u * static_cast<double>(active.size()) *
                      std::log(md * log_factor / beta));
    ASSIGN_OR_RETURN(Eigen::VectorXd q_r, noisy_block_mean(round, log.b, log));
    std::vector<Eigen::Index> next;
    for (size_t k = 0; k < active.size(); ++k) {
      if (q_r[k] < tau) {
        next.push_back(active[k]);
      } else {
        out.q[active[k]] = q_r[k];
      }
    }
    log.frozen = log.active - static_cast<int64_t>(next.size());
    out.rounds.push_back(log);
    active = std::move(next);
    u /= 2;
    tau /= 2;
    ++round;
  }
  if (!active.empty()) {
    PpdeRound log;
    log.round = round;
    log.final_round = true;
    log.u = u;
    log.tau = tau;
    log.active = static_cast<int64_t>(active.size());
    log.b = std::sqrt(6.0 * std::log(md / beta));
    ASSIGN_OR_RETURN(Eigen::VectorXd q_r, noisy_block_mean(round, log.b, log));
    for (size_t k = 0; k < active.size(); ++k) out.q[active[k]] = q_r[k];
    log.frozen = log.active;
    out.rounds.push_back(log);
  }
  out.q = out.q.cwiseMax(0.0).cwiseMin(1.0);
  ASSIGN_OR_RETURN(PrivacyBudget charge, PrivacyBudget::Zcdp(rho));
  out.ledger.Record("ppde (disjoint blocks)", charge);
  out.budget_spent = charge;
  return out;
}

absl::StatusOr<FlipHeavyResult> PpdeFlipHeavy(const Eigen::MatrixXd& x,
                                              double rho, double alpha,
                                              double beta, NoiseSource& noise,
                                              const PpdeOptions& options) {
  if (!(rho > 0)) return InvalidParameterError("rho must be > 0");
  if (x.rows() == 0) return EmptyInputError("no samples");
  const int64_t d = x.cols();
  const double n = static_cast<double>(x.rows());
  const double vote_rho = rho / 10;
  const Eigen::VectorXd means = x.colwise().mean().transpose();
  ASSIGN_OR_RETURN(Eigen::VectorXd noisy,
                   GaussianMechanism(means, std::sqrt(static_cast<double>(d)) / n,
                                     vote_rho, noise));
  FlipHeavyResult out;
  out.flipped.assign(d, false);
  Eigen::MatrixXd y = x;
  for (int64_t j = 0; j < d; ++j) {
    if (noisy[j] > 0.5) {
      out.flipped[j] = true;
      y.col(j) = (1.0 - y.col(j).array()).matrix();
    }
  }
  ASSIGN_OR_RETURN(out.inner,
                   Ppde(y, rho - vote_rho, alpha, beta, noise, options));
  out.q = out.inner.q;
  for (int64_t j = 0; j < d; ++j) {
    if (out.flipped[j]) out.q[j] = 1.0 - out.q[j];
  }
  ASSIGN_OR_RETURN(PrivacyBudget vote, PrivacyBudget::Zcdp(vote_rho));
  out.ledger.Record("flip vote", vote);
  out.ledger.Append(out.inner.ledger, "");
  ASSIGN_OR_RETURN(double spent, out.ledger.TotalRho());
  ASSIGN_OR_RETURN(out.budget_spent, PrivacyBudget::Zcdp(spent));
  return out;
}

}  // namespace dplearn
