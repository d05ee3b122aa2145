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

#include "dplearn/covariance.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/LU>

#include "absl/strings/str_cat.h"
#include "dplearn/linalg.h"
#include "dplearn/status_macros.h"

namespace dplearn {
namespace {

absl::Status CheckCommon(const Eigen::MatrixXd& x, double rho, double beta,
                         double kappa) {
  if (x.rows() == 0) return EmptyInputError("no samples");
  if (x.cols() == 0) return InvalidInputError("zero-dimensional samples");
  if (!x.allFinite()) return InvalidInputError("non-finite samples");
  if (!(rho > 0)) return InvalidParameterError("rho must be > 0");
  if (!(beta > 0 && beta < 1)) {
    return InvalidParameterError("beta must lie in (0, 1)");
  }
  if (!(kappa >= 1) || !std::isfinite(kappa)) {
    return InvalidParameterError("kappa must be >= 1");
  }
  return absl::OkStatus();
}

}  // namespace

double NaivePceClampRadiusSq(int64_t n, int64_t d, double beta, double kappa) {
  return kappa * static_cast<double>(d) *
         (1.0 + 3.0 * std::log(2.0 * static_cast<double>(n) / beta));
}

absl::StatusOr<NaivePceResult> NaivePce(const Eigen::MatrixXd& x, double rho,
                                        double beta, double kappa,
                                        NoiseSource& noise) {
  NaivePceCache cache(x);
  return cache.Run(rho, beta, kappa, noise);
}

NaivePceCache::NaivePceCache(const Eigen::MatrixXd& x)
    : x_(x), norms_sq_(x.rowwise().squaredNorm()) {}

absl::StatusOr<NaivePceResult> NaivePceCache::Run(double rho, double beta,
                                                  double kappa,
                                                  NoiseSource& noise) {
  RETURN_IF_ERROR(CheckCommon(x_, rho, beta, kappa));
  const int64_t n = x_.rows();
  const Eigen::Index d = x_.cols();
  NaivePceResult out;
  NaivePceDiagnostics& diag = out.diagnostics;
  diag.n = n;
  diag.clamp_radius_sq = NaivePceClampRadiusSq(n, d, beta, kappa);
  diag.frobenius_sensitivity = 2.0 * diag.clamp_radius_sq / n;
  diag.noise_stddev = GaussianMechanismStddev(diag.frobenius_sensitivity, rho);
  diag.kept = (norms_sq_.array() <= diag.clamp_radius_sq).count();

  // The kept set is a sublevel set of the norms, so equal counts mean equal
  // sets.
  if (diag.kept != cached_kept_) {
    Eigen::MatrixXd kept(diag.kept, d);
    Eigen::Index row = 0;
    for (int64_t i = 0; i < n; ++i) {
      if (norms_sq_[i] <= diag.clamp_radius_sq) kept.row(row++) = x_.row(i);
    }
    Eigen::MatrixXd moment = Eigen::MatrixXd::Zero(d, d);
    moment.selfadjointView<Eigen::Lower>().rankUpdate(
        kept.transpose(), 1.0 / static_cast<double>(n));
    cached_moment_ = moment.selfadjointView<Eigen::Lower>();
    cached_kept_ = diag.kept;
  }

  ASSIGN_OR_RETURN(Eigen::MatrixXd noisy,
                   GaussianMechanismSymmetric(
                       cached_moment_, diag.frobenius_sensitivity, rho, noise));
  ASSIGN_OR_RETURN(out.sigma, ProjectPsd(noisy));
  return out;
}

Eigen::MatrixXd SubspaceScaling(const Eigen::MatrixXd& basis, double scale) {
  const Eigen::Index d = basis.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d);
  if (basis.cols() > 0) {
    a += (scale - 1.0) * basis * basis.transpose();
  }
  return Symmetrize(a);
}

absl::StatusOr<WeakPpcResult> WeakPpc(const Eigen::MatrixXd& x, double rho,
                                      double beta, double kappa, double k,
                                      NoiseSource& noise) {
  if (!(k >= 1)) return InvalidParameterError("K must be >= 1");
  ASSIGN_OR_RETURN(NaivePceResult z, NaivePce(x, rho, beta, kappa, noise));
  return WeakPpcFromEstimate(z, kappa, k);
}

absl::StatusOr<WeakPpcResult> WeakPpcFromEstimate(const NaivePceResult& z,
                                                  double kappa, double k) {
  if (!(k >= 1)) return InvalidParameterError("K must be >= 1");
  ASSIGN_OR_RETURN(auto eig, Eigendecompose(z.sigma));
  // Eigenvalues are descending, so V is a leading block. Ties at kappa/2
  // are included.
  Eigen::Index dim = 0;
  while (dim < eig.values.size() && eig.values[dim] >= kappa / 2) ++dim;
  WeakPpcResult out;
  out.basis = eig.vectors.leftCols(dim);
  out.a = SubspaceScaling(out.basis, 1.0 / std::sqrt(k));
  out.eigenvalues = eig.values;
  out.diagnostics = z.diagnostics;
  return out;
}

int PpcRoundCount(double kappa, const PpcOptions& options) {
  if (!(kappa > options.target_kappa)) return 0;
  return static_cast<int>(std::ceil(std::log(kappa / options.target_kappa) /
                                    std::log(1.0 / options.kappa_decay)));
}

Eigen::MatrixXd TransformRows(const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& a) {
  return x * a.transpose();
}

absl::StatusOr<Eigen::MatrixXd> Unprecondition(const Eigen::MatrixXd& s,
                                               const Eigen::MatrixXd& a) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    return SingularMatrixError("preconditioner is not invertible");
  }
  const Eigen::MatrixXd inv = lu.inverse();
  return Symmetrize(inv * s * inv.transpose());
}

absl::StatusOr<Preconditioner> Ppc(const Eigen::MatrixXd& x, double rho,
                                   double beta, double kappa,
                                   NoiseSource& noise,
                                   const PpcOptions& options) {
  RETURN_IF_ERROR(CheckCommon(x, rho, beta, kappa));
  if (!(options.shrink_k >= 1) || !(options.round_scale > 0) ||
      !(options.kappa_decay > 0 && options.kappa_decay < 1) ||
      !(options.target_kappa >= 1)) {
    return InvalidParameterError("bad preconditioner options");
  }
  const Eigen::Index d = x.cols();
  const int rounds = PpcRoundCount(kappa, options);
  Preconditioner out;
  out.a = Eigen::MatrixXd::Identity(d, d);
  out.shrink_k = options.shrink_k;
  out.certified_kappa = kappa;
  if (rounds == 0) return out;

  const double round_rho = rho / rounds;
  const double round_beta = beta / rounds;
  Eigen::MatrixXd current = x;
  double kappa_t = kappa;
  for (int t = 1; t <= rounds; ++t) {
    ASSIGN_OR_RETURN(WeakPpcResult step,
                     WeakPpc(current, round_rho, round_beta, kappa_t,
                             options.shrink_k, noise));
    const Eigen::MatrixXd a_t = options.round_scale * step.a;
    PpcRound log;
    log.round = t;
    log.kappa = kappa_t;
    log.threshold = kappa_t / 2;
    log.subspace_dim = step.basis.cols();
    log.rho = round_rho;
    log.beta = round_beta;
    log.diagnostics = step.diagnostics;
    out.round_log.push_back(log);
    out.round_bases.push_back(std::move(step.basis));
    ASSIGN_OR_RETURN(PrivacyBudget charge, PrivacyBudget::Zcdp(round_rho));
    out.ledger.Record(absl::StrCat("ppc round ", t), charge);

    out.a = a_t * out.a;
    current = TransformRows(current, a_t);
    kappa_t *= options.kappa_decay;
  }
  out.certified_kappa = kappa_t;
  return out;
}

absl::StatusOr<CovEstimate> Pgce(const Eigen::MatrixXd& x, double rho,
                                 double beta, double kappa, NoiseSource& noise,
                                 const PpcOptions& options) {
  RETURN_IF_ERROR(CheckCommon(x, rho, beta, kappa));
  CovEstimate out;
  const bool needs_ppc = PpcRoundCount(kappa, options) > 0;
  const double final_rho = needs_ppc ? rho / 2 : rho;
  const double final_beta = needs_ppc ? beta / 2 : beta;
  if (needs_ppc) {
    ASSIGN_OR_RETURN(out.preconditioner,
                     Ppc(x, rho / 2, beta / 2, kappa, noise, options));
  } else {
    out.preconditioner.a = Eigen::MatrixXd::Identity(x.cols(), x.cols());
    out.preconditioner.shrink_k = options.shrink_k;
    out.preconditioner.certified_kappa = kappa;
  }
  out.ledger.Append(out.preconditioner.ledger, "pgce/");

  const Eigen::MatrixXd& a = out.preconditioner.a;
  ASSIGN_OR_RETURN(
      NaivePceResult inner,
      NaivePce(needs_ppc ? TransformRows(x, a) : x, final_rho, final_beta,
               out.preconditioner.certified_kappa, noise));
  ASSIGN_OR_RETURN(PrivacyBudget final_charge, PrivacyBudget::Zcdp(final_rho));
  out.ledger.Record("pgce/final naive_pce", final_charge);
  out.final_diagnostics = inner.diagnostics;

  if (needs_ppc) {
    ASSIGN_OR_RETURN(out.sigma_hat, Unprecondition(inner.sigma, a));
  } else {
    out.sigma_hat = std::move(inner.sigma);
  }
  ASSIGN_OR_RETURN(double spent, out.ledger.TotalRho());
  ASSIGN_OR_RETURN(out.budget_spent, PrivacyBudget::Zcdp(spent));
  return out;
}

}  // namespace dplearn
