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

#include "dplearn/harness.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/QR>

#include "absl/strings/str_cat.h"
#include "dplearn/attacks.h"
#include "dplearn/covariance.h"
#include "dplearn/covariance_unbounded.h"
#include "dplearn/linalg.h"
#include "dplearn/mean.h"
#include "dplearn/metrics.h"
#include "dplearn/noise.h"
#include "dplearn/product.h"
#include "dplearn/sampling.h"
#include "dplearn/status_macros.h"
#include "json.hpp"

namespace dplearn {
namespace {

using nlohmann::json;

constexpr std::pair<Task, absl::string_view> kTaskNames[] = {
    {Task::kGaussianCov, "gaussian-cov"},
    {Task::kGaussianCovUnbounded, "gaussian-cov-unbounded"},
    {Task::kGaussianMean, "gaussian-mean"},
    {Task::kGaussianFull, "gaussian-full"},
    {Task::kProduct, "product"},
    {Task::kAttack, "attack"},
};

// Monte Carlo draws used for the Gaussian TV metric.
constexpr int64_t kTvTrials = 20000;

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string CsvQuote(absl::string_view field) {
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

json BudgetJson(const PrivacyBudget& b) {
  json j;
  switch (b.regime()) {
    case PrivacyRegime::kZcdp:
      j["regime"] = "zCDP";
      j["rho"] = b.rho();
      break;
    case PrivacyRegime::kPureDp:
      j["regime"] = "pure-DP";
      j["epsilon"] = b.epsilon();
      break;
    case PrivacyRegime::kApproxDp:
      j["regime"] = "approx-DP";
      j["epsilon"] = b.epsilon();
      j["delta"] = b.delta();
      break;
  }
  return j;
}

std::string ParamJson(const ExperimentConfig& c) {
  json j;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["kappa"] = c.kappa;
  j["R"] = c.R;
  if (c.rho.has_value()) j["rho"] = *c.rho;
  if (c.epsilon.has_value()) j["epsilon"] = *c.epsilon;
  if (c.delta.has_value()) j["delta"] = *c.delta;
  if (c.zero_noise) j["zero_noise"] = true;
  if (c.block_size.has_value()) j["block_size"] = *c.block_size;
  if (c.task == Task::kAttack) j["mechanism"] = c.mechanism;
  return j.dump();
}

Eigen::MatrixXd RandomOrthogonal(int64_t d, NoiseSource& noise) {
  Eigen::MatrixXd g(d, d);
  for (int64_t i = 0; i < d; ++i) {
    for (int64_t j = 0; j < d; ++j) g(i, j) = noise.Gaussian();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int64_t j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1;
  }
  return q;
}

GaussianParams BuildGaussian(const ExperimentConfig& c, bool zero_mean,
                             NoiseSource& noise) {
  GaussianParams g;
  const int64_t d = c.d;
  Eigen::VectorXd spectrum = Eigen::VectorXd::Ones(d);
  for (int64_t j = 0; j < d && j < static_cast<int64_t>(c.spectrum.size());
       ++j) {
    spectrum[j] = c.spectrum[j];
  }
  g.cov = spectrum.asDiagonal();
  if (c.rotate) {
    const Eigen::MatrixXd q = RandomOrthogonal(d, noise);
    g.cov = Symmetrize(q * g.cov * q.transpose());
  }
  g.mean = Eigen::VectorXd::Zero(d);
  if (!zero_mean) {
    if (!c.mean.empty()) {
      for (int64_t j = 0; j < d; ++j) g.mean[j] = c.mean[j];
    } else if (c.mean_norm > 0) {
      for (int64_t j = 0; j < d; ++j) g.mean[j] = noise.Gaussian();
      g.mean *= c.mean_norm / g.mean.norm();
    }
  }
  g.R = c.R;
  g.kappa = c.kappa;
  return g;
}

void AddMatrixMetrics(const std::string& name, const Eigen::MatrixXd& m,
                      TrialResult& r) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      r.metrics.emplace_back(absl::StrCat(name, "[", i, "][", j, "]"), m(i, j));
    }
  }
}

void AddVectorMetrics(const std::string& name, const Eigen::VectorXd& v,
                      TrialResult& r) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    r.metrics.emplace_back(absl::StrCat(name, "[", i, "]"), v[i]);
  }
}

absl::Status RunTrialBody(const ExperimentConfig& c,
                          const Eigen::MatrixXd* loaded, NoiseSource& data,
                          NoiseSource& mech, NoiseSource& metric,
                          TrialResult& r, Eigen::MatrixXd* samples_out) {
  const bool synthetic = loaded == nullptr;
  const int64_t n = synthetic ? c.n : loaded->rows();
  const double rho = c.rho.value_or(0);
  auto set_spent = [&](const PrivacyBudget& spent, const BudgetLedger& l) {
    r.spent = spent;
    r.ledger = l.DebugString();
  };

  switch (c.task) {
    case Task::kGaussianCov:
    case Task::kGaussianCovUnbounded:
    case Task::kGaussianMean:
    case Task::kGaussianFull: {
      const bool zero_mean = c.task == Task::kGaussianCov ||
                             c.task == Task::kGaussianCovUnbounded;
      GaussianParams truth = BuildGaussian(c, zero_mean, data);
      Eigen::MatrixXd x;
      if (synthetic) {
        ASSIGN_OR_RETURN(x, SampleGaussian(truth, n, data));
      } else {
        x = *loaded;
      }
      if (samples_out != nullptr) *samples_out = x;

      if (c.task == Task::kGaussianCov) {
        ASSIGN_OR_RETURN(r.declared, PrivacyBudget::Zcdp(rho));
        ASSIGN_OR_RETURN(CovEstimate est, Pgce(x, rho, c.beta, c.kappa, mech));
        set_spent(est.budget_spent, est.ledger);
        const Preconditioner& pre = est.preconditioner;
        r.metrics.emplace_back("ppc_rounds", pre.round_log.size());
        r.metrics.emplace_back("certified_kappa", pre.certified_kappa);
        r.metrics.emplace_back("kept_rows", est.final_diagnostics.kept);
        if (synthetic) {
          ASSIGN_OR_RETURN(double err, MahalanobisMatrixNorm(
                                           truth.cov - est.sigma_hat, truth.cov));
          r.metrics.emplace_back("cov_error", err);
          const Eigen::MatrixXd conj = pre.a * truth.cov * pre.a.transpose();
          ASSIGN_OR_RETURN(auto eig, Eigendecompose(conj));
          r.metrics.emplace_back("precond_min_eig", eig.values.minCoeff());
          r.metrics.emplace_back("precond_max_eig", eig.values.maxCoeff());
        } else {
          AddMatrixMetrics("sigma_hat", est.sigma_hat, r);
        }
      } else if (c.task == Task::kGaussianCovUnbounded) {
        ASSIGN_OR_RETURN(r.declared,
                         PgceNoBoundBudget(*c.epsilon, *c.delta, x.cols()));
        absl::StatusOr<UnboundedCovEstimate> est =
            PgceNoBound(x, *c.epsilon, *c.delta, c.beta, mech);
        if (!est.ok()) {
          r.metrics.emplace_back("estimation_failed", 1);
          return est.status();
        }
        r.metrics.emplace_back("estimation_failed", 0);
        set_spent(est->budget_spent, est->ledger);
        r.metrics.emplace_back("range_rounds", est->range.round_log.size());
        if (synthetic) {
          ASSIGN_OR_RETURN(double err, MahalanobisMatrixNorm(
                                           truth.cov - est->sigma_hat,
                                           truth.cov));
          r.metrics.emplace_back("cov_error", err);
        } else {
          AddMatrixMetrics("sigma_hat", est->sigma_hat, r);
        }
      } else if (c.task == Task::kGaussianMean) {
        ASSIGN_OR_RETURN(r.declared, PrivacyBudget::Zcdp(2 * rho));
        ASSIGN_OR_RETURN(MeanEstimate est,
                         Pme(x, rho, c.alpha, c.beta, c.R, c.kappa, mech));
        set_spent(est.budget_spent, est.ledger);
        r.metrics.emplace_back("aborted", est.aborted ? 1 : 0);
        r.metrics.emplace_back("ignored_rows", est.ignored_rows);
        if (est.mu_hat.has_value()) {
          if (synthetic) {
            ASSIGN_OR_RETURN(double err,
                             MahalanobisNorm(truth.mean - *est.mu_hat,
                                             truth.cov));
            r.metrics.emplace_back("mean_error", err);
            ASSIGN_OR_RETURN(double tv, TvGaussianSameCov(truth.mean,
                                                          *est.mu_hat,
                                                          truth.cov));
            r.metrics.emplace_back("tv", tv);
          } else {
            AddVectorMetrics("mu_hat", *est.mu_hat, r);
          }
        }
      } else {
        ASSIGN_OR_RETURN(r.declared, PrivacyBudget::Zcdp(rho));
        ASSIGN_OR_RETURN(GaussianEstimate est,
                         LearnGaussian(x, rho, c.alpha, c.beta, c.R, c.kappa,
                                       mech));
        set_spent(est.budget_spent, est.ledger);
        r.metrics.emplace_back("aborted", est.mean.aborted ? 1 : 0);
        if (synthetic && est.mean.mu_hat.has_value()) {
          GaussianParams fit;
          fit.mean = *est.mean.mu_hat;
          fit.cov = est.cov.sigma_hat;
          ASSIGN_OR_RETURN(GaussianParamErrors errs,
                           GaussianParamError(truth, fit));
          r.metrics.emplace_back("mean_error", errs.mean_error);
          r.metrics.emplace_back("cov_error", errs.cov_error);
          absl::StatusOr<McEstimate> tv =
              TvGaussianMc(truth, fit, kTvTrials, metric);
          if (tv.ok()) {
            r.metrics.emplace_back("tv_mc", tv->estimate);
            r.metrics.emplace_back("tv_mc_std_error", tv->std_error);
          }
        } else if (est.mean.mu_hat.has_value()) {
          AddVectorMetrics("mu_hat", *est.mean.mu_hat, r);
          AddMatrixMetrics("sigma_hat", est.cov.sigma_hat, r);
        }
      }
      return absl::OkStatus();
    }
    case Task::kProduct: {
      Eigen::VectorXd p = MixedBiasProduct(c.d);
      if (!c.p.empty()) {
        p = Eigen::Map<const Eigen::VectorXd>(c.p.data(), c.p.size());
      }
      Eigen::MatrixXd x;
      if (synthetic) {
        ASSIGN_OR_RETURN(x, SampleBernoulliProduct(p, n, data));
      } else {
        x = *loaded;
      }
      if (samples_out != nullptr) *samples_out = x;
      ASSIGN_OR_RETURN(r.declared, PrivacyBudget::Zcdp(rho));
      PpdeOptions options;
      options.block_size = c.block_size;
      Eigen::VectorXd q;
      if (c.flip_heavy) {
        ASSIGN_OR_RETURN(FlipHeavyResult fit,
                         PpdeFlipHeavy(x, rho, c.alpha, c.beta, mech, options));
        set_spent(fit.budget_spent, fit.ledger);
        q = fit.q;
        r.metrics.emplace_back("ppde_rounds", fit.inner.rounds.size());
      } else {
        ASSIGN_OR_RETURN(PpdeResult fit,
                         Ppde(x, rho, c.alpha, c.beta, mech, options));
        set_spent(fit.budget_spent, fit.ledger);
        q = fit.q;
        r.metrics.emplace_back("ppde_rounds", fit.rounds.size());
      }
      if (synthetic) {
        r.metrics.emplace_back("sd_upper", ProductSdUpper(p, q));
        if (c.d <= kMaxExactProductDim) {
          ASSIGN_OR_RETURN(double tv, TvProductExact(p, q));
          r.metrics.emplace_back("tv", tv);
        } else {
          ASSIGN_OR_RETURN(McEstimate tv, TvProductMc(p, q, kTvTrials, metric));
          r.metrics.emplace_back("tv_mc", tv.estimate);
          r.metrics.emplace_back("tv_mc_std_error", tv.std_error);
        }
      } else {
        AddVectorMetrics("q", q, r);
      }
      return absl::OkStatus();
    }
    case Task::kAttack: {
      if (!synthetic) {
        return InvalidParameterError("the attack task needs a synthetic model");
      }
      MeanMechanism mechanism;
      if (c.mechanism == "ppde") {
        PpdeOptions options;
        options.block_size = c.block_size;
        mechanism = PpdeMechanism(rho, c.alpha, c.beta, options);
        ASSIGN_OR_RETURN(r.declared, PrivacyBudget::Zcdp(rho));
        r.spent = r.declared;
        r.ledger = "ppde (disjoint blocks, with flip vote)";
      } else if (c.mechanism == "empirical") {
        mechanism = EmpiricalMeanMechanism();
        r.ledger = "non-private";
      } else if (c.mechanism == "oracle") {
        mechanism = PopulationMeanOracle();
        r.ledger = "non-private";
      } else {
        return InvalidParameterError(
            absl::StrCat("unknown mechanism '", c.mechanism, "'"));
      }
      if (c.zero_noise) {
        mechanism = [inner = std::move(mechanism)](
                        const Eigen::MatrixXd& x, const Eigen::VectorXd& mean,
                        NoiseSource&) {
          NoiseSource none = NoiseSource::ZeroNoise();
          return inner(x, mean, none);
        };
      }
      TracingAttackConfig ac;
      ac.d = c.d;
      ac.n = n;
      ac.trials = 1;
      ac.non_members_per_trial = c.non_members;
      ac.prior = c.prior;
      ASSIGN_OR_RETURN(FingerprintReport rep,
                       RunTracingAttack(mechanism, ac, data));
      if (rep.failed_trials > 0) {
        return EstimationFailedError("mechanism failed");
      }
      r.metrics.emplace_back("in_score", rep.in_mean);
      r.metrics.emplace_back("out_score", rep.out_mean);
      r.metrics.emplace_back("separation", rep.separation);
      r.metrics.emplace_back("fp_lemma", rep.fp_lemma_lhs);
      return absl::OkStatus();
    }
  }
  return InvalidParameterError("unknown task");
}

TrialResult RunTrial(const ExperimentConfig& c, const Eigen::MatrixXd* loaded,
                     uint64_t seed, int64_t trial,
                     Eigen::MatrixXd* samples_out) {
  TrialResult r;
  r.seed = seed;
  r.trial = trial;
  r.n = loaded != nullptr ? loaded->rows() : c.n;
  NoiseSource root = NoiseSource::Seeded(seed);
  NoiseSource trial_root = root.Split(static_cast<uint64_t>(trial));
  NoiseSource data = trial_root.Split(0);
  NoiseSource mech =
      c.zero_noise ? NoiseSource::ZeroNoise() : trial_root.Split(1);
  NoiseSource metric = trial_root.Split(2);
  const auto start = std::chrono::steady_clock::now();
  absl::Status status =
      RunTrialBody(c, loaded, data, mech, metric, r, samples_out);
  r.runtime_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  if (!status.ok()) r.error = std::string(status.message());
  return r;
}

}  // namespace

absl::string_view TaskName(Task task) {
  for (const auto& [t, name] : kTaskNames) {
    if (t == task) return name;
  }
  return "unknown";
}

absl::StatusOr<Task> ParseTask(absl::string_view name) {
  for (const auto& [t, task_name] : kTaskNames) {
    if (task_name == name) return t;
  }
  return InvalidParameterError(absl::StrCat("unknown task '", name, "'"));
}

absl::StatusOr<ExperimentConfig> ParseConfigJson(absl::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return InvalidInputError("config is not a JSON object");
  }
  ExperimentConfig c;
  try {
    for (auto& [key, value] : j.items()) {
      if (key == "task") {
        ASSIGN_OR_RETURN(c.task, ParseTask(value.get<std::string>()));
      } else if (key == "n") {
        c.n = value.get<int64_t>();
      } else if (key == "d") {
        c.d = value.get<int64_t>();
      } else if (key == "kappa") {
        c.kappa = value.get<double>();
      } else if (key == "R") {
        c.R = value.get<double>();
      } else if (key == "alpha") {
        c.alpha = value.get<double>();
      } else if (key == "beta") {
        c.beta = value.get<double>();
      } else if (key == "rho") {
        c.rho = value.get<double>();
      } else if (key == "epsilon" || key == "eps") {
        c.epsilon = value.get<double>();
      } else if (key == "delta") {
        c.delta = value.get<double>();
      } else if (key == "seeds") {
        c.seeds = value.get<std::vector<uint64_t>>();
      } else if (key == "trials") {
        c.trials = value.get<int64_t>();
      } else if (key == "output_dir") {
        c.output_dir = value.get<std::string>();
      } else if (key == "zero_noise") {
        c.zero_noise = value.get<bool>();
      } else if (key == "data_path") {
        c.data_path = value.get<std::string>();
      } else if (key == "data_has_header") {
        c.data_has_header = value.get<bool>();
      } else if (key == "echo_samples") {
        c.echo_samples = value.get<bool>();
      } else if (key == "spectrum") {
        c.spectrum = value.get<std::vector<double>>();
      } else if (key == "rotate") {
        c.rotate = value.get<bool>();
      } else if (key == "mean") {
        c.mean = value.get<std::vector<double>>();
      } else if (key == "mean_norm") {
        c.mean_norm = value.get<double>();
      } else if (key == "p") {
        c.p = value.get<std::vector<double>>();
      } else if (key == "block_size") {
        c.block_size = value.get<int64_t>();
      } else if (key == "flip_heavy") {
        c.flip_heavy = value.get<bool>();
      } else if (key == "mechanism") {
        c.mechanism = value.get<std::string>();
      } else if (key == "non_members") {
        c.non_members = value.get<int64_t>();
      } else if (key == "prior") {
        c.prior = value.get<double>();
      } else if (key == "sweep_n") {
        c.sweep_n = value.get<std::vector<int64_t>>();
      } else if (key == "workers") {
        c.workers = value.get<int>();
      } else {
        return InvalidInputError(absl::StrCat("unknown config key '", key, "'"));
      }
    }
  } catch (const json::exception& e) {
    return InvalidInputError(absl::StrCat("bad config value: ", e.what()));
  }
  return c;
}

absl::Status ValidateConfig(const ExperimentConfig& c) {
  const bool has_rho = c.rho.has_value();
  const bool has_eps = c.epsilon.has_value() || c.delta.has_value();
  if (has_rho == has_eps) {
    return InvalidParameterError("set exactly one of rho or (eps, delta)");
  }
  if (has_eps && !(c.epsilon.has_value() && c.delta.has_value())) {
    return InvalidParameterError("eps and delta must be set together");
  }
  if (c.task == Task::kGaussianCovUnbounded && !has_eps) {
    return InvalidParameterError(
        "gaussian-cov-unbounded takes (eps, delta), not rho");
  }
  if (c.task != Task::kGaussianCovUnbounded && !has_rho) {
    return InvalidParameterError(
        absl::StrCat(TaskName(c.task), " takes rho, not (eps, delta)"));
  }
  if (c.trials < 1) return InvalidParameterError("trials must be >= 1");
  if (c.seeds.empty()) return InvalidParameterError("no seeds");
  if (c.data_path.empty()) {
    if (c.d < 1) return InvalidParameterError("d must be >= 1");
    if (c.n < 1 && c.sweep_n.empty()) {
      return InvalidParameterError("n must be >= 1");
    }
    if (static_cast<int64_t>(c.spectrum.size()) > c.d ||
        (!c.mean.empty() && static_cast<int64_t>(c.mean.size()) != c.d) ||
        (!c.p.empty() && static_cast<int64_t>(c.p.size()) != c.d)) {
      return InvalidParameterError("model vectors must have length d");
    }
  }
  return absl::OkStatus();
}

Eigen::VectorXd MixedBiasProduct(int64_t d) {
  Eigen::VectorXd p(d);
  const int64_t third = d / 3;
  for (int64_t j = 0; j < d; ++j) {
    if (j < third) {
      p[j] = 0.4;
    } else if (j < 2 * third) {
      p[j] = 0.05;
    } else {
      p[j] = 1.0 / static_cast<double>(d);
    }
  }
  return p;
}

absl::StatusOr<TrialReport> RunExperiment(const ExperimentConfig& config) {
  RETURN_IF_ERROR(ValidateConfig(config));
  ExperimentConfig c = config;
  std::optional<Eigen::MatrixXd> loaded;
  if (!c.data_path.empty()) {
    std::ifstream in(c.data_path);
    if (!in) return InvalidInputError(absl::StrCat("cannot open ", c.data_path));
    ASSIGN_OR_RETURN(loaded, ReadCsv(in, c.data_has_header));
    c.d = loaded->cols();
    c.n = loaded->rows();
  }
  std::vector<std::pair<uint64_t, int64_t>> jobs;
  for (uint64_t seed : c.seeds) {
    for (int64_t t = 0; t < c.trials; ++t) jobs.emplace_back(seed, t);
  }
  TrialReport report;
  report.config = c;
  report.trials.resize(jobs.size());
  Eigen::MatrixXd echoed;

  int workers = c.workers > 0
                    ? c.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(jobs.size()));
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t k = next++; k < jobs.size(); k = next++) {
      Eigen::MatrixXd* samples =
          (k == 0 && c.echo_samples) ? &echoed : nullptr;
      report.trials[k] = RunTrial(c, loaded ? &*loaded : nullptr,
                                  jobs[k].first, jobs[k].second, samples);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();

  if (c.echo_samples) report.echoed_samples = std::move(echoed);
  std::stable_sort(report.trials.begin(), report.trials.end(),
                   [](const TrialResult& a, const TrialResult& b) {
                     return std::tie(a.n, a.seed, a.trial) <
                            std::tie(b.n, b.seed, b.trial);
                   });
  return report;
}

absl::StatusOr<TrialReport> RunSweep(const ExperimentConfig& config) {
  if (config.sweep_n.empty()) {
    return InvalidParameterError("sweep needs sweep_n");
  }
  TrialReport merged;
  merged.config = config;
  for (int64_t n : config.sweep_n) {
    ExperimentConfig c = config;
    c.n = n;
    c.echo_samples = false;
    ASSIGN_OR_RETURN(TrialReport part, RunExperiment(c));
    for (TrialResult& t : part.trials) merged.trials.push_back(std::move(t));
  }
  return merged;
}

std::string ReportCsv(const TrialReport& report) {
  const ExperimentConfig& c = report.config;
  const std::string params = CsvQuote(ParamJson(c));
  std::string out = "task,seed,trial,n,d,param_json,metric_name,metric_value\n";
  for (const TrialResult& t : report.trials) {
    const std::string prefix = absl::StrCat(TaskName(c.task), ",", t.seed, ",",
                                            t.trial, ",", t.n, ",", c.d, ",",
                                            params, ",");
    for (const auto& [name, value] : t.metrics) {
      absl::StrAppend(&out, prefix, name, ",", FormatDouble(value), "\n");
    }
    absl::StrAppend(&out, prefix, "ok,", t.error.empty() ? "1" : "0", "\n");
  }
  return out;
}

std::optional<double> MedianMetric(const TrialReport& report,
                                   absl::string_view metric,
                                   std::optional<int64_t> n) {
  std::vector<double> values;
  for (const TrialResult& t : report.trials) {
    if (n.has_value() && t.n != *n) continue;
    for (const auto& [name, value] : t.metrics) {
      if (name == metric) values.push_back(value);
    }
  }
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid]
                                : (values[mid - 1] + values[mid]) / 2;
}

std::string ReportJson(const TrialReport& report) {
  const ExperimentConfig& c = report.config;
  json j;
  j["task"] = std::string(TaskName(c.task));
  j["params"] = json::parse(ParamJson(c));
  j["d"] = c.d;
  j["seeds"] = c.seeds;
  j["trials_per_seed"] = c.trials;
  json trials = json::array();
  std::map<int64_t, std::map<std::string, bool>> metric_names;
  for (const TrialResult& t : report.trials) {
    json row;
    row["seed"] = t.seed;
    row["trial"] = t.trial;
    row["n"] = t.n;
    row["runtime_ms"] = t.runtime_ms;
    json metrics = json::object();
    for (const auto& [name, value] : t.metrics) {
      metrics[name] = value;
      metric_names[t.n][name] = true;
    }
    row["metrics"] = metrics;
    row["declared_budget"] = BudgetJson(t.declared);
    row["spent_budget"] = BudgetJson(t.spent);
    row["ledger"] = t.ledger;
    if (!t.error.empty()) row["error"] = t.error;
    trials.push_back(row);
  }
  j["trials"] = trials;
  json summary = json::array();
  for (const auto& [n, names] : metric_names) {
    json entry;
    entry["n"] = n;
    for (const auto& [name, unused] : names) {
      entry["median"][name] = *MedianMetric(report, name, n);
    }
    summary.push_back(entry);
  }
  j["summary"] = summary;
  const BudgetCheck check = BudgetLedgerCheck(report);
  j["budget_check"] = {{"pass", check.pass}, {"breakdown", check.breakdown}};
  return j.dump(2);
}

absl::Status WriteReport(const TrialReport& report) {
  const std::filesystem::path dir(
      report.config.output_dir.empty() ? "." : report.config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return InvalidInputError(
        absl::StrCat("cannot create ", dir.string(), ": ", ec.message()));
  }
  auto write = [&](const std::string& name,
                   const std::string& body) -> absl::Status {
    std::ofstream out(dir / name, std::ios::binary);
    out << body;
    if (!out) return InvalidInputError(absl::StrCat("cannot write ", name));
    return absl::OkStatus();
  };
  RETURN_IF_ERROR(write("report.csv", ReportCsv(report)));
  RETURN_IF_ERROR(write("report.json", ReportJson(report)));
  if (report.echoed_samples.has_value()) {
    std::ostringstream samples;
    WriteCsv(*report.echoed_samples, samples);
    RETURN_IF_ERROR(write("samples.csv", samples.str()));
  }
  return absl::OkStatus();
}

BudgetCheck BudgetLedgerCheck(const TrialReport& report) {
  BudgetCheck check;
  constexpr double kTol = 1e-9;
  for (const TrialResult& t : report.trials) {
    if (!t.error.empty()) continue;
    const PrivacyBudget& a = t.declared;
    const PrivacyBudget& b = t.spent;
    const bool ok = a.regime() == b.regime() &&
                    std::abs(a.rho() - b.rho()) <= kTol &&
                    std::abs(a.epsilon() - b.epsilon()) <= kTol &&
                    std::abs(a.delta() - b.delta()) <= kTol;
    if (!ok) {
      check.pass = false;
      absl::StrAppend(&check.breakdown, "seed ", t.seed, " trial ", t.trial,
                      " n ", t.n, ": declared ", a.DebugString(), ", spent ",
                      b.DebugString(), "\n", t.ledger);
    }
  }
  return check;
}

}  // namespace dplearn
