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

// Command-line driver for the experiment harness.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dplearn/harness.h"

namespace {

struct Overrides {
  std::string config_path;
  std::vector<uint64_t> seeds;
  std::optional<int64_t> trials;
  std::optional<double> rho;
  std::optional<double> eps;
  std::optional<double> delta;
  std::string out;
  bool zero_noise = false;
  bool i_understand = false;
  std::optional<int64_t> n;
  std::optional<int64_t> d;
  std::optional<double> kappa;
  std::optional<double> R;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::string data;
  bool data_header = false;
  bool echo_samples = false;
  std::optional<int64_t> block_size;
  bool flip_heavy = false;
  std::string mechanism;
  std::optional<int> workers;
  std::vector<int64_t> n_values;
  std::string task;
};

void AddCommonFlags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON config file");
  app->add_option("--seed", o.seeds, "Seed (repeatable)");
  app->add_option("--trials", o.trials, "Trials per seed");
  auto* rho = app->add_option("--rho", o.rho, "zCDP budget");
  auto* eps = app->add_option("--eps", o.eps, "Approximate-DP epsilon");
  auto* delta = app->add_option("--delta", o.delta, "Approximate-DP delta");
  rho->excludes(eps)->excludes(delta);
  app->add_option("--out", o.out, "Output directory");
  app->add_flag("--zero-noise", o.zero_noise,
                "Disable all noise (debugging only, no privacy)");
  app->add_flag("--i-understand-no-privacy", o.i_understand,
                "Required together with --zero-noise");
  app->add_option("--n", o.n, "Sample size");
  app->add_option("--d", o.d, "Dimension");
  app->add_option("--kappa", o.kappa, "Condition number bound");
  app->add_option("--R", o.R, "Mean range bound");
  app->add_option("--alpha", o.alpha, "Target accuracy");
  app->add_option("--beta", o.beta, "Failure probability");
  app->add_option("--data", o.data, "CSV of samples instead of synthetic data");
  app->add_flag("--data-header", o.data_header, "CSV has a header row");
  app->add_flag("--echo-samples", o.echo_samples,
                "Write the first trial's samples to samples.csv");
  app->add_option("--block-size", o.block_size, "Product estimator block size");
  app->add_flag("--flip-heavy", o.flip_heavy,
                "Flip coordinates with mean above 1/2 first");
  app->add_option("--mechanism", o.mechanism, "Attack target: ppde|empirical|oracle");
  app->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
}

void Apply(const Overrides& o, dplearn::ExperimentConfig& c) {
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.trials) c.trials = *o.trials;
  if (o.rho) {
    c.rho = o.rho;
    c.epsilon.reset();
    c.delta.reset();
  }
  if (o.eps || o.delta) {
    c.rho.reset();
    if (o.eps) c.epsilon = o.eps;
    if (o.delta) c.delta = o.delta;
  }
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.zero_noise) c.zero_noise = true;
  if (o.n) c.n = *o.n;
  if (o.d) c.d = *o.d;
  if (o.kappa) c.kappa = *o.kappa;
  if (o.R) c.R = *o.R;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.beta) c.beta = *o.beta;
  if (!o.data.empty()) c.data_path = o.data;
  if (o.data_header) c.data_has_header = true;
  if (o.echo_samples) c.echo_samples = true;
  if (o.block_size) c.block_size = o.block_size;
  if (o.flip_heavy) c.flip_heavy = true;
  if (!o.mechanism.empty()) c.mechanism = o.mechanism;
  if (o.workers) c.workers = *o.workers;
  if (!o.n_values.empty()) c.sweep_n = o.n_values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private distribution learning experiments"};
  app.require_subcommand(1);
  Overrides o;

  struct Sub {
    const char* name;
    const char* help;
    std::optional<dplearn::Task> task;
  };
  const Sub subs[] = {
      {"estimate-cov", "Preconditioned covariance estimation",
       dplearn::Task::kGaussianCov},
      {"estimate-cov-unbounded",
       "Covariance estimation without a condition number bound",
       dplearn::Task::kGaussianCovUnbounded},
      {"estimate-mean", "Preconditioned mean estimation",
       dplearn::Task::kGaussianMean},
      {"learn-gaussian", "Mean and covariance together",
       dplearn::Task::kGaussianFull},
      {"learn-product", "Product distribution learning",
       dplearn::Task::kProduct},
      {"attack", "Fingerprinting attack on a mean mechanism",
       dplearn::Task::kAttack},
      {"sweep", "Run a task over several sample sizes", std::nullopt},
  };
  std::vector<std::pair<CLI::App*, std::optional<dplearn::Task>>> commands;
  for (const Sub& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    AddCommonFlags(cmd, o);
    if (!s.task.has_value()) {
      cmd->add_option("--n-values", o.n_values, "Sample sizes")->delimiter(',');
      cmd->add_option("--task", o.task, "Task name, e.g. gaussian-cov");
    }
    commands.emplace_back(cmd, s.task);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; everything else is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (o.zero_noise && !o.i_understand) {
    std::cerr << "--zero-noise disables privacy; pass "
                 "--i-understand-no-privacy to confirm\n";
    return 2;
  }

  dplearn::ExperimentConfig config;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) {
      std::cerr << "cannot open " << o.config_path << "\n";
      return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    absl::StatusOr<dplearn::ExperimentConfig> parsed =
        dplearn::ParseConfigJson(buf.str());
    if (!parsed.ok()) {
      std::cerr << parsed.status() << "\n";
      return 2;
    }
    config = *std::move(parsed);
  }

  bool sweep = false;
  for (const auto& [cmd, task] : commands) {
    if (!cmd->parsed()) continue;
    if (task.has_value()) {
      config.task = *task;
    } else {
      sweep = true;
      if (!o.task.empty()) {
        absl::StatusOr<dplearn::Task> t = dplearn::ParseTask(o.task);
        if (!t.ok()) {
          std::cerr << t.status() << "\n";
          return 2;
        }
        config.task = *t;
      }
    }
  }
  Apply(o, config);
  if (config.zero_noise && !o.i_understand) {
    std::cerr << "config enables zero_noise; pass --i-understand-no-privacy\n";
    return 2;
  }
  if (config.zero_noise) {
    std::cerr << "WARNING: zero-noise mode, outputs are NOT private\n";
  }

  absl::StatusOr<dplearn::TrialReport> report =
      sweep ? dplearn::RunSweep(config) : dplearn::RunExperiment(config);
  if (!report.ok()) {
    std::cerr << report.status() << "\n";
    return 2;
  }
  if (absl::Status s = dplearn::WriteReport(*report); !s.ok()) {
    std::cerr << s << "\n";
    return 2;
  }

  size_t failed = 0;
  for (const dplearn::TrialResult& t : report->trials) {
    if (t.error.empty()) continue;
    if (failed++ == 0) {
      std::cerr << "seed " << t.seed << " trial " << t.trial << ": " << t.error
                << "\n";
    }
  }
  std::cout << report->trials.size() << " trials, " << failed << " failed\n";
  const dplearn::BudgetCheck check = dplearn::BudgetLedgerCheck(*report);
  if (!check.pass) {
    std::cerr << "budget check FAILED\n" << check.breakdown;
    return 1;
  }
  std::cout << "budget check passed\n";
  return failed == report->trials.size() ? 3 : 0;
}
