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

#include "dplearn/histogram.h"

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "absl/strings/str_cat.h"
#include "dplearn/privacy.h"
#include "dplearn/status_macros.h"

namespace dplearn {

std::string BucketKey::DebugString() const {
  return bottom_ ? "bottom" : absl::StrCat(index_);
}

double StableHistogramNoiseScale(int64_t n, double epsilon) {
  return 2.0 / (epsilon * static_cast<double>(n));
}

double StableHistogramThreshold(int64_t n, double epsilon, double delta) {
  const double nd = static_cast<double>(n);
  return 1.0 / nd + 2.0 * std::log(2.0 / delta) / (epsilon * nd);
}

double StableHistogramAccuracy(int64_t n, double epsilon, double delta,
                               double beta) {
  const double nd = static_cast<double>(n);
  return 4.0 * std::log(2.0 * nd / (delta * beta)) / (epsilon * nd);
}

absl::StatusOr<HistogramResult> StableHistogram(
    absl::Span<const BucketKey> data, double epsilon, double delta,
    double beta, NoiseSource& noise) {
  const int64_t n = static_cast<int64_t>(data.size());
  if (n == 0) return EmptyInputError("histogram of no samples");
  if (!(epsilon > 0)) return InvalidParameterError("epsilon must be > 0");
  if (!(delta > 0 && delta * static_cast<double>(n) < 1)) {
    return InvalidParameterError(
        absl::StrCat("delta must lie in (0, 1/n) = (0, ", 1.0 / n, "), got ",
                     delta));
  }
  if (!(beta > 0 && beta < 1)) {
    return InvalidParameterError("beta must lie in (0, 1)");
  }
  std::map<BucketKey, int64_t> counts;
  for (const BucketKey& k : data) ++counts[k];

  HistogramResult out;
  out.n = n;
  out.accuracy_bound = StableHistogramAccuracy(n, epsilon, delta, beta);
  const double nd = static_cast<double>(n);
  if (noise.is_zero_noise()) {
    for (const auto& [key, count] : counts) {
      out.entries[key] = static_cast<double>(count) / nd;
    }
    return out;
  }
  const double scale = StableHistogramNoiseScale(n, epsilon);
  const double threshold = StableHistogramThreshold(n, epsilon, delta);
  // Map order keeps the draw sequence a function of the data alone.
  for (const auto& [key, count] : counts) {
    const double f = static_cast<double>(count) / nd + noise.Laplace(scale);
    if (f >= threshold) out.entries[key] = f;
  }
  return out;
}

double GaussianHistogramAccuracy(int64_t n, int64_t universe_size, double rho,
                                 double beta) {
  return std::sqrt(2.0 * std::log(2.0 * universe_size / beta) / rho) /
         static_cast<double>(n) * std::sqrt(2.0);
}

absl::StatusOr<HistogramResult> GaussianHistogram(
    absl::Span<const BucketKey> data, absl::Span<const BucketKey> universe,
    double rho, double beta, NoiseSource& noise) {
  const int64_t n = static_cast<int64_t>(data.size());
  if (n == 0) return EmptyInputError("histogram of no samples");
  if (universe.empty()) return InvalidParameterError("empty universe");
  if (!(beta > 0 && beta < 1)) {
    return InvalidParameterError("beta must lie in (0, 1)");
  }
  std::map<BucketKey, Eigen::Index> slot;
  for (const BucketKey& k : universe) {
    if (!slot.emplace(k, static_cast<Eigen::Index>(slot.size())).second) {
      return InvalidParameterError(
          absl::StrCat("duplicate universe key ", k.DebugString()));
    }
  }
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(universe.size());
  const double nd = static_cast<double>(n);
  for (const BucketKey& k : data) {
    auto it = slot.find(k);
    if (it == slot.end()) {
      return InvalidInputError(
          absl::StrCat("key ", k.DebugString(), " is outside the universe"));
    }
    freq[it->second] += 1.0 / nd;
  }
  ASSIGN_OR_RETURN(Eigen::VectorXd noisy,
                   GaussianMechanism(freq, std::sqrt(2.0) / nd, rho, noise));
  HistogramResult out;
  out.n = n;
  out.accuracy_bound = GaussianHistogramAccuracy(
      n, static_cast<int64_t>(universe.size()), rho, beta);
  for (const auto& [key, i] : slot) out.entries[key] = noisy[i];
  return out;
}

std::optional<BucketKey> ArgmaxBucket(const HistogramResult& h,
                                      double threshold) {
  std::optional<BucketKey> best;
  double best_value = 0;
  // Ascending key order, so strict > keeps the smaller index on ties.
  for (const auto& [key, value] : h.entries) {
    if (key.is_bottom()) continue;
    if (!best.has_value() || value > best_value) {
      best = key;
      best_value = value;
    }
  }
  if (!best.has_value() || !(best_value >= threshold)) return std::nullopt;
  return best;
}

}  // namespace dplearn
