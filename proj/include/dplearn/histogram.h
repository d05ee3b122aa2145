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

#ifndef DPLEARN_HISTOGRAM_H_
#define DPLEARN_HISTOGRAM_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "dplearn/noise.h"

namespace dplearn {

// A bucket in a countable universe, or the sentinel bottom bucket. Bottom
// sorts before every index.
class BucketKey {
 public:
  static BucketKey Of(int64_t index) { return BucketKey(false, index); }
  static BucketKey Bottom() { return BucketKey(true, 0); }

  bool is_bottom() const { return bottom_; }
  // Meaningless for Bottom().
  int64_t index() const { return index_; }

  std::string DebugString() const;

  friend auto operator<=>(const BucketKey& a, const BucketKey& b) {
    if (a.bottom_ != b.bottom_) return b.bottom_ <=> a.bottom_;
    return a.index_ <=> b.index_;
  }
  friend bool operator==(const BucketKey& a, const BucketKey& b) = default;

 private:
  BucketKey(bool bottom, int64_t index) : bottom_(bottom), index_(index) {}

  bool bottom_;
  int64_t index_;
};

struct HistogramResult {
  // Released buckets and their noisy frequencies.
  std::map<BucketKey, double> entries;
  int64_t n = 0;
  // With probability >= 1 - beta every bucket's reported frequency (0 when
  // absent) is within this distance of its true frequency.
  double accuracy_bound = 0;
};

// Laplace scale 2/(eps n) applied to each nonempty bucket's frequency.
double StableHistogramNoiseScale(int64_t n, double epsilon);
// Release threshold 1/n + 2 ln(2/delta)/(eps n).
double StableHistogramThreshold(int64_t n, double epsilon, double delta);
// 4 ln(2n/(delta beta))/(eps n).
double StableHistogramAccuracy(int64_t n, double epsilon, double delta,
                               double beta);

// (epsilon, delta)-DP histogram over an unbounded universe. Only buckets that
// occur in the data can be released, and a noisy frequency must clear the
// threshold above. Zero-noise mode skips the threshold and returns exact
// frequencies.
absl::StatusOr<HistogramResult> StableHistogram(
    absl::Span<const BucketKey> data, double epsilon, double delta,
    double beta, NoiseSource& noise);

// sqrt(2 ln(2|U|/beta)/rho)/n * sqrt(2).
double GaussianHistogramAccuracy(int64_t n, int64_t universe_size, double rho,
                                 double beta);

// rho-zCDP histogram over a finite universe via the Gaussian mechanism on the
// frequency vector, l2 sensitivity sqrt(2)/n. Every universe key is reported.
absl::StatusOr<HistogramResult> GaussianHistogram(
    absl::Span<const BucketKey> data, absl::Span<const BucketKey> universe,
    double rho, double beta, NoiseSource& noise);

// Key with the largest reported frequency if that frequency is >= threshold.
// Bottom is never returned; ties go to the smaller index.
std::optional<BucketKey> ArgmaxBucket(const HistogramResult& h,
                                      double threshold);

}  // namespace dplearn

#endif  // DPLEARN_HISTOGRAM_H_
