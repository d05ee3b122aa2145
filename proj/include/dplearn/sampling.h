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

#ifndef DPLEARN_SAMPLING_H_
#define DPLEARN_SAMPLING_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dplearn/noise.h"

namespace dplearn {

// A Gaussian model N(mean, cov) with the range bounds the estimators assume:
// ||mean||_2 <= R and, when kappa is set, I <= cov <= kappa I.
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double R = 0;
  std::optional<double> kappa;
};

// Checks shapes, symmetry, PSD-ness (to 1e-9 ||cov||_2), R >= 0, kappa >= 1.
absl::Status ValidateGaussianParams(const GaussianParams& params);

// n i.i.d. rows from N(mean, cov). Uses a Cholesky factor, falling back to the
// symmetric square root when cov is only semidefinite.
absl::StatusOr<Eigen::MatrixXd> SampleGaussian(const GaussianParams& params,
                                               int64_t n, NoiseSource& noise);

// Symmetric d x d matrix whose entries on and above the diagonal are i.i.d.
// N(0, stddev^2), filled row by row.
Eigen::MatrixXd SampleSymmetricGaussian(Eigen::Index d, double stddev,
                                        NoiseSource& noise);

// n rows of independent Bernoulli(p_j) bits, as 0.0 / 1.0.
absl::StatusOr<Eigen::MatrixXd> SampleBernoulliProduct(const Eigen::VectorXd& p,
                                                       int64_t n,
                                                       NoiseSource& noise);

// One row per sample, comma separated, shortest round-trip decimal text.
void WriteCsv(const Eigen::MatrixXd& samples, std::ostream& out,
              const std::vector<std::string>& header = {});

absl::StatusOr<Eigen::MatrixXd> ReadCsv(std::istream& in, bool has_header);

}  // namespace dplearn

#endif  // DPLEARN_SAMPLING_H_
