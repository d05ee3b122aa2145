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

#include "dplearn/sampling.h"

#include <charconv>
#include <cmath>

#include <Eigen/Cholesky>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "dplearn/linalg.h"
#include "dplearn/status_macros.h"

namespace dplearn {

absl::Status ValidateGaussianParams(const GaussianParams& params) {
  const Eigen::Index d = params.mean.size();
  if (params.cov.rows() != d || params.cov.cols() != d) {
    return InvalidInputError(absl::StrCat("covariance must be ", d, "x", d));
  }
  if (!params.mean.allFinite()) return InvalidInputError("non-finite mean");
  if (!IsSymmetric(params.cov)) {
    return InvalidInputError("covariance is not symmetric");
  }
  ASSIGN_OR_RETURN(auto eig, Eigendecompose(params.cov));
  if (d > 0) {
    const double top = SpectralNormOf(eig);
    if (eig.values(d - 1) < -1e-9 * top) {
      return InvalidInputError(absl::StrCat(
          "covariance is not PSD; smallest eigenvalue ", eig.values(d - 1)));
    }
  }
  if (!(params.R >= 0)) return InvalidParameterError("R must be >= 0");
  if (params.kappa.has_value() && !(*params.kappa >= 1)) {
    return InvalidParameterError("kappa must be >= 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<Eigen::MatrixXd> SampleGaussian(const GaussianParams& params,
                                               int64_t n, NoiseSource& noise) {
  if (n < 0) return InvalidParameterError("n must be >= 0");
  RETURN_IF_ERROR(ValidateGaussianParams(params));
  const Eigen::Index d = params.mean.size();
  Eigen::MatrixXd factor;
  Eigen::LLT<Eigen::MatrixXd> llt(params.cov);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    ASSIGN_OR_RETURN(factor, SqrtPsd(params.cov));
  }
  Eigen::MatrixXd z(n, d);
  for (int64_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = noise.Gaussian();
  }
  Eigen::MatrixXd x = z * factor.transpose();
  x.rowwise() += params.mean.transpose();
  return x;
}

Eigen::MatrixXd SampleSymmetricGaussian(Eigen::Index d, double stddev,
                                        NoiseSource& noise) {
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      m(i, j) = noise.Gaussian(stddev);
      m(j, i) = m(i, j);
    }
  }
  return m;
}

absl::StatusOr<Eigen::MatrixXd> SampleBernoulliProduct(const Eigen::VectorXd& p,
                                                       int64_t n,
                                                       NoiseSource& noise) {
  if (n < 0) return InvalidParameterError("n must be >= 0");
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (!(p[j] >= 0 && p[j] <= 1)) {
      return InvalidParameterError(
          absl::StrCat("p[", j, "] = ", p[j], " is outside [0, 1]"));
    }
  }
  Eigen::MatrixXd x(n, p.size());
  for (int64_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      x(i, j) = noise.Bernoulli(p[j]) ? 1.0 : 0.0;
    }
  }
  return x;
}

void WriteCsv(const Eigen::MatrixXd& samples, std::ostream& out,
              const std::vector<std::string>& header) {
  if (!header.empty()) out << absl::StrJoin(header, ",") << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      if (j > 0) out << ',';
      auto res = std::to_chars(buf, buf + sizeof(buf), samples(i, j));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

absl::StatusOr<Eigen::MatrixXd> ReadCsv(std::istream& in, bool has_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view text = absl::StripAsciiWhitespace(line);
    if (text.empty()) continue;
    if (has_header && line_no == 1) continue;
    std::vector<double> row;
    for (absl::string_view field : absl::StrSplit(text, ',')) {
      field = absl::StripAsciiWhitespace(field);
      double v = 0;
      auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        return InvalidInputError(
            absl::StrCat("line ", line_no, ": cannot parse '", field, "'"));
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      return InvalidInputError(absl::StrCat("line ", line_no, " has ",
                                            row.size(), " fields, expected ",
                                            rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return EmptyInputError("no samples in CSV");
  Eigen::MatrixXd x(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) x(i, j) = rows[i][j];
  }
  return x;
}

}  // namespace dplearn
