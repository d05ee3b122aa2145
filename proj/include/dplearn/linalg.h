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

#ifndef DPLEARN_LINALG_H_
#define DPLEARN_LINALG_H_

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "absl/status/statusor.h"
#include "dplearn/status_macros.h"

namespace dplearn {

// Eigenvalues in descending order; column i of `vectors` pairs with values[i].
template <typename Scalar>
struct EigenDecomposition {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
};

template <typename Derived>
bool IsSymmetric(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      if (m(i, j) != m(j, i)) return false;
    }
  }
  return true;
}

// (M + M^T) / 2, which is exactly symmetric in floating point.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
Symmetrize(const Eigen::MatrixBase<Derived>& m) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic,
                            Eigen::Dynamic>;
  Mat out = m;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < out.rows(); ++i) {
      const auto avg = (out(i, j) + out(j, i)) / 2;
      out(i, j) = avg;
      out(j, i) = avg;
    }
  }
  return out;
}

template <typename Derived>
absl::StatusOr<EigenDecomposition<typename Derived::Scalar>> Eigendecompose(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols()) return InvalidInputError("matrix is not square");
  if (!m.allFinite()) return InvalidInputError("matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Mat> solver(Symmetrize(m));
  if (solver.info() != Eigen::Success) {
    return InvalidInputError("eigendecomposition did not converge");
  }
  // Eigen sorts ascending; flip to descending.
  EigenDecomposition<Scalar> out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

// Reassembles V diag(f(lambda)) V^T and symmetrizes the result.
template <typename Scalar, typename Fn>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ApplySpectral(
    const EigenDecomposition<Scalar>& eig, Fn fn) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mapped = eig.values.unaryExpr(fn);
  return Symmetrize(eig.vectors * mapped.asDiagonal() *
                    eig.vectors.transpose());
}

// Nearest PSD matrix in Frobenius norm: negative eigenvalues are set to 0.
template <typename Derived>
absl::StatusOr<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic,
                             Eigen::Dynamic>>
ProjectPsd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  ASSIGN_OR_RETURN(auto eig, Eigendecompose(m));
  if (eig.values.size() == 0 || eig.values.minCoeff() >= 0) {
    return Symmetrize(m);
  }
  return ApplySpectral(eig, [](Scalar x) { return std::max<Scalar>(x, 0); });
}

template <typename Scalar>
Scalar SpectralNormOf(const EigenDecomposition<Scalar>& eig) {
  if (eig.values.size() == 0) return 0;
  return std::max(std::abs(eig.values(0)),
                  std::abs(eig.values(eig.values.size() - 1)));
}

template <typename Derived>
absl::StatusOr<typename Derived::Scalar> SpectralNorm(
    const Eigen::MatrixBase<Derived>& m) {
  ASSIGN_OR_RETURN(auto eig, Eigendecompose(m));
  return SpectralNormOf(eig);
}

template <typename Derived>
absl::StatusOr<typename Derived::Scalar> MaxEigenvalue(
    const Eigen::MatrixBase<Derived>& m) {
  ASSIGN_OR_RETURN(auto eig, Eigendecompose(m));
  if (eig.values.size() == 0) return EmptyInputError("0x0 matrix");
  return eig.values(0);
}

template <typename Derived>
absl::StatusOr<typename Derived::Scalar> MinEigenvalue(
    const Eigen::MatrixBase<Derived>& m) {
  ASSIGN_OR_RETURN(auto eig, Eigendecompose(m));
  if (eig.values.size() == 0) return EmptyInputError("0x0 matrix");
  return eig.values(eig.values.size() - 1);
}

// Symmetric PSD square root. Small negative eigenvalues from rounding are
// treated as 0.
template <typename Derived>
absl::StatusOr<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic,
                             Eigen::Dynamic>>
SqrtPsd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  ASSIGN_OR_RETURN(auto eig, Eigendecompose(m));
  return ApplySpectral(
      eig, [](Scalar x) { return std::sqrt(std::max<Scalar>(x, 0)); });
}

// Relative eigenvalue floor below which a covariance counts as singular.
inline constexpr double kSingularTolerance = 1e-12;

template <typename Scalar>
absl::Status CheckPositiveDefinite(const EigenDecomposition<Scalar>& eig) {
  if (eig.values.size() == 0) return EmptyInputError("0x0 matrix");
  const Scalar top = SpectralNormOf(eig);
  const Scalar bottom = eig.values(eig.values.size() - 1);
  if (!(top > 0) || bottom <= Scalar(kSingularTolerance) * top) {
    return SingularMatrixError(
        absl::StrCat("smallest eigenvalue ", static_cast<double>(bottom),
                     " vs spectral norm ", static_cast<double>(top)));
  }
  return absl::OkStatus();
}

// Symmetric S with S M S = I.
template <typename Derived>
absl::StatusOr<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic,
                             Eigen::Dynamic>>
InverseSqrtPsd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  ASSIGN_OR_RETURN(auto eig, Eigendecompose(m));
  RETURN_IF_ERROR(CheckPositiveDefinite(eig));
  return ApplySpectral(eig, [](Scalar x) { return 1 / std::sqrt(x); });
}

// ||sigma^{-1/2} v||_2.
template <typename DerivedV, typename DerivedS>
absl::StatusOr<typename DerivedV::Scalar> MahalanobisNorm(
    const Eigen::MatrixBase<DerivedV>& v,
    const Eigen::MatrixBase<DerivedS>& sigma) {
  if (v.cols() != 1 || v.rows() != sigma.rows()) {
    return InvalidInputError("vector and covariance dimensions differ");
  }
  ASSIGN_OR_RETURN(auto s, InverseSqrtPsd(sigma));
  return (s * v).norm();
}

// ||sigma^{-1/2} x sigma^{-1/2}||_F.
template <typename DerivedX, typename DerivedS>
absl::StatusOr<typename DerivedX::Scalar> MahalanobisMatrixNorm(
    const Eigen::MatrixBase<DerivedX>& x,
    const Eigen::MatrixBase<DerivedS>& sigma) {
  if (x.rows() != sigma.rows() || x.cols() != sigma.cols()) {
    return InvalidInputError("matrix and covariance dimensions differ");
  }
  ASSIGN_OR_RETURN(auto s, InverseSqrtPsd(sigma));
  return (s * x * s).norm();
}

}  // namespace dplearn

#endif  // DPLEARN_LINALG_H_
