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

#ifndef DPLEARN_STATUS_MACROS_H_
#define DPLEARN_STATUS_MACROS_H_

#include <utility>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/string_view.h"

#define DPLEARN_CONCAT_INNER_(a, b) a##b
#define DPLEARN_CONCAT_(a, b) DPLEARN_CONCAT_INNER_(a, b)

#define RETURN_IF_ERROR(expr)                         \
  do {                                                \
    const absl::Status _dplearn_status = (expr);      \
    if (!_dplearn_status.ok()) return _dplearn_status; \
  } while (0)

#define ASSIGN_OR_RETURN_IMPL_(tmp, lhs, rexpr) \
  auto tmp = (rexpr);                           \
  if (!tmp.ok()) return tmp.status();           \
  lhs = std::move(*tmp)

#define ASSIGN_OR_RETURN(lhs, rexpr) \
  ASSIGN_OR_RETURN_IMPL_(DPLEARN_CONCAT_(_dplearn_statusor_, __LINE__), lhs, rexpr)

namespace dplearn {

// Error kinds shared across modules. Each maps onto one absl status code so
// callers can branch on the code and read the detail from the message.
inline absl::Status InvalidParameterError(absl::string_view msg) {
  return absl::InvalidArgumentError(absl::StrCat("invalid-parameter: ", msg));
}
inline absl::Status InvalidInputError(absl::string_view msg) {
  return absl::InvalidArgumentError(absl::StrCat("invalid-input: ", msg));
}
inline absl::Status EmptyInputError(absl::string_view msg) {
  return absl::InvalidArgumentError(absl::StrCat("empty-input: ", msg));
}
inline absl::Status SingularMatrixError(absl::string_view msg) {
  return absl::FailedPreconditionError(absl::StrCat("singular-matrix: ", msg));
}
inline absl::Status EstimationFailedError(absl::string_view msg) {
  return absl::AbortedError(absl::StrCat("estimation-failed: ", msg));
}
inline absl::Status InsufficientSamplesError(absl::string_view msg) {
  return absl::OutOfRangeError(absl::StrCat("insufficient-samples: ", msg));
}
inline absl::Status TooLargeError(absl::string_view msg) {
  return absl::ResourceExhaustedError(absl::StrCat("too-large: ", msg));
}

}  // namespace dplearn

#endif  // DPLEARN_STATUS_MACROS_H_
