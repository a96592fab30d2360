// Copyright 2026 The isda Authors. All Rights Reserved.
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

#ifndef ISDA_ERROR_HPP_
#define ISDA_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace isda {

enum class ErrorCode {
  kDimensionMismatch,
  kNotSymmetric,
  kNotPositiveDefinite,
  kSingular,
  kDegeneratePivot,
  kRankDeficient,
  kConvergenceFailure,
  kNonFinite,
  kEmptySubclass,
  kDegenerateSpectrum,
  kTooFewSamples,
  kZeroSigma,
  kUnknownSubclass,
  kUnknownClass,
  kInvalidArgument,
  kParseError,
  kRaggedRows,
  kMissingClassColumn,
  kEmptyDataset,
  kIoError,
  kArchiveFormat,
  kMissingSupport,
};

std::string_view error_code_name(ErrorCode code);

// Every solver failure is reported through this type; `code()` lets callers
// (CLI, Python bindings, tests) dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace isda

#endif  // ISDA_ERROR_HPP_
