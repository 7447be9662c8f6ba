// Copyright 2026 The lipgeo Authors
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

#ifndef LIPGEO_ERROR_HPP_
#define LIPGEO_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lipgeo {

enum class ErrorCode {
  kInvalidDistribution,
  kNotNormalized,
  kNotSquare,
  kZeroMarginal,
  kSingularKernel,
  kLengthMismatch,
  kZeroReference,
  kMixtureInconsistent,
  kNotOrthogonal,
  kDegenerateSpectrum,
  kInvalidInducedDistribution,
  kTooManyParameters,
  kNoFeasiblePoint,
  kInvalidArgument,
  kParseError,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidDistribution:
      return "InvalidDistribution";
    case ErrorCode::kNotNormalized:
      return "NotNormalized";
    case ErrorCode::kNotSquare:
      return "NotSquare";
    case ErrorCode::kZeroMarginal:
      return "ZeroMarginal";
    case ErrorCode::kSingularKernel:
      return "SingularKernel";
    case ErrorCode::kLengthMismatch:
      return "LengthMismatch";
    case ErrorCode::kZeroReference:
      return "ZeroReference";
    case ErrorCode::kMixtureInconsistent:
      return "MixtureInconsistent";
    case ErrorCode::kNotOrthogonal:
      return "NotOrthogonal";
    case ErrorCode::kDegenerateSpectrum:
      return "DegenerateSpectrum";
    case ErrorCode::kInvalidInducedDistribution:
      return "InvalidInducedDistribution";
    case ErrorCode::kTooManyParameters:
      return "TooManyParameters";
    case ErrorCode::kNoFeasiblePoint:
      return "NoFeasiblePoint";
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kParseError:
      return "ParseError";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI's machine-readable error output) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace lipgeo

#endif  // LIPGEO_ERROR_HPP_
