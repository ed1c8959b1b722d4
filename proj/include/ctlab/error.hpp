// Copyright 2026 The ctlab Authors
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

#ifndef CTLAB_ERROR_HPP_
#define CTLAB_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctlab {

enum class ErrorCode {
  kInvalidNetwork,
  kInvalidTarget,
  kInvalidEvidence,
  kImpossibleEvidence,
  kStateSpaceTooLarge,
  kEmptyCandidateSet,
  kInvalidCandidate,
  kParseError,
  kMissingRequiredNode,
  kAssumptionViolated,
  kMissingProvenance,
  kInvalidParams,
  kCriterionNeverSatisfied,
  kCriterionNotMonotone,
  kInfeasible,
  kUnknownIndexCase,
  kInvalidWindow,
  kIoError,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidNetwork: return "InvalidNetwork";
    case ErrorCode::kInvalidTarget: return "InvalidTarget";
    case ErrorCode::kInvalidEvidence: return "InvalidEvidence";
    case ErrorCode::kImpossibleEvidence: return "ImpossibleEvidence";
    case ErrorCode::kStateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::kEmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::kInvalidCandidate: return "InvalidCandidate";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingRequiredNode: return "MissingRequiredNode";
    case ErrorCode::kAssumptionViolated: return "AssumptionViolated";
    case ErrorCode::kMissingProvenance: return "MissingProvenance";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kCriterionNeverSatisfied: return "CriterionNeverSatisfied";
    case ErrorCode::kCriterionNotMonotone: return "CriterionNotMonotone";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kUnknownIndexCase: return "UnknownIndexCase";
    case ErrorCode::kInvalidWindow: return "InvalidWindow";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

// All library failures are reported through this type. The message is
// prefixed with the code name so that CLI and HTTP callers can surface it
// verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace ctlab

#endif  // CTLAB_ERROR_HPP_
