// Copyright 2026 The cidetect Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CIDETECT_ERROR_H_
#define CIDETECT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cidetect {

enum class ErrorCode {
  kMalformedGraph,
  kEmptyCorpus,
  kInconsistentTables,
  kExhausted,
  kTooFewProjects,
  kShapeMismatch,
  kInvalidLabel,
  kNonFiniteGradient,
  kDiverged,
  kNegativeDistance,
  kDegenerateLabels,
  kSiteNotFound,
  kPatternStarvation,
  kGraphTooLarge,
  kInvalidArgument,
  kParse,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// True for codes that indicate bad input rather than a failure while
// computing (used to pick the CLI exit status).
bool IsValidationError(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cidetect

#endif  // CIDETECT_ERROR_H_
