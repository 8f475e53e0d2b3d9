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

#include "cidetect/error.h"

namespace cidetect {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedGraph: return "MalformedGraph";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInconsistentTables: return "InconsistentTables";
    case ErrorCode::kExhausted: return "Exhausted";
    case ErrorCode::kTooFewProjects: return "TooFewProjects";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInvalidLabel: return "InvalidLabel";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kNegativeDistance: return "NegativeDistance";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kSiteNotFound: return "SiteNotFound";
    case ErrorCode::kPatternStarvation: return "PatternStarvation";
    case ErrorCode::kGraphTooLarge: return "GraphTooLarge";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "IO";
  }
  return "Unknown";
}

bool IsValidationError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFiniteGradient:
    case ErrorCode::kDiverged:
    case ErrorCode::kExhausted:
    case ErrorCode::kPatternStarvation:
    case ErrorCode::kIo:
      return false;
    default:
      return true;
  }
}

}  // namespace cidetect
