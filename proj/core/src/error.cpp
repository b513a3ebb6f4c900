// Copyright 2026 The HaloScope Authors.
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

#include "haloscope/error.hpp"

namespace haloscope {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kBadMagic: return "bad_magic";
    case ErrorKind::kVersionMismatch: return "version_mismatch";
    case ErrorKind::kTruncatedPayload: return "truncated_payload";
    case ErrorKind::kNonFinite: return "non_finite";
    case ErrorKind::kShapeMismatch: return "shape_mismatch";
    case ErrorKind::kRowCountMismatch: return "row_count_mismatch";
    case ErrorKind::kUnknownEnumValue: return "unknown_enum_value";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kOutOfRange: return "out_of_range";
    case ErrorKind::kRankDeficient: return "rank_deficient";
    case ErrorKind::kEmptyClass: return "empty_class";
    case ErrorKind::kSingleClassLabels: return "single_class_labels";
    case ErrorKind::kNoFeasibleThreshold: return "no_feasible_threshold";
    case ErrorKind::kTrainingDiverged: return "training_diverged";
    case ErrorKind::kMissingLabels: return "missing_labels";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind) {}

}  // namespace haloscope
