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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace haloscope {

enum class ErrorKind {
  kIo,
  kBadMagic,
  kVersionMismatch,
  kTruncatedPayload,
  kNonFinite,
  kShapeMismatch,
  kRowCountMismatch,
  kUnknownEnumValue,
  kInvalidArgument,
  kOutOfRange,
  kRankDeficient,
  kEmptyClass,
  kSingleClassLabels,
  kNoFeasibleThreshold,
  kTrainingDiverged,
  kMissingLabels,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported with this exception; callers that need
// to distinguish failure modes switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace haloscope
