// Copyright 2026 The bfce Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BFCE_ERROR_H_
#define BFCE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace bfce {

enum class ErrorCode {
  kInvalidParameters,
  kFilterNotEmpty,
  kMalformedInput,
  kOutOfRange,
  kDegenerateFpp,
  kSaturatedFilter,
  kStreamExhausted,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported as bfce::Error; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameters: return "invalid-parameters";
    case ErrorCode::kFilterNotEmpty: return "filter-not-empty";
    case ErrorCode::kMalformedInput: return "malformed-input";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kDegenerateFpp: return "degenerate-fpp";
    case ErrorCode::kSaturatedFilter: return "saturated-filter";
    case ErrorCode::kStreamExhausted: return "stream-exhausted";
  }
  return "unknown";
}

}  // namespace bfce

#endif  // BFCE_ERROR_H_
