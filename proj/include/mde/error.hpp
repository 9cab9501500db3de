/*
 * Copyright 2026 The mdeval Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MDE_ERROR_HPP_
#define MDE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mde {

// Stable numbering: these values are exported through the C API.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kMalformedHeader = 3,
  kNonFinite = 4,
  kLabelOutOfRange = 5,
  kTruncated = 6,
  kMissingLabels = 7,
  kMissingInput = 8,
  kShapeMismatch = 9,
  kDegenerate = 10,
  kNumeric = 11,
  kConfig = 12,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mde

#endif  // MDE_ERROR_HPP_
