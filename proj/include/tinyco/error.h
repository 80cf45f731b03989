// Copyright 2026 The TinyCo Authors.
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

#ifndef TINYCO_ERROR_H_
#define TINYCO_ERROR_H_

#include <stdexcept>
#include <string>

namespace tinyco {

enum class ErrorCode {
  kInvalidGene,
  kInvalidArch,
  kShapeMismatch,
  kUnsupportedBitWidth,
  kTileMismatch,
  kArenaOverflow,
  kInplaceViolation,
  kEmptySpace,
  kInitFailure,
  kLayout,
  kParse,
  kIo,
  kInvalidArgument,
};

const char* ErrorCodeName(ErrorCode code);

// Every failure in the library surfaces as this exception. The code is
// stable and is what the CLI reports in its structured error output.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tinyco

#endif  // TINYCO_ERROR_H_
