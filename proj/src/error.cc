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

#include "tinyco/error.h"

namespace tinyco {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidGene: return "invalid_gene";
    case ErrorCode::kInvalidArch: return "invalid_arch";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kUnsupportedBitWidth: return "unsupported_bit_width";
    case ErrorCode::kTileMismatch: return "tile_mismatch";
    case ErrorCode::kArenaOverflow: return "arena_overflow";
    case ErrorCode::kInplaceViolation: return "inplace_violation";
    case ErrorCode::kEmptySpace: return "empty_space";
    case ErrorCode::kInitFailure: return "init_failure";
    case ErrorCode::kLayout: return "layout";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace tinyco
