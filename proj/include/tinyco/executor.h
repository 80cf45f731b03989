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

#ifndef TINYCO_EXECUTOR_H_
#define TINYCO_EXECUTOR_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "tinyco/graph.h"
#include "tinyco/planner.h"
#include "tinyco/tensor.h"
#include "tinyco/weights.h"

namespace tinyco {

// Direct int8 inference, one straightforward loop nest per layer: no im2col,
// no tiling, no in-place updates. This is the oracle.
TensorBuf RunReference(const NetworkArch& arch, const WeightSet& weights,
                       const TensorBuf& input);

// Byte-counting allocator standing in for the MCU's SRAM. Allocation past
// the capacity throws Error(kArenaOverflow).
class Arena {
 public:
  explicit Arena(int64_t capacity) : capacity_(capacity) {}

  int Allocate(int64_t bytes);
  void Free(int handle);
  std::span<int8_t> Get(int handle);

  int64_t live_bytes() const { return live_; }
  int64_t peak_bytes() const { return peak_; }
  int64_t capacity() const { return capacity_; }

 private:
  int64_t capacity_;
  int64_t live_ = 0;
  int64_t peak_ = 0;
  int next_ = 0;
  std::map<int, std::vector<int8_t>> blocks_;
};

struct ExecOptions {
  // Verify that the in-place depthwise rotation never reads an overwritten
  // input slot.
  bool shadow_check = true;
};

struct ScheduledResult {
  TensorBuf output;
  int64_t measured_peak_bytes = 0;
};

// Executes under `plan`: im2col with the planned tile widths, in-place
// depthwise where planned, every buffer drawn from an Arena capped at
// plan.peak_sram_bytes.
ScheduledResult RunScheduled(const NetworkArch& arch, const WeightSet& weights,
                             const TensorBuf& input, const MemoryPlan& plan,
                             const ExecOptions& options = {});

}  // namespace tinyco

#endif  // TINYCO_EXECUTOR_H_
