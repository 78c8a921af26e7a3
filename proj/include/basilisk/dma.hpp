/*
 * Copyright 2026 The basilisk-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "basilisk/interconnect.hpp"
#include "basilisk/sim_kernel.hpp"

namespace basilisk {

struct DmaJob {
  Addr src = 0;
  Addr dst = 0;
  std::uint32_t size = 0;  // bytes per row
  std::uint32_t reps = 1;  // rows
  std::int64_t src_stride = 0;
  std::int64_t dst_stride = 0;

  std::uint64_t total_bytes() const { return std::uint64_t{size} * reps; }
};

enum class DmaStatus : std::uint32_t { idle = 0, busy = 1, done = 2, error = 3 };

/// Single-channel 2D copy engine mastering the crossbar. Rows are copied in
/// order, each front to back, in chunks of at most kChunkBytes; a chunk costs
/// the larger of its read and write burst times.
class DmaEngine final : public RegisterDevice {
 public:
  static constexpr Addr kSrcLo = 0x00, kSrcHi = 0x04, kDstLo = 0x08, kDstHi = 0x0c;
  static constexpr Addr kSize = 0x10, kReps = 0x14, kSrcStride = 0x18, kDstStride = 0x1c;
  static constexpr Addr kCtrl = 0x20, kStatus = 0x24, kErrLo = 0x28, kErrHi = 0x2c;
  static constexpr std::uint32_t kCtrlStart = 1, kCtrlClear = 2;
  static constexpr std::uint64_t kChunkBytes = 2048;
  static constexpr Cycle kRetryCycles = 16;

  DmaEngine(Kernel& kernel, Target& bus);

  /// Called once per finished job (done or error).
  void set_irq(std::function<void()> f) { irq_ = std::move(f); }

  /// Starts a job directly; false when the engine is busy.
  bool submit(const DmaJob& job);
  void clear();
  DmaStatus status() const { return status_; }
  Addr error_addr() const { return err_addr_; }
  const DmaJob& config() const { return cfg_; }
  std::uint64_t busy_cycles() const { return busy_cycles_; }
  std::uint64_t bytes_moved() const { return bytes_moved_; }
  std::uint64_t jobs_completed() const { return jobs_; }

  Resp read32(Addr offset, std::uint32_t& value) override;
  Resp write32(Addr offset, std::uint32_t value) override;

 private:
  struct Chunk {
    Addr src = 0;
    Addr dst = 0;
    std::uint64_t len = 0;
    std::vector<std::uint8_t> buf;
    std::vector<BurstSpan> reads;
    std::vector<BurstSpan> writes;
    std::size_t next = 0;  // index over reads then writes
    Cycle read_cycles = 0;
    Cycle write_cycles = 0;
  };

  void plan_chunk();
  void step();
  void finish(DmaStatus st, Addr err = 0);

  Kernel& kernel_;
  Target& bus_;
  std::function<void()> irq_;
  DmaJob cfg_;
  DmaJob job_;
  DmaStatus status_ = DmaStatus::idle;
  Addr err_addr_ = 0;
  std::uint32_t row_ = 0;
  std::uint64_t row_off_ = 0;
  Chunk chunk_;
  Cycle started_ = 0;
  std::uint64_t busy_cycles_ = 0;
  std::uint64_t bytes_moved_ = 0;
  std::uint64_t jobs_ = 0;
};

}  // namespace basilisk
