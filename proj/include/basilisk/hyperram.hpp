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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "basilisk/interconnect.hpp"

namespace basilisk {

/// HyperRAM timing: every burst pays a fixed chip-select/initial-latency
/// overhead and then streams at `bytes_per_cycle`. With the defaults the
/// streaming asymptote is 2 B/cycle, i.e. 124 MB/s at 62 MHz.
struct DramConfig {
  unsigned chips = 2;
  Addr bytes_per_chip = mib(16);
  std::uint32_t bytes_per_cycle = 2;
  Cycle latency_cycles = 12;

  Addr size() const { return bytes_per_chip * chips; }
  bool operator==(const DramConfig&) const = default;
  double peak_bytes_per_second(std::uint64_t freq_hz) const {
    return static_cast<double>(bytes_per_cycle) * static_cast<double>(freq_hz);
  }
};

class HyperRam final : public Target {
 public:
  HyperRam(Kernel& kernel, Addr base, const DramConfig& cfg);

  /// Byte-exact storage; bursts straddling the chip boundary are split and
  /// each part pays its own access latency.
  Response access(const Transaction& txn) override;

  /// Closed-form service time of a single-chip burst of `bytes`.
  Cycle service_cycles(std::uint64_t bytes) const {
    return cfg_.latency_cycles + ceil_div(bytes, cfg_.bytes_per_cycle);
  }

  /// Backdoor access without timing. Offsets are relative to the DRAM base;
  /// out-of-range requests throw LoadError.
  void load_image(Addr offset, std::span<const std::uint8_t> bytes);
  std::vector<std::uint8_t> dump(Addr offset, std::size_t len) const;

  Addr base() const { return base_; }
  const DramConfig& config() const { return cfg_; }
  std::uint64_t chip_accesses(unsigned chip) const { return chip_accesses_.at(chip); }

 private:
  unsigned chip_of(Addr offset) const { return static_cast<unsigned>(offset / cfg_.bytes_per_chip); }

  Kernel& kernel_;
  Addr base_;
  DramConfig cfg_;
  std::vector<std::uint8_t> mem_;
  std::vector<std::uint64_t> chip_accesses_;
};

}  // namespace basilisk
