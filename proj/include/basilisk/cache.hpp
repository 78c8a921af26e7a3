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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "basilisk/interconnect.hpp"

namespace basilisk {

struct CacheConfig {
  unsigned ways = 4;
  unsigned sets = 256;
  unsigned line_bytes = 64;
  Cycle hit_latency = 2;
  /// Write-through, no-allocate on write miss. Default is write-back,
  /// write-allocate.
  bool write_through = false;

  Addr capacity() const { return Addr{ways} * sets * line_bytes; }
  bool operator==(const CacheConfig&) const = default;
  /// Throws ConfigError unless ways/sets/line are powers of two (ways need
  /// not be) and non-zero.
  void validate() const;
  static CacheConfig from_capacity(Addr capacity, unsigned ways, unsigned line_bytes,
                                   Cycle hit_latency);
};

enum class AccessKind : std::uint8_t { read, write };

struct CacheLine {
  bool valid = false;
  bool dirty = false;
  Addr tag = 0;
  unsigned lru_rank = 0;  // 0 = most recently used
};

struct LookupResult {
  Resp resp = Resp::okay;
  bool hit = false;
  bool bypassed = false;
  std::optional<Addr> evicted_line;
  bool evicted_dirty = false;
  Cycle stall_cycles = 0;
};

/// Set-associative cache engine with strict LRU replacement. Owns the data
/// array, laid out [way][set][line] so that a way removed from caching can be
/// exposed directly as scratchpad memory.
class Cache final : public Target {
 public:
  struct Counters {
    std::uint64_t CounterSet::*hits = nullptr;
    std::uint64_t CounterSet::*misses = nullptr;
  };

  Cache(std::string name, const CacheConfig& cfg, Target& downstream, Kernel& kernel,
        Counters counters, MasterId master = MasterId::core);

  /// Single access within one line. Reads fill `data`, writes consume it.
  LookupResult lookup_access(Addr addr, AccessKind kind, std::span<std::uint8_t> data);

  /// Burst service: splits into line accesses. Cycles are one hit latency plus
  /// every miss penalty.
  Response access(const Transaction& txn) override;

  /// Reconfigures the way mask. Newly masked ways are written back and
  /// invalidated; newly unmasked ways come back invalid. Returns the cycles
  /// spent on write-backs.
  Cycle configure_spm(std::uint32_t way_mask);
  /// Writes back every dirty line and invalidates everything.
  Cycle flush();
  /// Drops all lines without writing back (instruction cache).
  void invalidate_all();

  /// Backdoor access to a resident copy of [addr, addr+len): no timing, no
  /// replacement update, dirty bits unchanged. Bytes of non-resident lines
  /// are left untouched. The range must not straddle a line.
  void peek(Addr addr, std::span<std::uint8_t> out) const;
  void poke(Addr addr, std::span<const std::uint8_t> in);

  /// Scratchpad view: offset = way * way_bytes + set * line_bytes + byte.
  /// Touching a way that is not masked answers slverr.
  Resp spm_access(Addr offset, AccessKind kind, std::span<std::uint8_t> data);
  Addr way_bytes() const { return Addr{cfg_.sets} * cfg_.line_bytes; }

  std::uint32_t spm_mask() const { return spm_mask_; }
  const CacheConfig& config() const { return cfg_; }
  const CacheLine& line(unsigned set, unsigned way) const { return meta_[set * cfg_.ways + way]; }
  /// Way holding `addr`, if resident.
  std::optional<unsigned> find(Addr addr) const;
  std::uint64_t writebacks() const { return writebacks_; }
  std::uint64_t lookups() const { return lookups_; }

  // Structural invariants, used by property tests.
  bool partition_invariant() const;
  bool unique_tags() const;
  std::size_t valid_lines() const;
  std::size_t usable_ways() const;

 private:
  CacheLine& meta(unsigned set, unsigned way) { return meta_[set * cfg_.ways + way]; }
  std::uint8_t* line_data(unsigned set, unsigned way) {
    return data_.data() + (Addr{way} * cfg_.sets + set) * cfg_.line_bytes;
  }
  bool way_masked(unsigned way) const { return (spm_mask_ >> way) & 1u; }
  void touch(unsigned set, unsigned way);
  unsigned pick_victim(unsigned set) const;
  /// Writes back a dirty line; returns cycles.
  Cycle write_back(unsigned set, unsigned way, Resp* resp = nullptr);
  Addr line_addr(Addr tag, unsigned set) const {
    return (tag * cfg_.sets + set) * cfg_.line_bytes;
  }

  std::string name_;
  CacheConfig cfg_;
  Target& down_;
  Kernel& kernel_;
  Counters counters_;
  MasterId master_;
  std::vector<CacheLine> meta_;
  std::vector<std::uint8_t> data_;
  std::uint32_t spm_mask_ = 0;
  std::uint64_t writebacks_ = 0;
  std::uint64_t lookups_ = 0;
};

/// Crossbar target for the LLC scratchpad window.
class ScratchpadTarget final : public Target {
 public:
  ScratchpadTarget(Cache& llc, Addr base) : llc_(llc), base_(base) {}
  Response access(const Transaction& txn) override;

 private:
  Cache& llc_;
  Addr base_;
};

/// LLC configuration registers: SPM_MASK (rw), FLUSH (write 1 to start,
/// self-clearing), STATUS (bit 0 busy while write-backs drain).
class LlcConfigRegs final : public RegisterDevice {
 public:
  static constexpr Addr kSpmMask = 0x0;
  static constexpr Addr kFlush = 0x4;
  static constexpr Addr kStatus = 0x8;

  LlcConfigRegs(Cache& llc, Kernel& kernel) : llc_(llc), kernel_(kernel) {}
  Resp read32(Addr offset, std::uint32_t& value) override;
  Resp write32(Addr offset, std::uint32_t value) override;

 private:
  Cache& llc_;
  Kernel& kernel_;
  Cycle busy_until_ = 0;
};

}  // namespace basilisk
