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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "basilisk/sim_kernel.hpp"
#include "basilisk/types.hpp"

namespace basilisk {

enum class TxnKind : std::uint8_t { read, write };

inline constexpr std::uint32_t kMaxBurstBeats = 256;
inline constexpr Addr kBurstBoundary = 4096;

/// One burst on the 64-bit interconnect. `data` is caller-owned: the source
/// bytes for writes, the destination buffer for reads. Its size must equal
/// len_beats * beat_bytes.
struct Transaction {
  MasterId master = MasterId::core;
  TxnKind kind = TxnKind::read;
  Addr addr = 0;
  std::uint32_t len_beats = 1;
  std::uint32_t beat_bytes = 8;
  std::span<std::uint8_t> data;

  std::uint64_t bytes() const { return std::uint64_t{len_beats} * beat_bytes; }
  bool crosses_4k() const {
    return (addr / kBurstBoundary) != ((addr + bytes() - 1) / kBurstBoundary);
  }
  /// Shape invariants only (beats, beat size, payload length); the 4 KiB rule
  /// is checked separately because it is answered with slverr.
  bool well_formed() const;

  static Transaction read(Addr addr, std::span<std::uint8_t> buf, MasterId m = MasterId::core);
  static Transaction write(Addr addr, std::span<std::uint8_t> buf, MasterId m = MasterId::core);
};

struct Response {
  Resp resp = Resp::okay;
  Cycle cycles = 0;
};

/// Anything that can serve bursts: memories, caches, register blocks and the
/// crossbar itself. Returned cycles are the target's own service time.
class Target {
 public:
  virtual ~Target() = default;
  virtual Response access(const Transaction& txn) = 0;
};

enum class Bus : std::uint8_t { xbar, regbus };

struct Region {
  std::string name;
  Addr base = 0;
  Addr size = 0;
  int target_id = -1;
  Bus bus = Bus::xbar;

  Addr end() const { return base + size; }
  bool contains(Addr a) const { return a >= base && a - base < size; }
};

/// Ordered, non-overlapping, 4 KiB aligned device regions.
class AddressMap {
 public:
  /// Throws ConfigError on misalignment, zero size or overlap.
  void add(Region r);
  const Region* route(Addr addr) const;
  const Region* find(const std::string& name) const;
  const std::vector<Region>& regions() const { return regions_; }
  std::string describe() const;

 private:
  std::vector<Region> regions_;  // sorted by base
};

/// Register-level device behind the register bus (or a register adapter).
/// Offsets are relative to the device region base and 4-byte aligned.
class RegisterDevice {
 public:
  virtual ~RegisterDevice() = default;
  virtual Resp read32(Addr offset, std::uint32_t& value) = 0;
  virtual Resp write32(Addr offset, std::uint32_t value) = 0;
};

struct RegbusAccess {
  Addr addr = 0;
  TxnKind kind = TxnKind::read;
  std::uint32_t data = 0;
};

struct RegbusResult {
  Resp resp = Resp::okay;
  std::uint32_t data = 0;
};

/// Single-beat 32-bit demultiplexer for low-throughput peripherals.
class Regbus {
 public:
  static constexpr Cycle kServiceCycles = 4;

  Regbus(Kernel& kernel, const AddressMap& map) : kernel_(kernel), map_(map) {}
  void attach(int target_id, RegisterDevice* dev) { devices_[target_id] = dev; }
  RegbusResult access(const RegbusAccess& acc);

 private:
  Kernel& kernel_;
  const AddressMap& map_;
  std::map<int, RegisterDevice*> devices_;
};

/// Presents a RegisterDevice as a crossbar target accepting aligned single
/// beats of 4 or 8 bytes (8-byte beats touch two consecutive registers).
class RegisterTarget final : public Target {
 public:
  RegisterTarget(RegisterDevice& dev, Addr base, Cycle latency = 1)
      : dev_(dev), base_(base), latency_(latency) {}
  Response access(const Transaction& txn) override;

 private:
  RegisterDevice& dev_;
  Addr base_;
  Cycle latency_;
};

struct PortStats {
  std::uint64_t bytes = 0;
  std::uint64_t busy_cycles = 0;
  std::uint64_t transactions = 0;
};

/// Fully connected crossbar with fixed-width data ports. Service time of a
/// burst is target access time plus ceil(bytes / port_bytes_per_cycle).
/// Regbus-mapped regions are forwarded through a bridge that only accepts
/// aligned 4-byte single beats.
class Crossbar final : public Target {
 public:
  Crossbar(Kernel& kernel, const AddressMap& map, std::uint32_t port_bytes_per_cycle = 8)
      : kernel_(kernel), map_(map), port_bytes_(port_bytes_per_cycle) {}

  void attach(int target_id, Target* t) { targets_[target_id] = t; }
  void attach_regbus(Regbus* rb) { regbus_ = rb; }
  /// Target ids whose traffic is accounted as LLC-port bytes.
  void mark_llc_port(int target_id) { llc_ports_.push_back(target_id); }

  Response submit(const Transaction& txn);
  Response access(const Transaction& txn) override { return submit(txn); }

  std::uint32_t port_bytes_per_cycle() const { return port_bytes_; }
  const std::map<int, PortStats>& port_stats() const { return stats_; }
  const AddressMap& map() const { return map_; }

 private:
  Kernel& kernel_;
  const AddressMap& map_;
  std::uint32_t port_bytes_;
  std::map<int, Target*> targets_;
  std::map<int, PortStats> stats_;
  std::vector<int> llc_ports_;
  Regbus* regbus_ = nullptr;
};

/// Splits [addr, addr+len) into well-formed bursts: naturally aligned beats
/// of up to `max_beat` bytes, at most 256 beats, never crossing 4 KiB.
struct BurstSpan {
  Addr addr;
  std::uint32_t len_beats;
  std::uint32_t beat_bytes;
  std::uint64_t bytes() const { return std::uint64_t{len_beats} * beat_bytes; }
};
std::vector<BurstSpan> split_bursts(Addr addr, std::uint64_t len, std::uint32_t max_beat = 8);

}  // namespace basilisk
