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
#include <span>
#include <string>
#include <vector>

#include "basilisk/rv64/core.hpp"
#include "ref_hart.hpp"

namespace basilisk::testing {

/// Flat RAM behind the CoreBus interface; decerr outside the array.
class FlatBus final : public rv64::CoreBus {
 public:
  FlatBus(Addr base, std::size_t size) : base_(base), mem_(size, 0) {}

  rv64::BusResult read(Addr paddr, std::span<std::uint8_t> data, rv64::MemKind) override;
  rv64::BusResult write(Addr paddr, std::span<const std::uint8_t> data) override;
  bool amo_allowed(Addr paddr) const override {
    return amo_lo == amo_hi || (paddr >= amo_lo && paddr < amo_hi);
  }
  std::uint64_t cycle() const override { return cycle_; }
  std::uint64_t time() const override { return time_; }

  std::vector<std::uint8_t>& memory() { return mem_; }
  const std::vector<std::uint8_t>& memory() const { return mem_; }
  Addr base() const { return base_; }

  std::uint64_t cycle_ = 0;
  std::uint64_t time_ = 0;
  Addr amo_lo = 0, amo_hi = 0;

 private:
  Addr base_;
  std::vector<std::uint8_t> mem_;
};

/// The core and the reference hart side by side over identical memories.
class Lockstep {
 public:
  static constexpr Addr kBase = 0x8000'0000;
  static constexpr std::size_t kSize = 0x10000;

  Lockstep();

  rv64::Core& core() { return core_; }
  ref::RefHart& ref() { return ref_; }
  FlatBus& bus() { return bus_; }

  void reset(Addr pc);
  void load(Addr addr, std::span<const std::uint8_t> bytes);
  void load_words(Addr addr, std::span<const std::uint32_t> words);
  void set_x(unsigned r, std::uint64_t v);
  void set_f(unsigned r, std::uint64_t v);
  void set_pc(Addr pc);
  void set_priv(rv64::Priv p);
  void set_csr(unsigned num, std::uint64_t v);
  void set_irq(unsigned cause, bool level);
  void set_amo_range(Addr lo, Addr hi);

  /// Steps both; returns an empty string when event and state agree.
  std::string step();
  /// Steps up to n times, stopping at the first divergence.
  std::string run(unsigned n);
  /// Full state comparison only.
  std::string compare() const;

  rv64::StepResult last_core;
  ref::Event last_ref;

 private:
  FlatBus bus_;
  rv64::Core core_;
  ref::RefHart ref_;
};

/// Every CSR number both implementations expose.
std::span<const unsigned> compared_csrs();

}  // namespace basilisk::testing
