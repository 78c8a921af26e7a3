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
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "basilisk/c2c.hpp"
#include "basilisk/cache.hpp"
#include "basilisk/config.hpp"
#include "basilisk/dma.hpp"
#include "basilisk/hyperram.hpp"
#include "basilisk/interconnect.hpp"
#include "basilisk/peripherals.hpp"
#include "basilisk/rv64/core.hpp"
#include "basilisk/sim_kernel.hpp"

namespace basilisk {

/// Flat memory target: boot ROM (read-only on the bus) or plain RAM.
class Memory final : public Target {
 public:
  Memory(Addr base, Addr size, bool writable, Cycle latency = 1)
      : base_(base), bytes_(size, 0), writable_(writable), latency_(latency) {}

  Response access(const Transaction& txn) override;
  std::span<std::uint8_t> bytes() { return bytes_; }
  Addr base() const { return base_; }

 private:
  Addr base_;
  std::vector<std::uint8_t> bytes_;
  bool writable_;
  Cycle latency_;
};

/// The assembled SoC: one hart, L1I/L1D, crossbar, LLC with scratchpad
/// ways, HyperRAM, DMA, C2C endpoint and the peripheral set.
///
/// The core sees memory through L1 caches for the DRAM region and through
/// the crossbar for everything else. L1 hits are pipelined and cost no
/// extra cycles; every other access adds its service time to the
/// instruction.
class System final : public rv64::CoreBus, public Steppable {
 public:
  explicit System(const SimConfig& cfg);
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  const SimConfig& config() const { return cfg_; }
  Kernel& kernel() { return kernel_; }
  const AddressMap& map() const { return map_; }
  rv64::Core& core() { return core_; }
  Crossbar& xbar() { return xbar_; }
  Cache& llc() { return llc_; }
  Cache& l1i() { return l1i_; }
  Cache& l1d() { return l1d_; }
  HyperRam& dram() { return dram_; }
  Memory& bootrom() { return bootrom_; }
  DmaEngine& dma() { return dma_; }
  Uart& uart() { return uart_; }
  Gpio& gpio() { return gpio_; }
  Vga& vga() { return vga_; }
  Clint& clint() { return clint_; }
  Plic& plic() { return plic_; }
  c2c::Endpoint& c2c() { return c2c_; }

  void reset_core(Addr pc) { core_.reset(pc); }
  /// Runs for at most `max_cycles` more cycles.
  RunResult run(Cycle max_cycles, const StopConditions& stop = {});

  // Host debug access: byte-exact, no timing, coherent with every cache
  // level. Register regions are reached with aligned 4-byte accesses.
  Resp debug_read(Addr addr, std::span<std::uint8_t> out);
  Resp debug_write(Addr addr, std::span<const std::uint8_t> in);
  void halt() { halted_ = true; }
  void resume() { halted_ = false; }
  bool halted() const { return halted_; }

  /// Backdoor image load; throws LoadError when the range is not backed by
  /// memory (boot ROM, scratchpad or DRAM).
  void load(Addr addr, std::span<const std::uint8_t> bytes);
  /// Memory-backed range check used by the loaders.
  bool is_memory(Addr addr, std::uint64_t len) const;

  // CoreBus
  rv64::BusResult read(Addr paddr, std::span<std::uint8_t> data, rv64::MemKind kind) override;
  rv64::BusResult write(Addr paddr, std::span<const std::uint8_t> data) override;
  bool amo_allowed(Addr paddr) const override;
  Cycle fence_data() override;
  Cycle fence_instr() override;
  std::uint64_t cycle() const override { return kernel_.now(); }
  std::uint64_t time() const override { return clint_.mtime(); }

  // Steppable
  HartTick tick(const StopConditions& stop) override;
  std::optional<Cycle> wake_cycle() const override;
  void fill_result(RunResult& result) const override;

 private:
  bool cached(Addr paddr, std::uint64_t len) const;
  Resp debug_memory(Addr addr, std::span<std::uint8_t> buf, bool write);

  SimConfig cfg_;
  Kernel kernel_;
  AddressMap map_;
  HyperRam dram_;
  Crossbar xbar_;
  Regbus regbus_;
  Cache llc_;
  Cache l1i_;
  Cache l1d_;
  Memory bootrom_;
  ScratchpadTarget spm_;
  LlcConfigRegs llc_cfg_;
  DmaEngine dma_;
  RegisterTarget dma_port_;
  Clint clint_;
  RegisterTarget clint_port_;
  Plic plic_;
  RegisterTarget plic_port_;
  Uart uart_;
  Gpio gpio_;
  Vga vga_;
  c2c::Endpoint c2c_;
  SimExit sim_exit_;
  StubDevice stub_;
  rv64::Core core_;

  bool halted_ = false;
  std::optional<Addr> skip_breakpoint_;
  std::uint64_t last_trap_cause_ = 0;
  std::uint64_t last_trap_tval_ = 0;
};

}  // namespace basilisk
