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

#include "basilisk/system.hpp"

#include <algorithm>
#include <cstring>

#include <fmt/format.h>

namespace basilisk {

using rv64::BusResult;
using rv64::MemKind;

Response Memory::access(const Transaction& txn) {
  const std::uint64_t len = txn.bytes();
  if (txn.addr < base_ || txn.addr - base_ + len > bytes_.size()) return {Resp::decerr, 1};
  std::uint8_t* p = bytes_.data() + (txn.addr - base_);
  if (txn.kind == TxnKind::read) {
    std::memcpy(txn.data.data(), p, len);
  } else {
    if (!writable_) return {Resp::slverr, latency_};
    std::memcpy(p, txn.data.data(), len);
  }
  return {Resp::okay, latency_};
}

System::System(const SimConfig& cfg)
    : cfg_([&] {
        cfg.validate();
        return cfg;
      }()),
      map_(cfg_.address_map()),
      dram_(kernel_, cfg_.map.dram_base, cfg_.dram),
      xbar_(kernel_, map_, cfg_.xbar_port_bytes),
      regbus_(kernel_, map_),
      llc_("llc", cfg_.llc, dram_, kernel_, {&CounterSet::llc_hits, &CounterSet::llc_misses}),
      l1i_("l1i", cfg_.l1i, xbar_, kernel_, {&CounterSet::l1i_hits, &CounterSet::l1i_misses}),
      l1d_("l1d", cfg_.l1d, xbar_, kernel_, {&CounterSet::l1d_hits, &CounterSet::l1d_misses}),
      bootrom_(cfg_.map.bootrom.base, cfg_.map.bootrom.size, false),
      spm_(llc_, cfg_.map.spm_base),
      llc_cfg_(llc_, kernel_),
      dma_(kernel_, xbar_),
      dma_port_(dma_, cfg_.map.dma.base),
      clint_(kernel_),
      clint_port_(clint_, cfg_.map.clint.base),
      plic_(kernel_),
      plic_port_(plic_, cfg_.map.plic.base),
      uart_(kernel_, cfg_.uart_baud),
      vga_(kernel_,
           [this](Addr a, std::span<std::uint8_t> out) { return debug_read(a, out) == Resp::okay; },
           &gpio_),
      c2c_(kernel_, xbar_, cfg_.map.c2c_window.base, cfg_.map.c2c_window.size,
           cfg_.c2c_bits_per_cycle),
      sim_exit_(kernel_),
      core_(*this) {
  kernel_.clock().freq_hz = cfg_.freq_hz;
  kernel_.clock().voltage = cfg_.voltage;
  kernel_.set_quantum(cfg_.quantum);

  xbar_.attach(target::bootrom, &bootrom_);
  xbar_.attach(target::dram, &llc_);
  xbar_.mark_llc_port(target::dram);
  xbar_.attach(target::spm, &spm_);
  xbar_.mark_llc_port(target::spm);
  xbar_.attach(target::dma, &dma_port_);
  xbar_.attach(target::clint, &clint_port_);
  xbar_.attach(target::plic, &plic_port_);
  xbar_.attach(target::c2c_window, &c2c_);
  xbar_.attach_regbus(&regbus_);

  regbus_.attach(target::llc_cfg, &llc_cfg_);
  regbus_.attach(target::uart, &uart_);
  regbus_.attach(target::i2c, &stub_);
  regbus_.attach(target::qspi, &stub_);
  regbus_.attach(target::gpio, &gpio_);
  regbus_.attach(target::vga, &vga_);
  regbus_.attach(target::c2c_cfg, &c2c_);
  regbus_.attach(target::usb, &stub_);
  regbus_.attach(target::sim_exit, &sim_exit_);

  c2c_.set_peer_base(cfg_.c2c_peer_base);

  plic_.set_context_line(0, [this](bool l) { core_.set_irq_line(rv64::cause::kMei, l); });
  plic_.set_context_line(1, [this](bool l) { core_.set_irq_line(rv64::cause::kSei, l); });
  clint_.set_msip_line([this](bool l) { core_.set_irq_line(rv64::cause::kMsi, l); });
  uart_.set_irq([this](bool l) { plic_.set_level(irq::kUart, l); });
  gpio_.set_irq([this](bool l) { plic_.set_level(irq::kGpio, l); });
  dma_.set_irq([this] { plic_.pulse(irq::kDma); });
  c2c_.set_irq([this] { plic_.pulse(irq::kC2c); });

  if (!cfg_.frame_dump_dir.empty()) vga_.set_dump_dir(cfg_.frame_dump_dir);
  for (std::size_t pos = 0; pos < cfg_.trace.size();) {
    const auto comma = std::min(cfg_.trace.find(',', pos), cfg_.trace.size());
    const std::string name = cfg_.trace.substr(pos, comma - pos);
    pos = comma + 1;
    if (name.empty()) continue;
    if (name == "all") {
      kernel_.tracer().enable_all();
    } else if (auto k = parse_trace_kind(name)) {
      kernel_.tracer().enable(*k);
    } else {
      throw ConfigError(fmt::format("trace.filter: unknown subsystem '{}'", name));
    }
  }
  core_.reset(cfg_.boot_pc);
}

RunResult System::run(Cycle max_cycles, const StopConditions& stop) {
  return kernel_.run(*this, kernel_.now() + max_cycles, stop);
}

// ---------------------------------------------------------------------------
// Core memory path

bool System::cached(Addr paddr, std::uint64_t len) const {
  const Addr base = cfg_.map.dram_base;
  return paddr >= base && paddr - base + len <= cfg_.dram.size();
}

BusResult System::read(Addr paddr, std::span<std::uint8_t> data, MemKind kind) {
  if (!cached(paddr, data.size())) {
    const Response r = xbar_.submit(Transaction::read(paddr, data, MasterId::core));
    return {r.resp, r.cycles};
  }
  Cache& c = kind == MemKind::fetch ? l1i_ : l1d_;
  const unsigned line = c.config().line_bytes;
  Cycle cycles = 0;
  std::size_t done = 0;
  while (done < data.size()) {
    const Addr a = paddr + done;
    const std::size_t part = std::min<std::size_t>(data.size() - done, line - a % line);
    const LookupResult lr = c.lookup_access(a, AccessKind::read, data.subspan(done, part));
    if (lr.resp != Resp::okay) return {lr.resp, cycles};
    cycles += lr.stall_cycles - std::min(lr.stall_cycles, c.config().hit_latency);
    done += part;
  }
  return {Resp::okay, cycles};
}

BusResult System::write(Addr paddr, std::span<const std::uint8_t> data) {
  std::uint8_t buf[8];
  if (data.size() > sizeof buf) return {Resp::slverr, 0};
  std::copy(data.begin(), data.end(), buf);
  const std::span<std::uint8_t> view(buf, data.size());
  if (!cached(paddr, data.size())) {
    const Response r = xbar_.submit(Transaction::write(paddr, view, MasterId::core));
    return {r.resp, r.cycles};
  }
  const LookupResult lr = l1d_.lookup_access(paddr, AccessKind::write, view);
  return {lr.resp, lr.stall_cycles - std::min(lr.stall_cycles, l1d_.config().hit_latency)};
}

bool System::amo_allowed(Addr paddr) const {
  const Region* r = map_.route(paddr);
  return r != nullptr && (r->target_id == target::dram || r->target_id == target::spm);
}

Cycle System::fence_data() { return l1d_.flush(); }

Cycle System::fence_instr() {
  const Cycle c = l1d_.flush();
  l1i_.invalidate_all();
  return c;
}

// ---------------------------------------------------------------------------
// Run loop

HartTick System::tick(const StopConditions& stop) {
  if (halted_) return {HartTick::Kind::waiting, 0, StopReason::idle};
  const Addr pc = core_.state().pc;
  if (stop.breakpoints.contains(pc) && skip_breakpoint_ != pc) {
    skip_breakpoint_ = pc;
    return {HartTick::Kind::stop, 0, StopReason::breakpoint};
  }
  core_.set_ebreak_halts(stop.ebreak);
  core_.set_irq_line(rv64::cause::kMti, clint_.mtip());

  const rv64::StepResult r = core_.step();
  auto& counters = kernel_.counters();
  counters.instret = core_.state().instret;
  counters.fp_ops = core_.fp_ops();
  if (r.kind != rv64::StepResult::Kind::waiting) skip_breakpoint_.reset();

  switch (r.kind) {
    case rv64::StepResult::Kind::retired:
      return {HartTick::Kind::ran, 1 + r.stall, StopReason::idle};
    case rv64::StepResult::Kind::waiting:
      return {HartTick::Kind::waiting, 0, StopReason::idle};
    case rv64::StepResult::Kind::breakpoint:
      return {HartTick::Kind::stop, 0, StopReason::breakpoint};
    case rv64::StepResult::Kind::trapped: break;
  }
  ++counters.traps;
  last_trap_cause_ = r.cause;
  last_trap_tval_ = r.tval;
  kernel_.tracer().emit(kernel_.now(), TraceKind::core, "trap cause=0x{:x} tval=0x{:x} pc=0x{:x}",
                        r.cause, r.tval, r.pc);
  if (stop.any_trap || (stop.unhandled_trap && core_.state().pc == 0)) {
    return {HartTick::Kind::stop, 1 + r.stall, StopReason::trap};
  }
  return {HartTick::Kind::ran, 1 + r.stall, StopReason::idle};
}

std::optional<Cycle> System::wake_cycle() const {
  if (halted_ || !core_.state().wfi) return std::nullopt;
  return clint_.mtip_cycle();
}

void System::fill_result(RunResult& result) const {
  result.pc = core_.state().pc;
  result.trap_cause = last_trap_cause_;
  result.trap_tval = last_trap_tval_;
}

// ---------------------------------------------------------------------------
// Debug access

Resp System::debug_memory(Addr addr, std::span<std::uint8_t> buf, bool write) {
  const Region* r = map_.route(addr);
  if (r == nullptr || buf.size() > r->end() - addr) return Resp::decerr;
  switch (r->target_id) {
    case target::bootrom: {
      std::uint8_t* p = bootrom_.bytes().data() + (addr - r->base);
      if (write) {
        std::memcpy(p, buf.data(), buf.size());
      } else {
        std::memcpy(buf.data(), p, buf.size());
      }
      return Resp::okay;
    }
    case target::spm:
      return llc_.spm_access(addr - r->base, write ? AccessKind::write : AccessKind::read, buf);
    case target::dram: {
      const Addr off = addr - r->base;
      if (write) {
        dram_.load_image(off, buf);
      } else {
        const auto bytes = dram_.dump(off, buf.size());
        std::copy(bytes.begin(), bytes.end(), buf.begin());
      }
      // Resident copies: LLC, then L1D (newest data wins on reads).
      Cache* levels[] = {&llc_, &l1d_, &l1i_};
      for (Cache* c : levels) {
        const unsigned line = c->config().line_bytes;
        for (std::size_t done = 0; done < buf.size();) {
          const Addr a = addr + done;
          const std::size_t part = std::min<std::size_t>(buf.size() - done, line - a % line);
          if (write) {
            c->poke(a, buf.subspan(done, part));
          } else if (c != &l1i_) {
            c->peek(a, buf.subspan(done, part));
          }
          done += part;
        }
      }
      return Resp::okay;
    }
    default: break;
  }
  // Register blocks: aligned 32-bit accesses through the crossbar.
  if (addr % 4 != 0 || buf.size() % 4 != 0) return Resp::slverr;
  for (std::size_t i = 0; i < buf.size(); i += 4) {
    auto word = buf.subspan(i, 4);
    const Transaction t = write ? Transaction::write(addr + i, word, MasterId::debug)
                                : Transaction::read(addr + i, word, MasterId::debug);
    const Response resp = xbar_.submit(t);
    if (resp.resp == Resp::pending) return Resp::slverr;
    if (resp.resp != Resp::okay) return resp.resp;
  }
  return Resp::okay;
}

Resp System::debug_read(Addr addr, std::span<std::uint8_t> out) {
  return debug_memory(addr, out, false);
}

Resp System::debug_write(Addr addr, std::span<const std::uint8_t> in) {
  std::vector<std::uint8_t> copy(in.begin(), in.end());
  return debug_memory(addr, copy, true);
}

bool System::is_memory(Addr addr, std::uint64_t len) const {
  const Region* r = map_.route(addr);
  if (r == nullptr || len > r->end() - addr) return false;
  return r->target_id == target::bootrom || r->target_id == target::spm ||
         r->target_id == target::dram;
}

void System::load(Addr addr, std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return;
  if (!is_memory(addr, bytes.size())) {
    throw LoadError(fmt::format("range 0x{:x}+0x{:x} is not backed by memory", addr, bytes.size()));
  }
  if (debug_write(addr, bytes) != Resp::okay) {
    throw LoadError(fmt::format("range 0x{:x}+0x{:x} is not writable (scratchpad way not enabled?)",
                                addr, bytes.size()));
  }
}

}  // namespace basilisk
