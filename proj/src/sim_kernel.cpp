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

#include "basilisk/sim_kernel.hpp"

#include <algorithm>
#include <array>

namespace basilisk {

const char* to_string(Resp r) {
  switch (r) {
    case Resp::okay: return "okay";
    case Resp::slverr: return "slverr";
    case Resp::decerr: return "decerr";
    case Resp::pending: return "pending";
  }
  return "?";
}

const char* to_string(MasterId m) {
  switch (m) {
    case MasterId::core: return "core";
    case MasterId::dma: return "dma";
    case MasterId::c2c: return "c2c";
    case MasterId::vga: return "vga";
    case MasterId::debug: return "debug";
  }
  return "?";
}

std::optional<OperatingPoint> find_operating_point(const std::string& name) {
  for (const auto& op : kOperatingPoints) {
    if (name == op.name) return op;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

EventId EventQueue::push(Cycle due, std::function<void()> action) {
  const std::uint64_t seq = next_seq_++;
  events_.emplace(std::make_pair(due, seq), std::move(action));
  index_.emplace(seq, due);
  return seq;
}

bool EventQueue::cancel(EventId id) {
  auto it = index_.find(id);
  if (it == index_.end()) return false;
  events_.erase({it->second, id});
  index_.erase(it);
  return true;
}

std::optional<Cycle> EventQueue::next_due() const {
  if (events_.empty()) return std::nullopt;
  return events_.begin()->first.first;
}

std::optional<Event> EventQueue::pop_due(Cycle now) {
  if (events_.empty()) return std::nullopt;
  auto it = events_.begin();
  if (it->first.first > now) return std::nullopt;
  Event ev{it->first.first, it->first.second, std::move(it->second)};
  index_.erase(ev.sequence);
  events_.erase(it);
  return ev;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::array<const char*, 9> kTraceNames = {"core", "llc", "dram", "dma", "c2c",
                                                    "irq",  "uart", "vga", "sim"};
}

const char* to_string(TraceKind k) { return kTraceNames[static_cast<std::size_t>(k)]; }

std::optional<TraceKind> parse_trace_kind(const std::string& s) {
  for (std::size_t i = 0; i < kTraceNames.size(); ++i) {
    if (s == kTraceNames[i]) return static_cast<TraceKind>(i);
  }
  return std::nullopt;
}

void Tracer::write_line(Cycle cycle, TraceKind k, const std::string& body) {
  *sink_ << "cycle=" << cycle << " kind=" << to_string(k);
  if (!body.empty()) *sink_ << ' ' << body;
  *sink_ << '\n';
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::exit: return "exit";
    case StopReason::trap: return "trap";
    case StopReason::breakpoint: return "breakpoint";
    case StopReason::max_cycles: return "max_cycles";
    case StopReason::idle: return "idle";
  }
  return "?";
}

// ---------------------------------------------------------------------------

EventId Kernel::schedule(Cycle due, std::function<void()> action) {
  if (due < now()) {
    throw ScheduleError(fmt::format("event scheduled in the past (due={}, now={})", due, now()));
  }
  return events_.push(due, std::move(action));
}

void Kernel::set_quantum(Cycle q) {
  if (q == 0) throw ConfigError("quantum must be positive");
  quantum_ = q;
  next_boundary_ = (now() / q + 1) * q;
}

void Kernel::request_stop(StopReason reason, int code) {
  if (!stop_) stop_ = std::make_pair(reason, code);
}

void Kernel::fire_due() {
  while (auto ev = events_.pop_due(now())) {
    ev->action();
  }
}

void Kernel::cross_boundaries() {
  while (now() >= next_boundary_) {
    bool live = false;
    for (auto& hook : hooks_) live = hook() || live;
    hooks_live_ = live;
    next_boundary_ += quantum_;
  }
}

RunResult Kernel::run(Steppable& hart, Cycle max_cycle, const StopConditions& stop) {
  RunResult result;
  stop_.reset();
  // Boundary hooks are considered live until they report otherwise.
  hooks_live_ = !hooks_.empty();

  for (;;) {
    cross_boundaries();
    fire_due();
    if (stop_) break;
    if (now() >= max_cycle) {
      request_stop(StopReason::max_cycles);
      break;
    }

    const HartTick t = hart.tick(stop);
    if (stop_) {
      clock_.cycle += t.kind == HartTick::Kind::ran ? t.cycles : 0;
      break;
    }
    if (t.kind == HartTick::Kind::ran) {
      clock_.cycle += t.cycles;
      continue;
    }
    if (t.kind == HartTick::Kind::stop) {
      request_stop(t.reason);
      break;
    }

    // Hart is waiting: skip ahead to the next thing that can change state.
    std::optional<Cycle> target = events_.next_due();
    if (auto w = hart.wake_cycle()) target = target ? std::min(*target, *w) : *w;
    if (hooks_live_) target = target ? std::min(*target, next_boundary_) : next_boundary_;
    if (!target) {
      request_stop(StopReason::idle);
      break;
    }
    Cycle next = std::min(*target, max_cycle);
    clock_.cycle = std::max(next, now() + 1);
  }

  counters_.cycles = now();
  result.reason = stop_->first;
  result.exit_code = stop_->second;
  result.cycle = now();
  hart.fill_result(result);
  result.counters = counters_;
  return result;
}

// ---------------------------------------------------------------------------

PerfReport report(const CounterSet& counters, const SimClock& clock) {
  PerfReport r;
  r.cycles = clock.cycle;
  r.instret = counters.instret;
  r.freq_hz = clock.freq_hz;
  r.voltage = clock.voltage;
  r.counters = counters;
  if (clock.cycle == 0 || clock.freq_hz == 0) return r;
  r.seconds = clock.seconds();
  r.ipc = static_cast<double>(counters.instret) / static_cast<double>(clock.cycle);
  auto rate = [&](std::uint64_t v) { return static_cast<double>(v) / r.seconds; };
  r.dram_rd_bps = rate(counters.dram_bytes_rd);
  r.dram_wr_bps = rate(counters.dram_bytes_wr);
  r.llc_port_bps = rate(counters.llc_port_bytes);
  r.dma_bps = rate(counters.dma_bytes);
  r.c2c_tx_bps = rate(counters.c2c_bytes_tx);
  r.c2c_rx_bps = rate(counters.c2c_bytes_rx);
  r.mflops = rate(counters.fp_ops) / 1e6;
  return r;
}

std::string PerfReport::to_text() const {
  const auto& c = counters;
  std::string s;
  s += fmt::format("perf.cycles        = {}\n", cycles);
  s += fmt::format("perf.instret       = {}\n", instret);
  s += fmt::format("perf.ipc           = {:.4f}\n", ipc);
  s += fmt::format("perf.freq_hz       = {}\n", freq_hz);
  s += fmt::format("perf.voltage       = {:.2f}\n", voltage);
  s += fmt::format("perf.seconds       = {:.9f}\n", seconds);
  s += fmt::format("perf.mflops        = {:.4f}\n", mflops);
  s += fmt::format("perf.fp_ops        = {}\n", c.fp_ops);
  s += fmt::format("perf.dram_rd_MBps  = {:.3f}\n", dram_rd_bps / 1e6);
  s += fmt::format("perf.dram_wr_MBps  = {:.3f}\n", dram_wr_bps / 1e6);
  s += fmt::format("perf.llc_port_MBps = {:.3f}\n", llc_port_bps / 1e6);
  s += fmt::format("perf.dma_MBps      = {:.3f}\n", dma_bps / 1e6);
  s += fmt::format("perf.c2c_tx_Mbps   = {:.3f}\n", c2c_tx_bps * 8 / 1e6);
  s += fmt::format("perf.c2c_rx_Mbps   = {:.3f}\n", c2c_rx_bps * 8 / 1e6);
  s += fmt::format("perf.l1i           = {} hits / {} misses\n", c.l1i_hits, c.l1i_misses);
  s += fmt::format("perf.l1d           = {} hits / {} misses\n", c.l1d_hits, c.l1d_misses);
  s += fmt::format("perf.llc           = {} hits / {} misses / {} writebacks\n", c.llc_hits,
                   c.llc_misses, c.llc_writebacks);
  s += fmt::format("perf.dram_bytes    = {} rd / {} wr\n", c.dram_bytes_rd, c.dram_bytes_wr);
  s += fmt::format("perf.dma_bytes     = {} ({} irqs)\n", c.dma_bytes, c.dma_irqs);
  s += fmt::format("perf.c2c_bytes     = {} tx / {} rx ({} crc errors)\n", c.c2c_bytes_tx,
                   c.c2c_bytes_rx, c.c2c_crc_errors);
  return s;
}

}  // namespace basilisk
