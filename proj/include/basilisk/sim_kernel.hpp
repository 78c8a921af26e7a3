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
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "basilisk/types.hpp"

namespace basilisk {

inline constexpr std::uint64_t kNominalFreqHz = 62'000'000;
inline constexpr Cycle kDefaultQuantum = 1024;

struct SimClock {
  Cycle cycle = 0;
  std::uint64_t freq_hz = kNominalFreqHz;
  /// Metadata only; recorded in reports.
  double voltage = 1.2;

  double seconds() const { return static_cast<double>(cycle) / static_cast<double>(freq_hz); }
};

/// Silicon operating points usable as clock presets.
struct OperatingPoint {
  const char* name;
  double voltage;
  std::uint64_t freq_hz;
};

inline constexpr OperatingPoint kOperatingPoints[] = {
    {"efficient", 0.88, 10'000'000},
    {"nominal", 1.2, 62'000'000},
    {"peak", 1.64, 102'000'000},
};

std::optional<OperatingPoint> find_operating_point(const std::string& name);

struct CounterSet {
  std::uint64_t instret = 0;
  std::uint64_t cycles = 0;
  std::uint64_t llc_hits = 0;
  std::uint64_t llc_misses = 0;
  std::uint64_t l1i_hits = 0;
  std::uint64_t l1i_misses = 0;
  std::uint64_t l1d_hits = 0;
  std::uint64_t l1d_misses = 0;
  std::uint64_t dram_bytes_rd = 0;
  std::uint64_t dram_bytes_wr = 0;
  std::uint64_t dma_bytes = 0;
  std::uint64_t c2c_bytes_tx = 0;
  std::uint64_t c2c_bytes_rx = 0;
  std::uint64_t fp_ops = 0;
  // Secondary accounting.
  std::uint64_t llc_port_bytes = 0;
  std::uint64_t llc_writebacks = 0;
  std::uint64_t regbus_accesses = 0;
  std::uint64_t dma_irqs = 0;
  std::uint64_t c2c_crc_errors = 0;
  std::uint64_t traps = 0;

  bool operator==(const CounterSet&) const = default;
};

using EventId = std::uint64_t;

/// A queued kernel event. Events fire in (due_cycle, sequence) order.
struct Event {
  Cycle due_cycle = 0;
  std::uint64_t sequence = 0;
  std::function<void()> action;
};

class EventQueue {
 public:
  EventId push(Cycle due, std::function<void()> action);
  bool cancel(EventId id);
  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }
  std::optional<Cycle> next_due() const;
  /// Removes and returns the earliest event if its due cycle is <= now.
  std::optional<Event> pop_due(Cycle now);

 private:
  std::map<std::pair<Cycle, std::uint64_t>, std::function<void()>> events_;
  std::map<EventId, Cycle> index_;
  std::uint64_t next_seq_ = 0;
};

enum class TraceKind : std::uint8_t { core, llc, dram, dma, c2c, irq, uart, vga, sim };

const char* to_string(TraceKind k);
std::optional<TraceKind> parse_trace_kind(const std::string& s);

/// Line-oriented trace writer: `cycle=<n> kind=<k> key=value ...`.
class Tracer {
 public:
  void set_sink(std::ostream* sink) { sink_ = sink; }
  void enable(TraceKind k) { mask_ |= bit(k); }
  void enable_all() { mask_ = ~0u; }
  bool enabled(TraceKind k) const { return sink_ != nullptr && (mask_ & bit(k)) != 0; }

  template <typename... Args>
  void emit(Cycle cycle, TraceKind k, fmt::format_string<Args...> f, Args&&... args) {
    if (!enabled(k)) return;
    write_line(cycle, k, fmt::format(f, std::forward<Args>(args)...));
  }

 private:
  static std::uint32_t bit(TraceKind k) { return 1u << static_cast<unsigned>(k); }
  void write_line(Cycle cycle, TraceKind k, const std::string& body);

  std::ostream* sink_ = nullptr;
  std::uint32_t mask_ = 0;
};

enum class StopReason : std::uint8_t { exit, trap, breakpoint, max_cycles, idle };

const char* to_string(StopReason r);

struct StopConditions {
  /// Stop when a trap is taken towards a handler address of zero.
  bool unhandled_trap = true;
  /// Stop on every trap.
  bool any_trap = false;
  /// Treat `ebreak` as a breakpoint instead of a trap.
  bool ebreak = true;
  std::set<Addr> breakpoints;
};

struct RunResult {
  StopReason reason = StopReason::idle;
  int exit_code = 0;
  Cycle cycle = 0;
  CounterSet counters;
  std::uint64_t trap_cause = 0;
  std::uint64_t trap_tval = 0;
  Addr pc = 0;
};

/// Outcome of one hart tick as seen by the kernel.
struct HartTick {
  enum class Kind : std::uint8_t { ran, waiting, stop } kind = Kind::ran;
  Cycle cycles = 1;
  StopReason reason = StopReason::trap;
};

/// The hart side of the run loop.
class Steppable {
 public:
  virtual ~Steppable() = default;
  virtual HartTick tick(const StopConditions& stop) = 0;
  /// Earliest cycle at which a waiting hart could become runnable on its own
  /// (armed timer), if any.
  virtual std::optional<Cycle> wake_cycle() const = 0;
  virtual void fill_result(RunResult& result) const = 0;
};

class Kernel {
 public:
  Kernel() = default;
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  Cycle now() const { return clock_.cycle; }
  SimClock& clock() { return clock_; }
  const SimClock& clock() const { return clock_; }
  CounterSet& counters() { return counters_; }
  const CounterSet& counters() const { return counters_; }
  Tracer& tracer() { return tracer_; }

  /// Throws ScheduleError when due < now().
  EventId schedule(Cycle due, std::function<void()> action);
  EventId schedule_in(Cycle delay, std::function<void()> action) {
    return schedule(now() + delay, std::move(action));
  }
  bool cancel(EventId id) { return events_.cancel(id); }
  const EventQueue& events() const { return events_; }

  void set_quantum(Cycle q);
  Cycle quantum() const { return quantum_; }
  Cycle next_boundary() const { return next_boundary_; }
  /// Boundary hooks run once per crossed quantum boundary, in registration
  /// order. Returning true means the hook may still inject external input.
  void add_boundary_hook(std::function<bool()> hook) { hooks_.push_back(std::move(hook)); }

  /// Ends the current run after the in-flight instruction.
  void request_stop(StopReason reason, int code = 0);
  bool stop_requested() const { return stop_.has_value(); }

  /// Advances until `max_cycle` (absolute) or a stop condition.
  RunResult run(Steppable& hart, Cycle max_cycle, const StopConditions& stop = {});

  /// Fires every event due at or before now().
  void fire_due();

 private:
  void cross_boundaries();

  SimClock clock_;
  CounterSet counters_;
  Tracer tracer_;
  EventQueue events_;
  Cycle quantum_ = kDefaultQuantum;
  Cycle next_boundary_ = kDefaultQuantum;
  std::vector<std::function<bool()>> hooks_;
  bool hooks_live_ = false;
  std::optional<std::pair<StopReason, int>> stop_;
};

struct PerfReport {
  std::uint64_t cycles = 0;
  std::uint64_t instret = 0;
  std::uint64_t freq_hz = 0;
  double voltage = 0.0;
  double ipc = 0.0;
  double seconds = 0.0;
  double dram_rd_bps = 0.0;
  double dram_wr_bps = 0.0;
  double llc_port_bps = 0.0;
  double dma_bps = 0.0;
  double c2c_tx_bps = 0.0;
  double c2c_rx_bps = 0.0;
  double mflops = 0.0;
  CounterSet counters;

  std::string to_text() const;
};

PerfReport report(const CounterSet& counters, const SimClock& clock);

}  // namespace basilisk
