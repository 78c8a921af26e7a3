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

// Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Each check drives the real models; nothing is short-circuited.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "basilisk/c2c.hpp"
#include "basilisk/hyperram.hpp"
#include "basilisk/mini_asm.hpp"
#include "basilisk/system.hpp"
#include "cache_property.hpp"
#include "dma_property.hpp"

namespace {

using namespace basilisk;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool within(double value, double target, double tol) { return std::fabs(value - target) <= tol * target; }

// --- GEMM ------------------------------------------------------------------

constexpr unsigned kN = 48;
constexpr Addr kA = 0x8010'0000;
constexpr Addr kB = kA + kN * kN * 8;
constexpr Addr kC = kB + kN * kN * 8;

struct GemmRun {
  RunResult result;
  std::vector<std::uint8_t> c;
  std::string trace;
  double seconds = 0;
};

std::vector<double> gemm_operand(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> m(kN * kN);
  for (double& v : m) v = d(rng);
  return m;
}

GemmRun run_gemm(bool trace) {
  GemmRun g;
  System sys{SimConfig{}};
  std::ostringstream os;
  if (trace) {
    sys.kernel().tracer().set_sink(&os);
    sys.kernel().tracer().enable_all();
  }
  const auto a = gemm_operand(1), b = gemm_operand(2);
  sys.load(kA, {reinterpret_cast<const std::uint8_t*>(a.data()), a.size() * 8});
  sys.load(kB, {reinterpret_cast<const std::uint8_t*>(b.data()), b.size() * 8});
  const auto prog = masm::assemble(read_text(std::string(BASILISK_PROGRAMS_DIR) + "/gemm48.s"), 0x8000'0000);
  sys.load(0x8000'0000, prog.image);
  sys.reset_core(0x8000'0000);
  const auto t0 = std::chrono::steady_clock::now();
  g.result = sys.run(4'000'000'000);
  g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g.c.resize(kN * kN * 8);
  sys.debug_read(kC, g.c);
  g.trace = os.str();
  return g;
}

Verdict gemm() {
  const GemmRun g = run_gemm(false);
  const auto a = gemm_operand(1), b = gemm_operand(2);
  std::vector<double> want(kN * kN);
  for (unsigned i = 0; i < kN; ++i) {
    for (unsigned j = 0; j < kN; ++j) {
      double acc = 0.0;
      for (unsigned k = 0; k < kN; ++k) acc = std::fma(a[i * kN + k], b[k * kN + j], acc);
      want[i * kN + j] = acc;
    }
  }
  const bool exact = std::memcmp(want.data(), g.c.data(), g.c.size()) == 0;
  const std::uint64_t ops = g.result.counters.fp_ops;
  const bool ok = g.result.reason == StopReason::exit && g.result.exit_code == 0 && exact &&
                  ops == 2ull * kN * kN * kN && g.seconds < 60.0;
  return {ok, fmt::format("bit-exact={} fp_ops={} cycles={} wall={:.2f}s", exact, ops, g.result.cycle,
                          g.seconds)};
}

// --- DRAM ------------------------------------------------------------------

Verdict dram() {
  const DramConfig cfg;
  const double f = 62e6;
  const double closed = 4096.0 / static_cast<double>(cfg.latency_cycles + 4096 / cfg.bytes_per_cycle) * f;
  // Stream 1 MiB in 4 KiB requests, split into legal bursts, back to back.
  Kernel k;
  HyperRam ram(k, 0x8000'0000, cfg);
  std::vector<std::uint8_t> buf(4096);
  Cycle busy = 0;
  for (Addr off = 0; off < (1u << 20); off += 4096) {
    for (const BurstSpan& b : split_bursts(0x8000'0000 + off, 4096)) {
      Transaction t = Transaction::read(b.addr, std::span(buf).first(b.bytes()), MasterId::dma);
      t.len_beats = b.len_beats;
      t.beat_bytes = b.beat_bytes;
      busy += ram.access(t).cycles;
    }
  }
  const double measured = static_cast<double>(k.counters().dram_bytes_rd) / static_cast<double>(busy) * f;
  const bool ok = within(closed, 124e6, 0.05) && within(measured, 124e6, 0.05);
  return {ok, fmt::format("closed-form={:.1f} MB/s measured={:.1f} MB/s target=124 MB/s", closed / 1e6,
                          measured / 1e6)};
}

// --- Crossbar LLC port -------------------------------------------------------

Verdict crossbar() {
  System sys{SimConfig{}};
  sys.llc().configure_spm(0xf);
  std::vector<std::uint8_t> buf(2048);
  Cycle cycles = 0;
  const std::uint64_t before = sys.kernel().counters().llc_port_bytes;
  for (Addr off = 0; off < 64 * 1024; off += 2048) {
    Transaction t = Transaction::read(sys.config().map.spm_base + off, buf, MasterId::dma);
    t.len_beats = 256;
    t.beat_bytes = 8;
    const Response r = sys.xbar().submit(t);
    if (r.resp != Resp::okay) return {false, "scratchpad burst failed"};
    cycles += r.cycles;
  }
  const double bytes = static_cast<double>(sys.kernel().counters().llc_port_bytes - before);
  const double bps = bytes / static_cast<double>(cycles) * 62e6;
  const double peak = sys.xbar().port_bytes_per_cycle() * 62e6;
  const bool ok = within(peak, 496e6, 0.02) && within(bps, 496e6, 0.02) &&
                  within(bps / 1048576.0, 473.0, 0.02);
  return {ok, fmt::format("port={} B/cycle peak={:.1f} MB/s measured={:.1f} MB/s = {:.1f} MiB/s",
                          sys.xbar().port_bytes_per_cycle(), peak / 1e6, bps / 1e6, bps / 1048576.0)};
}

// --- C2C ---------------------------------------------------------------------

// Issues host-side transactions into the local C2C window as well-formed
// bursts and spins while each one is pending.
class RemoteDriver final : public Steppable {
 public:
  struct Op {
    TxnKind kind;
    Addr addr;
    std::vector<std::uint8_t> data;
    Resp resp = Resp::okay;
  };
  RemoteDriver(Crossbar& xbar, std::vector<Op>& ops) : xbar_(xbar), ops_(ops) {}
  HartTick tick(const StopConditions&) override {
    if (next_ == ops_.size()) return {HartTick::Kind::stop, 0, StopReason::exit};
    Op& op = ops_[next_];
    if (bursts_.empty()) bursts_ = split_bursts(op.addr, op.data.size());
    const BurstSpan& b = bursts_[burst_];
    const auto span = std::span(op.data).subspan(b.addr - op.addr, b.bytes());
    Transaction t = op.kind == TxnKind::read ? Transaction::read(b.addr, span) : Transaction::write(b.addr, span);
    t.len_beats = b.len_beats;
    t.beat_bytes = b.beat_bytes;
    const Response r = xbar_.submit(t);
    if (r.resp == Resp::pending) return {HartTick::Kind::waiting, 0, StopReason::idle};
    if (r.resp != Resp::okay) op.resp = r.resp;
    if (++burst_ == bursts_.size()) {
      bursts_.clear();
      burst_ = 0;
      ++next_;
    }
    return {HartTick::Kind::ran, 1, StopReason::trap};
  }
  std::optional<Cycle> wake_cycle() const override { return std::nullopt; }
  void fill_result(RunResult&) const override {}

 private:
  Crossbar& xbar_;
  std::vector<Op>& ops_;
  std::size_t next_ = 0;
  std::vector<BurstSpan> bursts_;
  std::size_t burst_ = 0;
};

Verdict c2c_link() {
  SimConfig cfg;
  cfg.quantum = 256;
  System near(cfg), far(cfg);
  auto [ta, tb] = c2c::make_pipe_pair();
  std::thread attach([&, t = std::move(tb)]() mutable { far.c2c().attach(std::move(t)); });
  near.c2c().attach(std::move(ta));
  attach.join();

  const Addr window = cfg.map.c2c_window.base;
  const Addr region = 0x10'0000;  // peer DRAM offset exercised
  std::mt19937_64 rng(2024);
  std::vector<RemoteDriver::Op> ops;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t len = 1 + rng() % 256;
    const Addr off = region + rng() % (0x4'0000 - len);
    RemoteDriver::Op w{TxnKind::write, window + off, std::vector<std::uint8_t>(len)};
    for (auto& b : w.data) b = static_cast<std::uint8_t>(rng());
    ops.push_back(std::move(w));
    ops.push_back({TxnKind::read, window + off, std::vector<std::uint8_t>(len)});
  }

  far.halt();
  std::thread serve([&] { far.run(100'000'000'000ull); });
  RemoteDriver driver(near.xbar(), ops);
  const RunResult r = near.kernel().run(driver, 100'000'000'000ull);
  near.c2c().detach();
  serve.join();

  unsigned exact = 0;
  for (std::size_t i = 0; i < ops.size(); i += 2) {
    if (ops[i].resp == Resp::okay && ops[i + 1].resp == Resp::okay && ops[i].data == ops[i + 1].data) ++exact;
  }
  const double f = cfg.freq_hz;
  const double secs = static_cast<double>(r.cycle) / f;
  const auto& fwd = near.c2c().link();
  const auto& rev = far.c2c().link();
  const double wire_fwd = fwd.wire_bytes() * 8.0 / secs;
  const double wire_rev = rev.wire_bytes() * 8.0 / secs;
  const double good_fwd = near.c2c().stats().payload_tx * 8.0 / secs;
  const double good_rev = far.c2c().stats().payload_tx * 8.0 / secs;
  // Serializer ceiling: back-to-back maximum frames on an idle link.
  c2c::LinkModel probe(cfg.c2c_bits_per_cycle);
  const std::size_t big = c2c::frame_size(c2c::Kind::write_req, c2c::kMaxLen);
  Cycle end = 0;
  for (int i = 0; i < 64; ++i) end = probe.transmit(0, big);
  const double ceiling = probe.wire_bytes() * 8.0 / (static_cast<double>(end) / f);
  const double limit = 62e6 * 1.01;
  const bool ok = exact == 1000 && within(ceiling, 62e6, 0.01) && wire_fwd <= limit && wire_rev <= limit &&
                  good_fwd < wire_fwd && good_rev < wire_rev;
  return {ok, fmt::format("loopbacks exact={}/1000 ceiling={:.2f} Mbit/s wire fwd/rev={:.2f}/{:.2f} "
                          "goodput fwd/rev={:.2f}/{:.2f} Mbit/s",
                          exact, ceiling / 1e6, wire_fwd / 1e6, wire_rev / 1e6, good_fwd / 1e6,
                          good_rev / 1e6)};
}

// --- LLC partitions ----------------------------------------------------------

Verdict llc_partitions() {
  unsigned passed = 0;
  std::string first_failure;
  std::uint64_t ops = 0;
  for (std::uint32_t mask = 0; mask < 16; ++mask) {
    const auto r = testing::run_cache_property(mask, 100 + mask, 10'000);
    ops += r.ops;
    if (r.ok) {
      ++passed;
    } else if (first_failure.empty()) {
      first_failure = fmt::format(" first failure mask={:#x}: {}", mask, r.failure);
    }
  }
  return {passed == 16, fmt::format("masks={}/16 ops={}{}", passed, ops, first_failure)};
}

// --- DMA -----------------------------------------------------------------------

Verdict dma() {
  const auto r = testing::run_dma_property(99, 1000);
  return {r.ok && r.jobs == 1000 && r.irqs == 1000,
          fmt::format("jobs={} irqs={} bytes={}{}", r.jobs, r.irqs, r.bytes,
                      r.ok ? "" : " failure: " + r.failure)};
}

// --- ISS -----------------------------------------------------------------------

struct SuiteRun {
  int code = -1;
  unsigned passed = 0;
};

SuiteRun run_suite(const std::string& exe) {
  SuiteRun s;
  FILE* p = ::popen((exe + " --gtest_brief=1 2>&1").c_str(), "r");
  if (p == nullptr) return s;
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = ::pclose(p);
  s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::smatch m;
  if (std::regex_search(out, m, std::regex(R"(\[  PASSED  \] (\d+) test)"))) s.passed = std::stoul(m[1]);
  return s;
}

Verdict iss() {
  const SuiteRun lock = run_suite(BASILISK_ISS_LOCKSTEP);
  const SuiteRun directed = run_suite(BASILISK_ISS_DIRECTED);
  const SuiteRun masm = run_suite(BASILISK_MINI_ASM);
  const unsigned total = lock.passed + directed.passed + masm.passed;
  const bool ok = lock.code == 0 && directed.code == 0 && masm.code == 0 && total >= 300;
  return {ok, fmt::format("lockstep-vs-reference={} directed={} asm-roundtrip={} total={}", lock.passed,
                          directed.passed, masm.passed, total)};
}

// --- Determinism -------------------------------------------------------------

Verdict determinism() {
  const GemmRun a = run_gemm(true), b = run_gemm(true);
  const bool ok = a.result.cycle == b.result.cycle && a.result.counters == b.result.counters &&
                  a.c == b.c && a.trace == b.trace && !a.trace.empty();
  return {ok, fmt::format("cycles={} trace-bytes={} dump-bytes={}", a.result.cycle, a.trace.size(), a.c.size())};
}

// --- Declared exclusions -----------------------------------------------------

Verdict excluded() {
  const auto e = find_operating_point("efficient"), n = find_operating_point("nominal"),
             p = find_operating_point("peak");
  const bool ok = e && n && p && e->voltage == 0.88 && e->freq_hz == 10'000'000 && n->voltage == 1.2 &&
                  n->freq_hz == 62'000'000 && p->voltage == 1.64 && p->freq_hz == 102'000'000;
  return {ok, "shmoo, energy, leakage, area and place-and-route are not modelled; presets "
              "0.88 V/10 MHz, 1.2 V/62 MHz, 1.64 V/102 MHz present"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> checks = {
      {"AC1 gemm48", gemm},          {"AC2 dram-stream", dram}, {"AC3 llc-port", crossbar},
      {"AC4 c2c-loopback", c2c_link}, {"AC5 llc-partitions", llc_partitions}, {"AC6 dma-2d", dma},
      {"AC7 iss", iss},              {"AC8 determinism", determinism}, {"AC9 excluded", excluded},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, fmt::format("exception: {}", e.what())};
    }
    if (!v.pass) ++failures;
    std::printf("%s %-20s %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
