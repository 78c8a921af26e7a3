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

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "basilisk/mini_asm.hpp"
#include "basilisk/system.hpp"

namespace basilisk {
namespace {

constexpr Addr kDram = 0x8000'0000;

std::string program(const char* name) {
  std::ifstream in(std::string(BASILISK_PROGRAMS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void boot(System& sys, const std::string& src, Addr at = kDram) {
  const auto r = masm::assemble(src, at);
  sys.load(at, r.image);
  sys.reset_core(at);
}

// Appended to snippets: exit with code 0.
constexpr const char* kExit = R"(
    li t6, 0x0300f000
    li t5, 1
    sw t5, 0(t6)
halt:
    j halt
)";

TEST(System, HelloPrintsGreetingAndExitsZero) {
  System sys{SimConfig{}};
  std::string out;
  sys.uart().set_sink([&](std::uint8_t b) { out += static_cast<char>(b); });
  boot(sys, program("hello.s"));
  const RunResult r = sys.run(10'000'000);
  EXPECT_EQ(r.reason, StopReason::exit);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(out, "Hello from Basilisk\n");
  // Twenty bytes at ten bit times each cannot finish sooner.
  EXPECT_GE(r.cycle, 20 * sys.uart().tx_cycles());
}

TEST(System, DebugReadSeesDirtyL1Lines) {
  System sys{SimConfig{}};
  boot(sys, std::string("li t0, 0x80010000\nli t1, 0x1122334455667788\nsd t1, 0(t0)\n") + kExit);
  ASSERT_EQ(sys.run(100'000).reason, StopReason::exit);
  std::uint64_t v = 0;
  ASSERT_EQ(sys.debug_read(0x8001'0000, {reinterpret_cast<std::uint8_t*>(&v), 8}), Resp::okay);
  EXPECT_EQ(v, 0x1122334455667788u);
  // The store is still only in a cache; backing DRAM has not seen it.
  EXPECT_EQ(sys.dram().dump(0x1'0000, 8), std::vector<std::uint8_t>(8, 0));
}

TEST(System, DebugWriteIsVisibleToCachedLoads) {
  System sys{SimConfig{}};
  // Load once so the line is cached, spin until the host patches it, then reload.
  boot(sys, std::string(R"(
    li t0, 0x80020000
    ld t1, 0(t0)
wait:
    ld t2, 0(t0)
    beq t1, t2, wait
    mv a0, t2
)") + kExit);
  sys.run(2'000);
  const std::uint64_t v = 0xfeed;
  ASSERT_EQ(sys.debug_write(0x8002'0000, {reinterpret_cast<const std::uint8_t*>(&v), 8}), Resp::okay);
  EXPECT_EQ(sys.run(100'000).reason, StopReason::exit);
  EXPECT_EQ(sys.core().state().x[10], 0xfeedu);
}

TEST(System, ScratchpadWaysAreAddressable) {
  System sys{SimConfig{}};
  boot(sys, std::string(R"(
    li t0, 0x03001000
    li t1, 0x3
    sw t1, 0(t0)
spin:
    lw t1, 8(t0)
    bnez t1, spin
    li t0, 0x70000000
    li t1, 0xabcdef
    sd t1, 0(t0)
    li t2, 0x70004000
    sd t1, 8(t2)
)") + kExit);
  ASSERT_EQ(sys.run(100'000).reason, StopReason::exit);
  EXPECT_EQ(sys.llc().spm_mask(), 0x3u);
  std::uint64_t a = 0, b = 0;
  ASSERT_EQ(sys.debug_read(0x7000'0000, {reinterpret_cast<std::uint8_t*>(&a), 8}), Resp::okay);
  ASSERT_EQ(sys.debug_read(0x7000'4008, {reinterpret_cast<std::uint8_t*>(&b), 8}), Resp::okay);
  EXPECT_EQ(a, 0xabcdefu);
  EXPECT_EQ(b, 0xabcdefu);
  // Way 2 is still cache, so its scratchpad window is an error.
  std::uint32_t w = 0;
  EXPECT_NE(sys.debug_read(0x7000'8000, {reinterpret_cast<std::uint8_t*>(&w), 4}), Resp::okay);
}

TEST(System, UnhandledAccessFaultStops) {
  System sys{SimConfig{}};
  boot(sys, "li t0, 0x50000000\nld t1, 0(t0)\n");
  const RunResult r = sys.run(100'000);
  EXPECT_EQ(r.reason, StopReason::trap);
  EXPECT_EQ(r.trap_cause, 5u);
  EXPECT_EQ(r.trap_tval, 0x5000'0000u);
}

TEST(System, AtomicsOutsideMemoryFault) {
  System sys{SimConfig{}};
  boot(sys, "li t0, 0x03005000\namoadd.w t1, t1, (t0)\n");
  const RunResult r = sys.run(100'000);
  EXPECT_EQ(r.reason, StopReason::trap);
  EXPECT_EQ(r.trap_cause, 7u);
}

TEST(System, BackdoorLoadRejectsDeviceRanges) {
  System sys{SimConfig{}};
  const std::uint8_t b[4] = {};
  EXPECT_THROW(sys.load(0x0300'2000, b), LoadError);
  EXPECT_THROW(sys.load(kDram + sys.config().dram.size() - 2, b), LoadError);
  EXPECT_NO_THROW(sys.load(0x0001'0000, b));
  EXPECT_TRUE(sys.is_memory(kDram, 4096));
  EXPECT_FALSE(sys.is_memory(0x0c00'0000, 4));
}

TEST(System, BreakpointStopsBeforeExecuting) {
  System sys{SimConfig{}};
  boot(sys, std::string("nop\nnop\nnop\n") + kExit);
  StopConditions stop;
  stop.breakpoints.insert(kDram + 8);
  const RunResult r = sys.run(100'000, stop);
  EXPECT_EQ(r.reason, StopReason::breakpoint);
  EXPECT_EQ(r.pc, kDram + 8);
  EXPECT_EQ(sys.run(100'000, stop).reason, StopReason::exit);
}

TEST(System, TimerInterruptWakesWfi) {
  System sys{SimConfig{}};
  boot(sys, std::string(R"(
    la t0, handler
    csrw mtvec, t0
    li t0, 0x02004000
    li t1, 50000
    sw t1, 0(t0)
    sw zero, 4(t0)
    li t0, 0x80
    csrs mie, t0
    csrsi mstatus, 8
    wfi
park:
    j park
handler:
    csrr a0, mcause
)") + kExit);
  const RunResult r = sys.run(1'000'000);
  EXPECT_EQ(r.reason, StopReason::exit);
  EXPECT_EQ(sys.core().state().x[10], (std::uint64_t{1} << 63) | 7);
  EXPECT_GE(r.cycle, 50'000u);
  EXPECT_LT(r.cycle, 50'200u);
}

TEST(System, DmaCompletionRaisesMachineExternalInterrupt) {
  System sys{SimConfig{}};
  for (unsigned i = 0; i < 256; ++i) {
    const auto b = static_cast<std::uint8_t>(i);
    sys.load(0x8010'0000 + i, {&b, 1});
  }
  boot(sys, std::string(R"(
    la t0, handler
    csrw mtvec, t0
    li s1, 0x0c002000
    li t0, 4
    sw t0, 0(s1)               # enable source 2 on context 0
    li t0, 0x800
    csrs mie, t0
    csrsi mstatus, 8
    li s0, 0x01000000
    li t0, 0x80100000
    sw t0, 0(s0)
    sw zero, 4(s0)
    li t0, 0x80200000
    sw t0, 8(s0)
    sw zero, 12(s0)
    li t0, 256
    sw t0, 16(s0)
    li t0, 1
    sw t0, 20(s0)
    sw t0, 32(s0)
wait:
    j wait
handler:
    li t0, 0x0c200004
    lw a0, 0(t0)               # claim
    sw a0, 0(t0)               # complete
)") + kExit);
  const RunResult r = sys.run(1'000'000);
  ASSERT_EQ(r.reason, StopReason::exit);
  EXPECT_EQ(sys.core().state().x[10], 2u);
  std::vector<std::uint8_t> a(256), b(256);
  sys.debug_read(0x8010'0000, a);
  sys.debug_read(0x8020'0000, b);
  EXPECT_EQ(a, b);
}

TEST(System, IdenticalRunsAreBitIdentical) {
  auto once = [](std::string& trace) {
    System sys{SimConfig{}};
    std::ostringstream os;
    sys.kernel().tracer().set_sink(&os);
    sys.kernel().tracer().enable_all();
    sys.uart().set_sink([](std::uint8_t) {});
    boot(sys, program("hello.s"));
    const RunResult r = sys.run(10'000'000);
    trace = os.str();
    return r;
  };
  std::string t1, t2;
  const RunResult a = once(t1), b = once(t2);
  EXPECT_EQ(a.cycle, b.cycle);
  EXPECT_EQ(a.counters, b.counters);
  EXPECT_EQ(t1, t2);
  EXPECT_FALSE(t1.empty());
}

}  // namespace
}  // namespace basilisk
