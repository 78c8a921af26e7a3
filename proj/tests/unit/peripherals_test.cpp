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
#include <vector>

#include "basilisk/peripherals.hpp"

namespace basilisk {
namespace {

class Idle final : public Steppable {
 public:
  HartTick tick(const StopConditions&) override { return {HartTick::Kind::waiting, 0, StopReason::idle}; }
  std::optional<Cycle> wake_cycle() const override { return std::nullopt; }
  void fill_result(RunResult&) const override {}
};

class Busy final : public Steppable {
 public:
  HartTick tick(const StopConditions&) override { return {HartTick::Kind::ran, 1, StopReason::trap}; }
  std::optional<Cycle> wake_cycle() const override { return std::nullopt; }
  void fill_result(RunResult&) const override {}
};

void run_to(Kernel& k, Cycle c) {
  Idle h;
  k.run(h, c);
}

// Advances time even with nothing scheduled.
void spin_to(Kernel& k, Cycle c) {
  Busy h;
  k.run(h, c);
}

std::uint32_t rd(RegisterDevice& d, Addr off) {
  std::uint32_t v = 0;
  EXPECT_EQ(d.read32(off, v), Resp::okay);
  return v;
}

// --- UART ------------------------------------------------------------------

TEST(Uart, ByteTimeIsTenBitTimes) {
  Kernel k;
  Uart u(k);
  EXPECT_EQ(u.tx_cycles(), 5382u);  // 10 * 62e6 / 115200, rounded
  EXPECT_THROW(Uart(k, 0), ConfigError);
}

TEST(Uart, TransmitsAfterByteTime) {
  Kernel k;
  Uart u(k);
  std::vector<std::uint8_t> out;
  u.set_sink([&](std::uint8_t b) { out.push_back(b); });
  u.write32(Uart::kTx, 'A');
  EXPECT_EQ(rd(u, Uart::kStatus) & Uart::kTxIdle, 0u);
  run_to(k, u.tx_cycles() - 1);
  EXPECT_TRUE(out.empty());
  run_to(k, u.tx_cycles());
  EXPECT_EQ(out, (std::vector<std::uint8_t>{'A'}));
  EXPECT_EQ(rd(u, Uart::kStatus) & Uart::kTxIdle, Uart::kTxIdle);
}

TEST(Uart, ReceiveQueueAndInterruptLevel) {
  Kernel k;
  Uart u(k);
  std::vector<bool> edges;
  u.set_irq([&](bool l) { edges.push_back(l); });
  u.write32(Uart::kCtrl, Uart::kRxIrqEn);
  const std::uint8_t in[] = {'h', 'i'};
  u.inject(in);
  EXPECT_EQ(rd(u, Uart::kStatus) & Uart::kRxAvail, Uart::kRxAvail);
  EXPECT_EQ(rd(u, Uart::kRx), 'h');
  EXPECT_EQ(rd(u, Uart::kRx), 'i');
  EXPECT_EQ(rd(u, Uart::kRx), 0u);
  EXPECT_EQ(edges, (std::vector<bool>{true, false}));
}

TEST(Uart, TxIdleInterruptFollowsTransmitter) {
  Kernel k;
  Uart u(k);
  bool level = false;
  u.set_irq([&](bool l) { level = l; });
  u.write32(Uart::kCtrl, Uart::kTxIrqEn);
  EXPECT_TRUE(level);
  u.write32(Uart::kTx, 'x');
  EXPECT_FALSE(level);
  run_to(k, 10'000);
  EXPECT_TRUE(level);
}

// --- GPIO ------------------------------------------------------------------

TEST(Gpio, DirectionSelectsReadback) {
  Gpio g;
  g.set_input(0xf0);
  g.write32(Gpio::kOut, 0x0f);
  g.write32(Gpio::kDir, 0x0f);
  EXPECT_EQ(rd(g, Gpio::kIn), 0xffu);
  g.write32(Gpio::kDir, 0x00);
  EXPECT_EQ(rd(g, Gpio::kIn), 0xf0u);
}

TEST(Gpio, InputAndErrorInterrupts) {
  Gpio g;
  bool level = false;
  g.set_irq([&](bool l) { level = l; });
  g.write32(Gpio::kIrqEn, 0x01);
  g.set_input(0x01);
  EXPECT_TRUE(level);
  g.set_input(0x00);
  EXPECT_FALSE(level);
  g.write32(Gpio::kIrqEn, Gpio::kIrqOnErr);
  g.raise_error(Gpio::kErrVga);
  EXPECT_TRUE(level);
  EXPECT_EQ(rd(g, Gpio::kErr), Gpio::kErrVga);
  g.write32(Gpio::kErr, Gpio::kErrVga);  // write-one-to-clear
  EXPECT_FALSE(level);
  EXPECT_EQ(g.err(), 0u);
}

// --- VGA -------------------------------------------------------------------

TEST(Vga, FramePeriodAtOperatingPoints) {
  EXPECT_EQ(Vga::frame_period(62'000'000), 1'033'267u);
  EXPECT_EQ(Vga::frame_period(65'000'000), 1344u * 806);
  EXPECT_NEAR(Vga::frame_rate_hz(), 60.004, 1e-3);
}

TEST(Vga, ScansOutFramesAtPeriod) {
  Kernel k;
  std::vector<std::uint64_t> seen;
  Vga v(k, [](Addr, std::span<std::uint8_t> px) {
    std::fill(px.begin(), px.end(), 0x11);
    return true;
  });
  v.set_frame_observer([&](std::uint64_t n, const std::vector<std::uint8_t>& px) {
    seen.push_back(n);
    EXPECT_EQ(px.size(), Vga::kFrameBytes);
  });
  v.write32(Vga::kFbLo, 0x8010'0000);
  v.write32(Vga::kCtrl, 1);
  const Cycle p = Vga::frame_period(k.clock().freq_hz);
  run_to(k, 3 * p - 1);
  EXPECT_EQ(seen.size(), 2u);
  run_to(k, 3 * p);
  EXPECT_EQ(rd(v, Vga::kFrames), 3u);
  EXPECT_EQ(k.counters().dram_bytes_rd, 3 * Vga::kFrameBytes);
  v.write32(Vga::kCtrl, 0);
  run_to(k, 10 * p);
  EXPECT_EQ(v.frames(), 3u);
}

TEST(Vga, UnmappedFramebufferRaisesGpioError) {
  Kernel k;
  Gpio g;
  Vga v(k, [](Addr, std::span<std::uint8_t>) { return false; }, &g);
  v.write32(Vga::kCtrl, 1);
  run_to(k, 2 * Vga::frame_period(k.clock().freq_hz));
  EXPECT_FALSE(v.enabled());
  EXPECT_EQ(g.err() & Gpio::kErrVga, Gpio::kErrVga);
  EXPECT_EQ(v.frames(), 0u);
}

TEST(Vga, PpmExpandsRgb565ByBitReplication) {
  const std::uint8_t px[] = {0xff, 0xff, 0x1f, 0x00, 0x00, 0xf8};  // white, blue, red
  const std::string ppm = Vga::to_ppm(px, 3, 1);
  const std::string header = "P6\n3 1\n255\n";
  ASSERT_EQ(ppm.size(), header.size() + 9);
  EXPECT_EQ(ppm.substr(0, header.size()), header);
  const auto* b = reinterpret_cast<const std::uint8_t*>(ppm.data() + header.size());
  EXPECT_EQ(std::vector<std::uint8_t>(b, b + 9),
            (std::vector<std::uint8_t>{255, 255, 255, 0, 0, 255, 255, 0, 0}));
}

// --- CLINT -----------------------------------------------------------------

TEST(Clint, MtimeTracksCyclesAndCanBeWritten) {
  Kernel k;
  Clint c(k);
  spin_to(k, 1234);
  EXPECT_EQ(rd(c, Clint::kMtime), 1234u);
  c.write32(Clint::kMtime + 4, 1);
  c.write32(Clint::kMtime, 0);
  EXPECT_EQ(c.mtime(), 0x1'0000'0000u);
  spin_to(k, 1300);
  EXPECT_EQ(c.mtime(), 0x1'0000'0000u + 66);
}

TEST(Clint, MtipFollowsCompare) {
  Kernel k;
  Clint c(k);
  EXPECT_FALSE(c.mtip());
  EXPECT_FALSE(c.mtip_cycle().has_value());
  c.write32(Clint::kMtimecmp + 4, 0);
  c.write32(Clint::kMtimecmp, 500);
  EXPECT_EQ(c.mtip_cycle(), 500u);
  spin_to(k, 500);
  EXPECT_TRUE(c.mtip());
  EXPECT_FALSE(c.mtip_cycle().has_value());
}

TEST(Clint, MsipDrivesLine) {
  Kernel k;
  Clint c(k);
  bool line = false;
  c.set_msip_line([&](bool l) { line = l; });
  c.write32(Clint::kMsip, 1);
  EXPECT_TRUE(line);
  EXPECT_EQ(rd(c, Clint::kMsip), 1u);
  c.write32(Clint::kMsip, 0);
  EXPECT_FALSE(line);
}

// --- PLIC ------------------------------------------------------------------

struct PlicRig {
  PlicRig() : p(k) {
    p.set_context_line(0, [this](bool l) { m = l; });
    p.set_context_line(1, [this](bool l) { s = l; });
  }
  Kernel k;
  Plic p;
  bool m = false, s = false;
};

TEST(Plic, ResetPriorityIsOneAndSourceZeroReserved) {
  PlicRig r;
  EXPECT_EQ(rd(r.p, 0), 0u);
  EXPECT_EQ(rd(r.p, 4 * irq::kUart), 1u);
  r.p.write32(0, 5);
  EXPECT_EQ(rd(r.p, 0), 0u);
  r.p.write32(Plic::kEnableBase, 0xffffffff);
  EXPECT_EQ(rd(r.p, Plic::kEnableBase), 0xfffffffeu);
}

TEST(Plic, ClaimPicksHighestPriorityThenLowestId) {
  PlicRig r;
  r.p.write32(Plic::kEnableBase, 0xff);
  r.p.write32(4 * 3, 2);
  r.p.set_level(2, true);
  r.p.set_level(3, true);
  r.p.set_level(4, true);
  EXPECT_TRUE(r.m);
  EXPECT_FALSE(r.s);
  EXPECT_EQ(rd(r.p, Plic::kContextBase + 4), 3u);
  EXPECT_EQ(rd(r.p, Plic::kContextBase + 4), 2u);
  EXPECT_EQ(rd(r.p, Plic::kContextBase + 4), 4u);
  EXPECT_FALSE(r.m);
  EXPECT_EQ(rd(r.p, Plic::kContextBase + 4), 0u);
}

TEST(Plic, ThresholdMasksLowerPriorities) {
  PlicRig r;
  r.p.write32(Plic::kEnableBase + Plic::kEnableStride, 1u << irq::kDma);
  r.p.write32(Plic::kContextBase + Plic::kContextStride, 1);
  r.p.set_level(irq::kDma, true);
  EXPECT_FALSE(r.s);
  r.p.write32(4 * irq::kDma, 2);
  EXPECT_TRUE(r.s);
}

TEST(Plic, LevelSourceReassertsAfterComplete) {
  PlicRig r;
  r.p.write32(Plic::kEnableBase, 1u << irq::kUart);
  r.p.set_level(irq::kUart, true);
  EXPECT_EQ(r.p.claim(0), irq::kUart);
  EXPECT_FALSE(r.m);
  r.p.complete(0, irq::kUart);
  EXPECT_TRUE(r.m);
  EXPECT_EQ(r.p.claim(0), irq::kUart);
  r.p.set_level(irq::kUart, false);
  r.p.complete(0, irq::kUart);
  EXPECT_FALSE(r.m);
  EXPECT_FALSE(r.p.pending(irq::kUart));
}

TEST(Plic, PulseWhileInFlightIsDeferredNotLost) {
  PlicRig r;
  r.p.write32(Plic::kEnableBase, 1u << irq::kDma);
  r.p.pulse(irq::kDma);
  EXPECT_EQ(r.p.claim(0), irq::kDma);
  r.p.pulse(irq::kDma);
  EXPECT_FALSE(r.p.pending(irq::kDma));
  r.p.write32(Plic::kContextBase + 4, irq::kDma);
  EXPECT_TRUE(r.p.pending(irq::kDma));
  EXPECT_EQ(r.p.pulses(irq::kDma), 2u);
}

TEST(Plic, CompleteOfIdleSourceIsIgnored) {
  PlicRig r;
  r.p.write32(Plic::kEnableBase, 1u << irq::kGpio);
  r.p.complete(0, irq::kGpio);
  EXPECT_FALSE(r.p.pending(irq::kGpio));
  r.p.complete(0, 99);
}

// --- SimExit ---------------------------------------------------------------

TEST(SimExit, OddWriteStopsWithCode) {
  Kernel k;
  SimExit e(k);
  k.schedule(10, [&] { e.write32(0, 2); });
  k.schedule(20, [&] { e.write32(0, (7 << 1) | 1); });
  Idle h;
  const RunResult r = k.run(h, 1000);
  EXPECT_EQ(r.reason, StopReason::exit);
  EXPECT_EQ(r.exit_code, 7);
  EXPECT_EQ(r.cycle, 20u);
}

}  // namespace
}  // namespace basilisk
