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

#include "dma_property.hpp"

#include <cstring>
#include <random>
#include <vector>

#include <fmt/format.h>

#include "basilisk/dma.hpp"

namespace basilisk::testing {
namespace {

constexpr Addr kBase = 0x1000'0000;
constexpr Addr kSize = 0x40000;

class Ram final : public Target {
 public:
  Ram() : mem(kSize, 0) {}
  Response access(const Transaction& t) override {
    std::uint8_t* p = mem.data() + (t.addr - kBase);
    if (t.kind == TxnKind::read) {
      std::memcpy(t.data.data(), p, t.bytes());
    } else {
      std::memcpy(p, t.data.data(), t.bytes());
    }
    return {Resp::okay, 3};
  }
  std::vector<std::uint8_t> mem;
};

class Idle final : public Steppable {
 public:
  HartTick tick(const StopConditions&) override { return {HartTick::Kind::waiting, 0, StopReason::idle}; }
  std::optional<Cycle> wake_cycle() const override { return std::nullopt; }
  void fill_result(RunResult&) const override {}
};

}  // namespace

DmaPropertyResult run_dma_property(std::uint64_t seed, unsigned jobs) {
  DmaPropertyResult res;
  std::mt19937_64 rng(seed);
  Kernel kernel;
  AddressMap map;
  map.add({"ram", kBase, kSize, 0, Bus::xbar});
  Ram ram;
  Crossbar xbar(kernel, map);
  xbar.attach(0, &ram);
  DmaEngine dma(kernel, xbar);
  unsigned irqs_this_job = 0;
  dma.set_irq([&] { ++irqs_this_job; });
  for (auto& b : ram.mem) b = static_cast<std::uint8_t>(rng());
  std::vector<std::uint8_t> oracle = ram.mem;
  Idle hart;

  for (unsigned j = 0; j < jobs && res.ok; ++j) {
    DmaJob job;
    job.size = 1 + static_cast<std::uint32_t>(rng() % (rng() % 4 == 0 ? 5000 : 300));
    job.reps = 1 + static_cast<std::uint32_t>(rng() % 12);
    // Strides may be negative, shorter than a row, or zero.
    auto stride = [&] {
      switch (rng() % 5) {
        case 0: return std::int64_t{job.size};
        case 1: return std::int64_t{0};
        case 2: return -static_cast<std::int64_t>(rng() % 4096);
        default: return static_cast<std::int64_t>(rng() % 8192);
      }
    };
    job.src_stride = stride();
    job.dst_stride = stride();
    auto place = [&](std::int64_t s) -> Addr {
      const std::int64_t lo = std::min<std::int64_t>(0, s * (job.reps - 1));
      const std::int64_t hi = std::max<std::int64_t>(0, s * (job.reps - 1)) + job.size;
      const std::int64_t room = static_cast<std::int64_t>(kSize) - (hi - lo);
      if (room <= 0) return 0;
      return kBase + static_cast<Addr>(-lo + static_cast<std::int64_t>(rng() % room));
    };
    job.src = place(job.src_stride);
    job.dst = rng() % 6 == 0 ? job.src + rng() % 64 : place(job.dst_stride);
    if (job.src == 0 || job.dst == 0 || job.dst - kBase + job.size > kSize ||
        job.dst + job.dst_stride * (job.reps - 1) - kBase + job.size > kSize) {
      --j;
      continue;
    }
    for (std::uint32_t r = 0; r < job.reps; ++r) {
      for (std::uint32_t i = 0; i < job.size; ++i) {
        const Addr s = job.src + static_cast<Addr>(job.src_stride * r) + i - kBase;
        const Addr d = job.dst + static_cast<Addr>(job.dst_stride * r) + i - kBase;
        oracle[d] = oracle[s];
      }
    }
    irqs_this_job = 0;
    if (!dma.submit(job)) {
      res.ok = false;
      res.failure = fmt::format("job {}: engine busy", j);
      break;
    }
    kernel.run(hart, kernel.now() + 100'000'000);
    ++res.jobs;
    res.irqs += irqs_this_job;
    if (dma.status() != DmaStatus::done) {
      res.ok = false;
      res.failure = fmt::format("job {}: status {}", j, static_cast<unsigned>(dma.status()));
    } else if (irqs_this_job != 1) {
      res.ok = false;
      res.failure = fmt::format("job {}: {} interrupts", j, irqs_this_job);
    } else if (ram.mem != oracle) {
      res.ok = false;
      res.failure = fmt::format("job {} (src {:#x} dst {:#x} size {} reps {} strides {}/{}): memory differs",
                                j, job.src, job.dst, job.size, job.reps, job.src_stride,
                                job.dst_stride);
    }
    dma.clear();
  }
  res.bytes = dma.bytes_moved();
  res.busy_cycles = dma.busy_cycles();
  return res;
}

}  // namespace basilisk::testing
