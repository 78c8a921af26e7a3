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

#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "basilisk/interconnect.hpp"
#include "basilisk/sim_kernel.hpp"

namespace basilisk {

using IrqLine = std::function<void(bool)>;

/// Interrupt source ids on the PLIC.
namespace irq {
inline constexpr unsigned kUart = 1;
inline constexpr unsigned kDma = 2;
inline constexpr unsigned kC2c = 3;
inline constexpr unsigned kGpio = 4;
}  // namespace irq

/// Reads as zero, ignores writes.
class StubDevice final : public RegisterDevice {
 public:
  Resp read32(Addr, std::uint32_t& value) override {
    value = 0;
    return Resp::okay;
  }
  Resp write32(Addr, std::uint32_t) override { return Resp::okay; }
};

/// Writing a value with bit 0 set ends the simulation with code value >> 1.
class SimExit final : public RegisterDevice {
 public:
  explicit SimExit(Kernel& kernel) : kernel_(kernel) {}
  Resp read32(Addr, std::uint32_t& value) override {
    value = 0;
    return Resp::okay;
  }
  Resp write32(Addr offset, std::uint32_t value) override;

 private:
  Kernel& kernel_;
};

class Uart final : public RegisterDevice {
 public:
  static constexpr Addr kTx = 0x0, kRx = 0x4, kStatus = 0x8, kCtrl = 0xc;
  static constexpr std::uint32_t kTxIdle = 1, kRxAvail = 2;
  static constexpr std::uint32_t kTxIrqEn = 1, kRxIrqEn = 2;
  static constexpr std::uint32_t kDefaultBaud = 115200;

  explicit Uart(Kernel& kernel, std::uint32_t baud = kDefaultBaud);

  void set_sink(std::function<void(std::uint8_t)> sink) { sink_ = std::move(sink); }
  void set_irq(IrqLine line) { irq_ = std::move(line); }
  /// Host-side input; becomes visible to software through RX.
  void inject(std::span<const std::uint8_t> bytes);
  /// Cycles a byte occupies the transmitter: 10 bit times.
  Cycle tx_cycles() const;
  bool rx_irq_enabled() const { return (ctrl_ & kRxIrqEn) != 0; }
  std::size_t rx_pending() const { return rx_.size(); }

  Resp read32(Addr offset, std::uint32_t& value) override;
  Resp write32(Addr offset, std::uint32_t value) override;

 private:
  void update_irq();

  Kernel& kernel_;
  std::uint32_t baud_;
  std::function<void(std::uint8_t)> sink_;
  IrqLine irq_;
  std::deque<std::uint8_t> rx_;
  std::uint32_t ctrl_ = 0;
  bool tx_busy_ = false;
  std::uint8_t tx_byte_ = 0;
  bool irq_level_ = false;
};

class Gpio final : public RegisterDevice {
 public:
  static constexpr Addr kOut = 0x0, kIn = 0x4, kDir = 0x8, kErr = 0xc, kIrqEn = 0x10;
  /// ERR bit raised when the VGA scanout hits an unmapped framebuffer.
  static constexpr std::uint32_t kErrVga = 1;
  /// IRQ_EN bit that routes a non-zero ERR register to the interrupt line.
  static constexpr std::uint32_t kIrqOnErr = 1u << 8;

  void set_irq(IrqLine line) { irq_ = std::move(line); }
  void set_output_observer(std::function<void(std::uint8_t out, std::uint8_t dir)> f) {
    observer_ = std::move(f);
  }
  /// Drives the external pins.
  void set_input(std::uint8_t pins);
  void raise_error(std::uint32_t bits);

  std::uint8_t out() const { return out_; }
  std::uint8_t dir() const { return dir_; }
  std::uint32_t err() const { return err_; }

  Resp read32(Addr offset, std::uint32_t& value) override;
  Resp write32(Addr offset, std::uint32_t value) override;

 private:
  void update_irq();

  IrqLine irq_;
  std::function<void(std::uint8_t, std::uint8_t)> observer_;
  std::uint8_t out_ = 0;
  std::uint8_t in_ = 0;
  std::uint8_t dir_ = 0;
  std::uint32_t err_ = 0;
  std::uint32_t irq_en_ = 0;
  bool irq_level_ = false;
};

/// XGA (1024x768, RGB565) scanout with a fixed frame period.
class Vga final : public RegisterDevice {
 public:
  static constexpr Addr kCtrl = 0x0, kFbLo = 0x4, kFbHi = 0x8, kFrames = 0xc;
  static constexpr unsigned kWidth = 1024, kHeight = 768;
  static constexpr unsigned kHTotal = 1344, kVTotal = 806;
  static constexpr std::uint64_t kPixelClockHz = 65'000'000;
  static constexpr std::uint64_t kFrameBytes = std::uint64_t{kWidth} * kHeight * 2;

  /// Backdoor read of framebuffer memory; false when the range is unmapped.
  using Reader = std::function<bool(Addr, std::span<std::uint8_t>)>;

  Vga(Kernel& kernel, Reader reader, Gpio* gpio = nullptr);

  static Cycle frame_period(std::uint64_t freq_hz);
  static double frame_rate_hz() {
    return static_cast<double>(kPixelClockHz) / (double{kHTotal} * kVTotal);
  }

  void set_dump_dir(std::optional<std::filesystem::path> dir) { dump_dir_ = std::move(dir); }
  void set_frame_observer(std::function<void(std::uint64_t, const std::vector<std::uint8_t>&)> f) {
    on_frame_ = std::move(f);
  }
  bool enabled() const { return enabled_; }
  std::uint32_t frames() const { return frames_; }
  Addr framebuffer() const { return fb_; }

  Resp read32(Addr offset, std::uint32_t& value) override;
  Resp write32(Addr offset, std::uint32_t value) override;

  /// Binary PPM (P6) of an RGB565 framebuffer, expanded by bit replication.
  static std::string to_ppm(std::span<const std::uint8_t> rgb565, unsigned width, unsigned height);

 private:
  void start();
  void stop();
  void frame();

  Kernel& kernel_;
  Reader reader_;
  Gpio* gpio_;
  std::optional<std::filesystem::path> dump_dir_;
  std::function<void(std::uint64_t, const std::vector<std::uint8_t>&)> on_frame_;
  bool enabled_ = false;
  Addr fb_ = 0;
  std::uint32_t frames_ = 0;
  std::optional<EventId> next_;
};

/// Machine timer and software interrupt block. mtime counts core cycles.
class Clint final : public RegisterDevice {
 public:
  static constexpr Addr kMsip = 0x0, kMtimecmp = 0x4000, kMtime = 0xbff8;

  explicit Clint(Kernel& kernel) : kernel_(kernel) {}

  void set_msip_line(IrqLine line) { msip_line_ = std::move(line); }
  std::uint64_t mtime() const { return kernel_.now() + static_cast<std::uint64_t>(offset_); }
  std::uint64_t mtimecmp() const { return mtimecmp_; }
  bool mtip() const { return mtime() >= mtimecmp_; }
  /// Cycle at which mtip becomes set, if it is not set already.
  std::optional<Cycle> mtip_cycle() const;

  Resp read32(Addr offset, std::uint32_t& value) override;
  Resp write32(Addr offset, std::uint32_t value) override;

 private:
  Kernel& kernel_;
  std::int64_t offset_ = 0;
  std::uint64_t mtimecmp_ = ~std::uint64_t{0};
  bool msip_ = false;
  IrqLine msip_line_;
};

/// Platform-level interrupt controller with two contexts (0: M, 1: S).
/// Level sources pass through a gateway that holds one request in flight
/// between claim and complete.
class Plic final : public RegisterDevice {
 public:
  static constexpr unsigned kSources = 32;  // id 0 is reserved
  static constexpr unsigned kContexts = 2;
  static constexpr Addr kPending = 0x1000;
  static constexpr Addr kEnableBase = 0x2000, kEnableStride = 0x80;
  static constexpr Addr kContextBase = 0x200000, kContextStride = 0x1000;

  explicit Plic(Kernel& kernel);

  void set_context_line(unsigned ctx, IrqLine line) { lines_.at(ctx) = std::move(line); }
  void set_level(unsigned id, bool level);
  /// Edge request: becomes pending once, even if currently in flight.
  void pulse(unsigned id);

  std::uint32_t claim(unsigned ctx);
  void complete(unsigned ctx, std::uint32_t id);

  bool pending(unsigned id) const { return (pending_ >> id) & 1u; }
  std::uint32_t pulses(unsigned id) const { return pulses_.at(id); }

  Resp read32(Addr offset, std::uint32_t& value) override;
  Resp write32(Addr offset, std::uint32_t value) override;

 private:
  std::uint32_t best(unsigned ctx) const;
  void update();

  Kernel& kernel_;
  std::array<std::uint32_t, kSources> priority_{};
  std::array<std::uint32_t, kSources> pulses_{};
  std::uint32_t pending_ = 0;
  std::uint32_t in_flight_ = 0;
  std::uint32_t level_ = 0;
  std::uint32_t deferred_ = 0;
  std::array<std::uint32_t, kContexts> enable_{};
  std::array<std::uint32_t, kContexts> threshold_{};
  std::array<IrqLine, kContexts> lines_;
  std::array<bool, kContexts> out_{};
};

/// Host side of the UART: transmitted bytes go to a writer, received bytes
/// are collected on a reader thread and handed to the UART at quantum
/// boundaries.
class UartBridge {
 public:
  virtual ~UartBridge() = default;
  /// Registers the sink and the boundary hook.
  void attach(Kernel& kernel, Uart& uart);

 protected:
  struct Inbox {
    std::mutex mu;
    std::vector<std::uint8_t> bytes;
    std::atomic<bool> open{true};
  };

  virtual void write_byte(std::uint8_t b) = 0;
  std::shared_ptr<Inbox> inbox_ = std::make_shared<Inbox>();
};

/// Output to stdout; input from stdin on a detached reader thread when
/// `read_stdin` is set.
class StdioUartBridge final : public UartBridge {
 public:
  explicit StdioUartBridge(bool read_stdin);

 protected:
  void write_byte(std::uint8_t b) override;
};

/// Serves one TCP client on 127.0.0.1:`port` (0 picks a free port).
class TcpUartBridge final : public UartBridge {
 public:
  explicit TcpUartBridge(std::uint16_t port);
  ~TcpUartBridge() override;
  std::uint16_t port() const { return port_; }

 protected:
  void write_byte(std::uint8_t b) override;

 private:
  void serve();

  int listen_fd_ = -1;
  std::atomic<int> client_fd_{-1};
  std::uint16_t port_ = 0;
  std::thread thread_;
};

}  // namespace basilisk
