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

#include "basilisk/peripherals.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <cstdio>
#include <fstream>

#include <fmt/format.h>

namespace basilisk {

Resp SimExit::write32(Addr offset, std::uint32_t value) {
  if (offset == 0 && (value & 1u) != 0) {
    kernel_.tracer().emit(kernel_.now(), TraceKind::sim, "exit code={}", value >> 1);
    kernel_.request_stop(StopReason::exit, static_cast<int>(value >> 1));
  }
  return Resp::okay;
}

// ---------------------------------------------------------------------------
// UART

Uart::Uart(Kernel& kernel, std::uint32_t baud) : kernel_(kernel), baud_(baud) {
  if (baud == 0) throw ConfigError("uart baud rate must be non-zero");
}

Cycle Uart::tx_cycles() const {
  return (10 * kernel_.clock().freq_hz + baud_ / 2) / baud_;
}

void Uart::inject(std::span<const std::uint8_t> bytes) {
  rx_.insert(rx_.end(), bytes.begin(), bytes.end());
  update_irq();
}

Resp Uart::read32(Addr offset, std::uint32_t& value) {
  switch (offset) {
    case kTx: value = 0; break;
    case kRx:
      value = 0;
      if (!rx_.empty()) {
        value = rx_.front();
        rx_.pop_front();
        update_irq();
      }
      break;
    case kStatus: value = (tx_busy_ ? 0 : kTxIdle) | (rx_.empty() ? 0 : kRxAvail); break;
    case kCtrl: value = ctrl_; break;
    default: value = 0; break;
  }
  return Resp::okay;
}

Resp Uart::write32(Addr offset, std::uint32_t value) {
  if (offset == kTx) {
    tx_byte_ = static_cast<std::uint8_t>(value);
    if (!tx_busy_) {
      tx_busy_ = true;
      kernel_.schedule_in(tx_cycles(), [this] {
        kernel_.tracer().emit(kernel_.now(), TraceKind::uart, "tx byte=0x{:02x}", tx_byte_);
        if (sink_) sink_(tx_byte_);
        tx_busy_ = false;
        update_irq();
      });
    }
    update_irq();
  } else if (offset == kCtrl) {
    ctrl_ = value & (kTxIrqEn | kRxIrqEn);
    update_irq();
  }
  return Resp::okay;
}

void Uart::update_irq() {
  const bool level = ((ctrl_ & kTxIrqEn) != 0 && !tx_busy_) ||
                     ((ctrl_ & kRxIrqEn) != 0 && !rx_.empty());
  if (level != irq_level_) {
    irq_level_ = level;
    if (irq_) irq_(level);
  }
}

// ---------------------------------------------------------------------------
// GPIO

void Gpio::set_input(std::uint8_t pins) {
  in_ = pins;
  update_irq();
}

void Gpio::raise_error(std::uint32_t bits) {
  err_ |= bits;
  update_irq();
}

Resp Gpio::read32(Addr offset, std::uint32_t& value) {
  switch (offset) {
    case kOut: value = out_; break;
    case kIn: value = static_cast<std::uint8_t>((in_ & ~dir_) | (out_ & dir_)); break;
    case kDir: value = dir_; break;
    case kErr: value = err_; break;
    case kIrqEn: value = irq_en_; break;
    default: value = 0; break;
  }
  return Resp::okay;
}

Resp Gpio::write32(Addr offset, std::uint32_t value) {
  switch (offset) {
    case kOut:
      out_ = static_cast<std::uint8_t>(value);
      if (observer_) observer_(out_, dir_);
      break;
    case kDir:
      dir_ = static_cast<std::uint8_t>(value);
      if (observer_) observer_(out_, dir_);
      break;
    case kErr: err_ &= ~value; break;
    case kIrqEn: irq_en_ = value & (0xffu | kIrqOnErr); break;
    default: break;
  }
  update_irq();
  return Resp::okay;
}

void Gpio::update_irq() {
  const bool level = ((in_ & ~dir_ & irq_en_ & 0xffu) != 0) ||
                     ((irq_en_ & kIrqOnErr) != 0 && err_ != 0);
  if (level != irq_level_) {
    irq_level_ = level;
    if (irq_) irq_(level);
  }
}

// ---------------------------------------------------------------------------
// VGA

Vga::Vga(Kernel& kernel, Reader reader, Gpio* gpio)
    : kernel_(kernel), reader_(std::move(reader)), gpio_(gpio) {}

Cycle Vga::frame_period(std::uint64_t freq_hz) {
  const auto num = static_cast<unsigned __int128>(freq_hz) * kHTotal * kVTotal;
  return static_cast<Cycle>((num + kPixelClockHz / 2) / kPixelClockHz);
}

Resp Vga::read32(Addr offset, std::uint32_t& value) {
  switch (offset) {
    case kCtrl: value = enabled_ ? 1 : 0; break;
    case kFbLo: value = static_cast<std::uint32_t>(fb_); break;
    case kFbHi: value = static_cast<std::uint32_t>(fb_ >> 32); break;
    case kFrames: value = frames_; break;
    default: value = 0; break;
  }
  return Resp::okay;
}

Resp Vga::write32(Addr offset, std::uint32_t value) {
  switch (offset) {
    case kCtrl:
      if ((value & 1u) != 0 && !enabled_) start();
      if ((value & 1u) == 0 && enabled_) stop();
      break;
    case kFbLo: fb_ = (fb_ & ~Addr{0xffffffff}) | value; break;
    case kFbHi: fb_ = (fb_ & 0xffffffffu) | (Addr{value} << 32); break;
    default: break;
  }
  return Resp::okay;
}

void Vga::start() {
  enabled_ = true;
  next_ = kernel_.schedule_in(frame_period(kernel_.clock().freq_hz), [this] { frame(); });
}

void Vga::stop() {
  enabled_ = false;
  if (next_) kernel_.cancel(*next_);
  next_.reset();
}

void Vga::frame() {
  next_.reset();
  std::vector<std::uint8_t> pixels(kFrameBytes);
  if (!reader_ || !reader_(fb_, pixels)) {
    kernel_.tracer().emit(kernel_.now(), TraceKind::vga, "fault fb=0x{:x}", fb_);
    enabled_ = false;
    if (gpio_ != nullptr) gpio_->raise_error(Gpio::kErrVga);
    return;
  }
  ++frames_;
  kernel_.counters().dram_bytes_rd += kFrameBytes;
  kernel_.tracer().emit(kernel_.now(), TraceKind::vga, "frame n={} fb=0x{:x}", frames_, fb_);
  if (on_frame_) on_frame_(frames_, pixels);
  if (dump_dir_) {
    const auto path = *dump_dir_ / fmt::format("frame_{:06}.ppm", frames_);
    std::ofstream out(path, std::ios::binary);
    const std::string ppm = to_ppm(pixels, kWidth, kHeight);
    out.write(ppm.data(), static_cast<std::streamsize>(ppm.size()));
  }
  next_ = kernel_.schedule_in(frame_period(kernel_.clock().freq_hz), [this] { frame(); });
}

std::string Vga::to_ppm(std::span<const std::uint8_t> rgb565, unsigned width, unsigned height) {
  std::string out = fmt::format("P6\n{} {}\n255\n", width, height);
  const std::size_t pixels = std::size_t{width} * height;
  out.reserve(out.size() + pixels * 3);
  for (std::size_t i = 0; i < pixels; ++i) {
    const unsigned p = rgb565[2 * i] | (unsigned{rgb565[2 * i + 1]} << 8);
    const unsigned r = (p >> 11) & 0x1f, g = (p >> 5) & 0x3f, b = p & 0x1f;
    out += static_cast<char>((r << 3) | (r >> 2));
    out += static_cast<char>((g << 2) | (g >> 4));
    out += static_cast<char>((b << 3) | (b >> 2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CLINT

std::optional<Cycle> Clint::mtip_cycle() const {
  if (mtip() || mtimecmp_ == ~std::uint64_t{0}) return std::nullopt;
  return mtimecmp_ - static_cast<std::uint64_t>(offset_);
}

Resp Clint::read32(Addr offset, std::uint32_t& value) {
  switch (offset) {
    case kMsip: value = msip_ ? 1 : 0; break;
    case kMtimecmp: value = static_cast<std::uint32_t>(mtimecmp_); break;
    case kMtimecmp + 4: value = static_cast<std::uint32_t>(mtimecmp_ >> 32); break;
    case kMtime: value = static_cast<std::uint32_t>(mtime()); break;
    case kMtime + 4: value = static_cast<std::uint32_t>(mtime() >> 32); break;
    default: value = 0; break;
  }
  return Resp::okay;
}

Resp Clint::write32(Addr offset, std::uint32_t value) {
  auto set_mtime = [&](std::uint64_t t) {
    offset_ = static_cast<std::int64_t>(t - kernel_.now());
  };
  switch (offset) {
    case kMsip:
      msip_ = (value & 1u) != 0;
      if (msip_line_) msip_line_(msip_);
      break;
    case kMtimecmp: mtimecmp_ = (mtimecmp_ & ~std::uint64_t{0xffffffff}) | value; break;
    case kMtimecmp + 4:
      mtimecmp_ = (mtimecmp_ & 0xffffffffu) | (std::uint64_t{value} << 32);
      break;
    case kMtime: set_mtime((mtime() & ~std::uint64_t{0xffffffff}) | value); break;
    case kMtime + 4: set_mtime((mtime() & 0xffffffffu) | (std::uint64_t{value} << 32)); break;
    default: break;
  }
  kernel_.tracer().emit(kernel_.now(), TraceKind::irq, "clint write off=0x{:x} val=0x{:x}",
                        offset, value);
  return Resp::okay;
}

// ---------------------------------------------------------------------------
// PLIC

Plic::Plic(Kernel& kernel) : kernel_(kernel) {
  priority_.fill(1);
  priority_[0] = 0;
}

void Plic::set_level(unsigned id, bool level) {
  if (id == 0 || id >= kSources) return;
  const std::uint32_t bit = 1u << id;
  level_ = level ? (level_ | bit) : (level_ & ~bit);
  if (level && (in_flight_ & bit) == 0) pending_ |= bit;
  update();
}

void Plic::pulse(unsigned id) {
  if (id == 0 || id >= kSources) return;
  const std::uint32_t bit = 1u << id;
  ++pulses_[id];
  if ((in_flight_ & bit) != 0) {
    deferred_ |= bit;
  } else {
    pending_ |= bit;
  }
  update();
}

std::uint32_t Plic::best(unsigned ctx) const {
  std::uint32_t best_id = 0;
  std::uint32_t best_prio = threshold_[ctx];
  const std::uint32_t candidates = pending_ & enable_[ctx];
  for (unsigned id = 1; id < kSources; ++id) {
    if ((candidates >> id & 1u) != 0 && priority_[id] > best_prio) {
      best_prio = priority_[id];
      best_id = id;
    }
  }
  return best_id;
}

std::uint32_t Plic::claim(unsigned ctx) {
  const std::uint32_t id = best(ctx);
  if (id != 0) {
    pending_ &= ~(1u << id);
    in_flight_ |= 1u << id;
  }
  kernel_.tracer().emit(kernel_.now(), TraceKind::irq, "plic claim ctx={} id={}", ctx, id);
  update();
  return id;
}

void Plic::complete(unsigned ctx, std::uint32_t id) {
  if (id == 0 || id >= kSources || (in_flight_ & (1u << id)) == 0) {
    kernel_.tracer().emit(kernel_.now(), TraceKind::irq, "plic complete ignored ctx={} id={}",
                          ctx, id);
    return;
  }
  const std::uint32_t bit = 1u << id;
  in_flight_ &= ~bit;
  if ((level_ & bit) != 0 || (deferred_ & bit) != 0) pending_ |= bit;
  deferred_ &= ~bit;
  kernel_.tracer().emit(kernel_.now(), TraceKind::irq, "plic complete ctx={} id={}", ctx, id);
  update();
}

void Plic::update() {
  for (unsigned ctx = 0; ctx < kContexts; ++ctx) {
    const bool level = best(ctx) != 0;
    if (level != out_[ctx]) {
      out_[ctx] = level;
      if (lines_[ctx]) lines_[ctx](level);
    }
  }
}

Resp Plic::read32(Addr offset, std::uint32_t& value) {
  value = 0;
  if (offset < kSources * 4) {
    value = priority_[offset / 4];
  } else if (offset == kPending) {
    value = pending_;
  } else if (offset >= kEnableBase && offset < kEnableBase + kContexts * kEnableStride) {
    if ((offset - kEnableBase) % kEnableStride == 0) {
      value = enable_[(offset - kEnableBase) / kEnableStride];
    }
  } else if (offset >= kContextBase && offset < kContextBase + kContexts * kContextStride) {
    const unsigned ctx = static_cast<unsigned>((offset - kContextBase) / kContextStride);
    const Addr reg = (offset - kContextBase) % kContextStride;
    if (reg == 0) value = threshold_[ctx];
    if (reg == 4) value = claim(ctx);
  }
  return Resp::okay;
}

Resp Plic::write32(Addr offset, std::uint32_t value) {
  if (offset < kSources * 4) {
    if (offset != 0) priority_[offset / 4] = value & 7u;
  } else if (offset >= kEnableBase && offset < kEnableBase + kContexts * kEnableStride) {
    if ((offset - kEnableBase) % kEnableStride == 0) {
      enable_[(offset - kEnableBase) / kEnableStride] = value & ~1u;
    }
  } else if (offset >= kContextBase && offset < kContextBase + kContexts * kContextStride) {
    const unsigned ctx = static_cast<unsigned>((offset - kContextBase) / kContextStride);
    const Addr reg = (offset - kContextBase) % kContextStride;
    if (reg == 0) threshold_[ctx] = value & 7u;
    if (reg == 4) complete(ctx, value);
  }
  update();
  return Resp::okay;
}

// ---------------------------------------------------------------------------
// Host bridges

void UartBridge::attach(Kernel& kernel, Uart& uart) {
  uart.set_sink([this](std::uint8_t b) { write_byte(b); });
  kernel.add_boundary_hook([inbox = inbox_, &uart] {
    std::vector<std::uint8_t> bytes;
    {
      std::lock_guard lock(inbox->mu);
      bytes.swap(inbox->bytes);
    }
    if (!bytes.empty()) uart.inject(bytes);
    return inbox->open.load() && uart.rx_irq_enabled();
  });
}

StdioUartBridge::StdioUartBridge(bool read_stdin) {
  if (!read_stdin) {
    inbox_->open = false;
    return;
  }
  std::thread([inbox = inbox_] {
    std::uint8_t buf[256];
    for (;;) {
      const ssize_t n = ::read(STDIN_FILENO, buf, sizeof buf);
      if (n <= 0) break;
      std::lock_guard lock(inbox->mu);
      inbox->bytes.insert(inbox->bytes.end(), buf, buf + n);
    }
    inbox->open = false;
  }).detach();
}

void StdioUartBridge::write_byte(std::uint8_t b) {
  std::fputc(b, stdout);
  std::fflush(stdout);
}

TcpUartBridge::TcpUartBridge(std::uint16_t port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw LinkError("uart bridge: socket() failed");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 1) != 0) {
    ::close(listen_fd_);
    throw LinkError(fmt::format("uart bridge: cannot listen on port {}", port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  thread_ = std::thread([this] { serve(); });
}

TcpUartBridge::~TcpUartBridge() {
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (const int fd = client_fd_.load(); fd >= 0) ::shutdown(fd, SHUT_RDWR);
  if (thread_.joinable()) thread_.join();
  ::close(listen_fd_);
  if (const int fd = client_fd_.load(); fd >= 0) ::close(fd);
}

void TcpUartBridge::serve() {
  const int fd = ::accept(listen_fd_, nullptr, nullptr);
  if (fd < 0) {
    inbox_->open = false;
    return;
  }
  client_fd_ = fd;
  std::uint8_t buf[256];
  for (;;) {
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) break;
    std::lock_guard lock(inbox_->mu);
    inbox_->bytes.insert(inbox_->bytes.end(), buf, buf + n);
  }
  inbox_->open = false;
}

void TcpUartBridge::write_byte(std::uint8_t b) {
  // Output produced before a client connects is dropped.
  if (const int fd = client_fd_.load(); fd >= 0) ::send(fd, &b, 1, MSG_NOSIGNAL);
}

}  // namespace basilisk
