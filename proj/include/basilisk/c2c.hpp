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

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "basilisk/interconnect.hpp"
#include "basilisk/sim_kernel.hpp"

namespace basilisk::c2c {

inline constexpr std::uint8_t kMagic = 0xC2;
inline constexpr std::uint16_t kMaxLen = 4096;

enum class Kind : std::uint8_t {
  read_req = 1,
  write_req = 2,
  read_resp = 3,
  write_resp = 4,
  error_resp = 5,
};

const char* to_string(Kind k);

struct Frame {
  Kind kind = Kind::read_req;
  std::uint8_t tag = 0;
  Addr addr = 0;          // requests only
  std::uint16_t len = 0;  // bytes requested / carried / written
  std::vector<std::uint8_t> payload;  // write_req and read_resp

  bool operator==(const Frame&) const = default;
};

constexpr bool is_request(Kind k) { return k == Kind::read_req || k == Kind::write_req; }
constexpr bool has_payload(Kind k) { return k == Kind::write_req || k == Kind::read_resp; }

/// CRC-16/CCITT-FALSE: polynomial 0x1021, initial value 0xFFFF, no reflection.
std::uint16_t crc16(std::span<const std::uint8_t> bytes);

/// Encoded size of a frame of this kind and length.
std::size_t frame_size(Kind kind, std::uint16_t len);

/// Throws std::invalid_argument when the frame violates the wire contract
/// (len > 4096, zero-length request, payload size mismatch).
std::vector<std::uint8_t> encode(const Frame& f);

struct DecodeError {
  std::uint8_t kind = 0;  // raw kind byte of the rejected frame
  std::uint8_t tag = 0;   // raw tag byte of the rejected frame
  std::string why;
};

/// Incremental decoder over a byte stream. After a bad frame it drops the
/// leading magic byte and rescans for the next one.
class StreamDecoder {
 public:
  using Item = std::variant<Frame, DecodeError>;

  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete frame or error; nullopt when more bytes are needed.
  std::optional<Item> next();
  std::size_t buffered() const { return buf_.size(); }

 private:
  std::deque<std::uint8_t> buf_;
};

/// Decodes exactly one frame from `bytes`.
std::variant<Frame, DecodeError> decode(std::span<const std::uint8_t> bytes);

/// One direction of the serial link: bytes leave at `bits_per_cycle`.
class LinkModel {
 public:
  explicit LinkModel(std::uint32_t bits_per_cycle = 1) : bits_per_cycle_(bits_per_cycle) {}

  /// Queues `bytes` for transmission no earlier than `now`; returns the
  /// cycle at which the last bit has left.
  Cycle transmit(Cycle now, std::size_t bytes);
  Cycle busy_until() const { return busy_until_; }
  std::uint64_t wire_bytes() const { return wire_bytes_; }
  std::uint32_t bits_per_cycle() const { return bits_per_cycle_; }

 private:
  std::uint32_t bits_per_cycle_;
  Cycle busy_until_ = 0;
  std::uint64_t wire_bytes_ = 0;
};

/// Reliable message transport between two simulator instances.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(std::vector<std::uint8_t> msg) = 0;
  /// Blocks until a message arrives. Throws LinkError when the peer is gone.
  virtual std::vector<std::uint8_t> receive() = 0;
};

/// In-process transport pair for running two instances on two threads.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_pipe_pair();

/// TCP transport; listen() blocks until the peer connects.
std::unique_ptr<Transport> tcp_listen(std::uint16_t port);
std::unique_ptr<Transport> tcp_connect(const std::string& host, std::uint16_t port);

struct LinkStats {
  std::uint64_t frames_tx = 0;
  std::uint64_t frames_rx = 0;
  std::uint64_t payload_tx = 0;  // write_req / read_resp payload bytes sent
  std::uint64_t payload_rx = 0;
  std::uint64_t requests_served = 0;
  std::uint64_t crc_errors = 0;
};

/// Chip-to-chip endpoint. As a crossbar Target it serves the local remote
/// window; as a RegisterDevice it exposes the link configuration registers.
/// Frames are exchanged with the peer at quantum boundaries, so both
/// instances advance in lockstep.
class Endpoint final : public Target, public RegisterDevice {
 public:
  static constexpr Addr kPeerBaseLo = 0x0, kPeerBaseHi = 0x4, kLinkStatus = 0x8;
  static constexpr std::uint32_t kStatusAttached = 1, kStatusBusy = 2;

  /// `window_base` is the local address of the remote window; `local_bus`
  /// serves requests arriving from the peer.
  Endpoint(Kernel& kernel, Target& local_bus, Addr window_base, Addr window_size,
           std::uint32_t bits_per_cycle = 1);

  /// Exchanges a hello with the peer and registers the boundary hook.
  void attach(std::unique_ptr<Transport> transport);
  /// Tells the peer this side is gone. Idempotent.
  void detach();
  bool attached() const { return attached_; }

  void set_irq(std::function<void()> f) { irq_ = std::move(f); }
  void set_peer_base(Addr base) { peer_base_ = base; }
  Addr peer_base() const { return peer_base_; }
  /// Flips a CRC bit in the next `n` outgoing frames (fault injection).
  /// TODO: add a response timeout so a corrupted length field cannot stall
  /// the requester; until then injection leaves the header intact.
  void corrupt_next_frames(unsigned n) { corrupt_ = n; }

  const LinkStats& stats() const { return stats_; }
  const LinkModel& link() const { return tx_; }

  Response access(const Transaction& txn) override;
  Resp read32(Addr offset, std::uint32_t& value) override;
  Resp write32(Addr offset, std::uint32_t value) override;

 private:
  struct Outstanding {
    Kind kind = Kind::read_req;
    Addr addr = 0;
    std::uint64_t bytes = 0;
    MasterId master = MasterId::core;
    std::uint8_t tag = 0;
    bool done = false;
    Resp resp = Resp::okay;
    std::vector<std::uint8_t> data;
  };
  struct Chunk {
    Cycle arrival = 0;
    std::vector<std::uint8_t> bytes;
  };

  bool boundary();
  void send_frame(const Frame& f, Cycle not_before);
  void on_bytes(std::span<const std::uint8_t> bytes);
  void on_frame(const Frame& f);
  void on_error(const DecodeError& e);
  void serve(const Frame& req);
  void complete(Resp resp, std::span<const std::uint8_t> data);
  void fail_outstanding(Resp resp);

  Kernel& kernel_;
  Target& local_;
  Addr window_base_;
  Addr window_size_;
  Addr peer_base_ = 0x8000'0000;
  LinkModel tx_;
  std::unique_ptr<Transport> transport_;
  bool attached_ = false;
  bool hook_added_ = false;
  bool resyncing_ = false;
  unsigned corrupt_ = 0;
  std::uint8_t next_tag_ = 0;
  std::optional<Outstanding> out_;
  std::vector<Chunk> outbox_;
  StreamDecoder decoder_;
  LinkStats stats_;
  std::function<void()> irq_;
};

}  // namespace basilisk::c2c
