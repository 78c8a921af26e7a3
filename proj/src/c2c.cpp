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

#include "basilisk/c2c.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include <fmt/format.h>

namespace basilisk::c2c {

const char* to_string(Kind k) {
  switch (k) {
    case Kind::read_req: return "read_req";
    case Kind::write_req: return "write_req";
    case Kind::read_resp: return "read_resp";
    case Kind::write_resp: return "write_resp";
    case Kind::error_resp: return "error_resp";
  }
  return "?";
}

std::uint16_t crc16(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xffff;
  for (std::uint8_t b : bytes) {
    crc ^= static_cast<std::uint16_t>(b << 8);
    for (int i = 0; i < 8; ++i) {
      crc = (crc & 0x8000) != 0 ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

namespace {

constexpr bool valid_kind(std::uint8_t k) { return k >= 1 && k <= 5; }

std::size_t header_size(Kind k) { return 3 + (is_request(k) ? 8 : 0) + 2; }

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, unsigned n) {
  for (unsigned i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename It>
std::uint64_t get_le(It p, unsigned n) {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < n; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(p[i])} << (8 * i);
  return v;
}

}  // namespace

std::size_t frame_size(Kind kind, std::uint16_t len) {
  return header_size(kind) + (has_payload(kind) ? len : 0) + 2;
}

std::vector<std::uint8_t> encode(const Frame& f) {
  if (!valid_kind(static_cast<std::uint8_t>(f.kind))) throw std::invalid_argument("bad frame kind");
  if (f.len > kMaxLen) throw std::invalid_argument("frame length exceeds 4096");
  if (is_request(f.kind) && f.len == 0) throw std::invalid_argument("empty request");
  const std::size_t want = has_payload(f.kind) ? f.len : 0;
  if (f.payload.size() != want) throw std::invalid_argument("payload size does not match len");
  std::vector<std::uint8_t> out;
  out.reserve(frame_size(f.kind, f.len));
  out.push_back(kMagic);
  out.push_back(static_cast<std::uint8_t>(f.kind));
  out.push_back(f.tag);
  if (is_request(f.kind)) put_le(out, f.addr, 8);
  put_le(out, f.len, 2);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  put_le(out, crc16(out), 2);
  return out;
}

void StreamDecoder::feed(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<StreamDecoder::Item> StreamDecoder::next() {
  while (!buf_.empty() && buf_.front() != kMagic) buf_.pop_front();
  if (buf_.size() < 3) return std::nullopt;
  const std::uint8_t kind_byte = buf_[1];
  const std::uint8_t tag = buf_[2];
  auto reject = [&](std::string why) -> Item {
    buf_.pop_front();
    return DecodeError{kind_byte, tag, std::move(why)};
  };
  if (!valid_kind(kind_byte)) return reject("bad kind");
  const auto kind = static_cast<Kind>(kind_byte);
  const std::size_t hdr = header_size(kind);
  if (buf_.size() < hdr) return std::nullopt;
  const auto len = static_cast<std::uint16_t>(get_le(buf_.begin() + static_cast<std::ptrdiff_t>(hdr - 2), 2));
  if (len > kMaxLen || (is_request(kind) && len == 0)) return reject("bad length");
  const std::size_t total = frame_size(kind, len);
  if (buf_.size() < total) return std::nullopt;
  std::vector<std::uint8_t> raw(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(total));
  const auto crc = static_cast<std::uint16_t>(get_le(raw.begin() + static_cast<std::ptrdiff_t>(total - 2), 2));
  if (crc16(std::span(raw).first(total - 2)) != crc) return reject("crc mismatch");
  buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(total));
  Frame f;
  f.kind = kind;
  f.tag = tag;
  if (is_request(kind)) f.addr = get_le(raw.begin() + 3, 8);
  f.len = len;
  if (has_payload(kind)) {
    f.payload.assign(raw.begin() + static_cast<std::ptrdiff_t>(hdr),
                     raw.begin() + static_cast<std::ptrdiff_t>(hdr + len));
  }
  return f;
}

std::variant<Frame, DecodeError> decode(std::span<const std::uint8_t> bytes) {
  if (bytes.empty() || bytes[0] != kMagic) return DecodeError{0, 0, "missing magic"};
  StreamDecoder d;
  d.feed(bytes);
  auto item = d.next();
  if (!item) return DecodeError{bytes.size() > 1 ? bytes[1] : std::uint8_t{0}, 0, "truncated frame"};
  if (std::holds_alternative<Frame>(*item) && d.buffered() != 0) {
    return DecodeError{bytes[1], bytes.size() > 2 ? bytes[2] : std::uint8_t{0}, "trailing bytes"};
  }
  return std::visit([](auto&& v) -> std::variant<Frame, DecodeError> { return v; }, *item);
}

Cycle LinkModel::transmit(Cycle now, std::size_t bytes) {
  const Cycle start = std::max(now, busy_until_);
  busy_until_ = start + ceil_div(bytes * 8, bits_per_cycle_);
  wire_bytes_ += bytes;
  return busy_until_;
}

// ---------------------------------------------------------------------------
// Transports

namespace {

struct PipeShared {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> q[2];
  bool closed[2] = {false, false};
};

class PipeTransport final : public Transport {
 public:
  PipeTransport(std::shared_ptr<PipeShared> s, int side) : s_(std::move(s)), side_(side) {}
  ~PipeTransport() override {
    std::lock_guard lock(s_->mu);
    s_->closed[side_] = true;
    s_->cv.notify_all();
  }
  void send(std::vector<std::uint8_t> msg) override {
    std::lock_guard lock(s_->mu);
    s_->q[1 - side_].push_back(std::move(msg));
    s_->cv.notify_all();
  }
  std::vector<std::uint8_t> receive() override {
    std::unique_lock lock(s_->mu);
    s_->cv.wait(lock, [&] { return !s_->q[side_].empty() || s_->closed[1 - side_]; });
    if (s_->q[side_].empty()) throw LinkError("c2c peer closed");
    auto msg = std::move(s_->q[side_].front());
    s_->q[side_].pop_front();
    return msg;
  }

 private:
  std::shared_ptr<PipeShared> s_;
  int side_;
};

class TcpTransport final : public Transport {
 public:
  explicit TcpTransport(int fd) : fd_(fd) {
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpTransport() override { ::close(fd_); }

  void send(std::vector<std::uint8_t> msg) override {
    std::vector<std::uint8_t> framed;
    put_le(framed, msg.size(), 4);
    framed.insert(framed.end(), msg.begin(), msg.end());
    std::size_t off = 0;
    while (off < framed.size()) {
      const ssize_t n = ::send(fd_, framed.data() + off, framed.size() - off, MSG_NOSIGNAL);
      if (n <= 0) throw LinkError("c2c send failed");
      off += static_cast<std::size_t>(n);
    }
  }
  std::vector<std::uint8_t> receive() override {
    std::uint8_t hdr[4];
    read_exact(hdr, 4);
    std::vector<std::uint8_t> msg(get_le(hdr, 4));
    read_exact(msg.data(), msg.size());
    return msg;
  }

 private:
  void read_exact(std::uint8_t* p, std::size_t n) {
    while (n > 0) {
      const ssize_t got = ::recv(fd_, p, n, 0);
      if (got <= 0) throw LinkError("c2c peer closed");
      p += got;
      n -= static_cast<std::size_t>(got);
    }
  }
  int fd_;
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_pipe_pair() {
  auto s = std::make_shared<PipeShared>();
  return {std::make_unique<PipeTransport>(s, 0), std::make_unique<PipeTransport>(s, 1)};
}

std::unique_ptr<Transport> tcp_listen(std::uint16_t port) {
  const int ls = ::socket(AF_INET, SOCK_STREAM, 0);
  if (ls < 0) throw LinkError("c2c: socket() failed");
  const int one = 1;
  ::setsockopt(ls, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(ls, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(ls, 1) != 0) {
    ::close(ls);
    throw LinkError(fmt::format("c2c: cannot listen on port {}", port));
  }
  const int fd = ::accept(ls, nullptr, nullptr);
  ::close(ls);
  if (fd < 0) throw LinkError("c2c: accept() failed");
  return std::make_unique<TcpTransport>(fd);
}

std::unique_ptr<Transport> tcp_connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) {
    throw LinkError(fmt::format("c2c: cannot resolve {}", host));
  }
  int fd = -1;
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw LinkError(fmt::format("c2c: cannot connect to {}:{}", host, port));
  return std::make_unique<TcpTransport>(fd);
}

// ---------------------------------------------------------------------------
// Endpoint

namespace {
enum MsgType : std::uint8_t { kData = 0, kDetach = 1, kHello = 2 };
}

Endpoint::Endpoint(Kernel& kernel, Target& local_bus, Addr window_base, Addr window_size,
                   std::uint32_t bits_per_cycle)
    : kernel_(kernel),
      local_(local_bus),
      window_base_(window_base),
      window_size_(window_size),
      tx_(bits_per_cycle) {
  if (bits_per_cycle == 0) throw ConfigError("c2c bits_per_cycle must be non-zero");
}

void Endpoint::attach(std::unique_ptr<Transport> transport) {
  transport_ = std::move(transport);
  std::vector<std::uint8_t> hello{kHello};
  put_le(hello, kernel_.quantum(), 8);
  transport_->send(hello);
  const auto reply = transport_->receive();
  if (reply.size() != 9 || reply[0] != kHello) throw LinkError("c2c: bad handshake");
  if (get_le(reply.begin() + 1, 8) != kernel_.quantum()) {
    throw LinkError("c2c: peers disagree on the quantum length");
  }
  attached_ = true;
  if (!hook_added_) {
    hook_added_ = true;
    kernel_.add_boundary_hook([this] { return boundary(); });
  }
  kernel_.tracer().emit(kernel_.now(), TraceKind::c2c, "attached");
}

void Endpoint::detach() {
  if (!attached_) return;
  attached_ = false;
  try {
    transport_->send({kDetach});
  } catch (const LinkError&) {
  }
  fail_outstanding(Resp::decerr);
  kernel_.tracer().emit(kernel_.now(), TraceKind::c2c, "detached");
}

bool Endpoint::boundary() {
  if (!attached_) return false;
  std::vector<std::uint8_t> msg{kData};
  put_le(msg, outbox_.size(), 4);
  for (const Chunk& c : outbox_) {
    put_le(msg, c.arrival, 8);
    put_le(msg, c.bytes.size(), 4);
    msg.insert(msg.end(), c.bytes.begin(), c.bytes.end());
  }
  outbox_.clear();
  std::vector<std::uint8_t> reply;
  try {
    transport_->send(std::move(msg));
    reply = transport_->receive();
  } catch (const LinkError&) {
    reply = {kDetach};
  }
  if (reply.empty() || reply[0] != kData) {
    attached_ = false;
    fail_outstanding(Resp::decerr);
    kernel_.tracer().emit(kernel_.now(), TraceKind::c2c, "peer detached");
    if (irq_) irq_();
    return false;
  }
  std::size_t pos = 1;
  const auto count = get_le(reply.begin() + 1, 4);
  pos += 4;
  for (std::uint64_t i = 0; i < count; ++i) {
    const Cycle arrival = get_le(reply.begin() + static_cast<std::ptrdiff_t>(pos), 8);
    const auto len = get_le(reply.begin() + static_cast<std::ptrdiff_t>(pos + 8), 4);
    pos += 12;
    std::vector<std::uint8_t> bytes(reply.begin() + static_cast<std::ptrdiff_t>(pos),
                                    reply.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
    kernel_.schedule(std::max(arrival, kernel_.now()),
                     [this, b = std::move(bytes)] { on_bytes(b); });
  }
  return true;
}

void Endpoint::send_frame(const Frame& f, Cycle not_before) {
  std::vector<std::uint8_t> bytes = encode(f);
  if (corrupt_ > 0) {
    --corrupt_;
    bytes.back() ^= 0x10;
  }
  const Cycle arrival = tx_.transmit(std::max(kernel_.now(), not_before), bytes.size());
  ++stats_.frames_tx;
  if (has_payload(f.kind)) stats_.payload_tx += f.len;
  kernel_.counters().c2c_bytes_tx += bytes.size();
  kernel_.tracer().emit(kernel_.now(), TraceKind::c2c, "tx {} tag={} addr=0x{:x} len={} arrive={}",
                        to_string(f.kind), f.tag, f.addr, f.len, arrival);
  outbox_.push_back({arrival, std::move(bytes)});
}

void Endpoint::on_bytes(std::span<const std::uint8_t> bytes) {
  kernel_.counters().c2c_bytes_rx += bytes.size();
  decoder_.feed(bytes);
  while (auto item = decoder_.next()) {
    if (auto* f = std::get_if<Frame>(&*item)) {
      resyncing_ = false;
      on_frame(*f);
    } else {
      on_error(std::get<DecodeError>(*item));
    }
  }
}

void Endpoint::on_error(const DecodeError& e) {
  ++stats_.crc_errors;
  ++kernel_.counters().c2c_crc_errors;
  kernel_.tracer().emit(kernel_.now(), TraceKind::c2c, "rx error kind={} tag={} why={}", e.kind,
                        e.tag, e.why);
  if (resyncing_) return;
  resyncing_ = true;
  const bool waiting = out_ && !out_->done;
  const bool was_request = e.kind == static_cast<std::uint8_t>(Kind::read_req) ||
                           e.kind == static_cast<std::uint8_t>(Kind::write_req);
  const bool was_response = valid_kind(e.kind) && !was_request;
  if (was_request || (!was_response && !waiting)) {
    send_frame(Frame{Kind::error_resp, e.tag, 0, 0, {}}, kernel_.now());
  } else if (waiting) {
    complete(Resp::slverr, {});
  }
  if (irq_) irq_();
}

void Endpoint::on_frame(const Frame& f) {
  ++stats_.frames_rx;
  if (has_payload(f.kind)) stats_.payload_rx += f.len;
  kernel_.tracer().emit(kernel_.now(), TraceKind::c2c, "rx {} tag={} addr=0x{:x} len={}",
                        to_string(f.kind), f.tag, f.addr, f.len);
  if (is_request(f.kind)) {
    serve(f);
    return;
  }
  if (!out_ || out_->done) return;
  if (f.kind == Kind::error_resp) {
    complete(Resp::slverr, {});
    return;
  }
  if (f.tag != out_->tag) return;
  if (f.kind == Kind::read_resp && out_->kind == Kind::read_req && f.len == out_->bytes) {
    complete(Resp::okay, f.payload);
  } else if (f.kind == Kind::write_resp && out_->kind == Kind::write_req) {
    complete(Resp::okay, {});
  }
}

void Endpoint::serve(const Frame& req) {
  ++stats_.requests_served;
  std::vector<std::uint8_t> buf(req.len);
  if (req.kind == Kind::write_req) buf = req.payload;
  Cycle cycles = 0;
  bool ok = true;
  for (const BurstSpan& b : split_bursts(req.addr, req.len)) {
    std::span<std::uint8_t> data(buf.data() + (b.addr - req.addr), b.bytes());
    Transaction t = req.kind == Kind::read_req ? Transaction::read(b.addr, data, MasterId::c2c)
                                               : Transaction::write(b.addr, data, MasterId::c2c);
    t.len_beats = b.len_beats;
    t.beat_bytes = b.beat_bytes;
    const Response r = local_.access(t);
    cycles += r.cycles;
    if (r.resp != Resp::okay) {
      ok = false;
      break;
    }
  }
  Frame resp;
  resp.tag = req.tag;
  if (!ok) {
    resp.kind = Kind::error_resp;
  } else if (req.kind == Kind::read_req) {
    resp.kind = Kind::read_resp;
    resp.len = req.len;
    resp.payload = std::move(buf);
  } else {
    resp.kind = Kind::write_resp;
    resp.len = req.len;
  }
  send_frame(resp, kernel_.now() + cycles);
}

void Endpoint::complete(Resp resp, std::span<const std::uint8_t> data) {
  out_->done = true;
  out_->resp = resp;
  out_->data.assign(data.begin(), data.end());
}

void Endpoint::fail_outstanding(Resp resp) {
  if (out_ && !out_->done) complete(resp, {});
}

Response Endpoint::access(const Transaction& txn) {
  const Addr off = txn.addr - window_base_;
  if (txn.addr < window_base_ || off + txn.bytes() > window_size_) return {Resp::decerr, 1};
  const Kind kind = txn.kind == TxnKind::read ? Kind::read_req : Kind::write_req;
  if (out_) {
    const bool same = out_->kind == kind && out_->addr == txn.addr &&
                      out_->bytes == txn.bytes() && out_->master == txn.master;
    if (same && out_->done) {
      const Resp r = out_->resp;
      if (r == Resp::okay && kind == Kind::read_req) {
        std::memcpy(txn.data.data(), out_->data.data(), txn.bytes());
      }
      out_.reset();
      return {r, 1};
    }
    if (!out_->done) return {Resp::pending, 0};
    // A finished result its requester never collected; the new request wins.
    out_.reset();
  }
  if (!attached_) return {Resp::decerr, 1};
  if (txn.bytes() > kMaxLen) return {Resp::slverr, 1};

  Frame f;
  f.kind = kind;
  f.tag = next_tag_++;
  f.addr = peer_base_ + off;
  f.len = static_cast<std::uint16_t>(txn.bytes());
  if (kind == Kind::write_req) f.payload.assign(txn.data.begin(), txn.data.end());
  send_frame(f, kernel_.now());
  out_ = Outstanding{kind, txn.addr, txn.bytes(), txn.master, f.tag, false, Resp::okay, {}};
  return {Resp::pending, 0};
}

Resp Endpoint::read32(Addr offset, std::uint32_t& value) {
  switch (offset) {
    case kPeerBaseLo: value = static_cast<std::uint32_t>(peer_base_); break;
    case kPeerBaseHi: value = static_cast<std::uint32_t>(peer_base_ >> 32); break;
    case kLinkStatus:
      value = (attached_ ? kStatusAttached : 0) | (out_ && !out_->done ? kStatusBusy : 0) |
              (static_cast<std::uint32_t>(std::min<std::uint64_t>(stats_.crc_errors, 0xffff)) << 16);
      break;
    default: value = 0; break;
  }
  return Resp::okay;
}

Resp Endpoint::write32(Addr offset, std::uint32_t value) {
  if (offset == kPeerBaseLo) peer_base_ = (peer_base_ & ~Addr{0xffffffff}) | value;
  if (offset == kPeerBaseHi) peer_base_ = (peer_base_ & 0xffffffffu) | (Addr{value} << 32);
  return Resp::okay;
}

}  // namespace basilisk::c2c
