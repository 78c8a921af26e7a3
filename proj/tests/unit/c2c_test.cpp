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
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "basilisk/c2c.hpp"

namespace basilisk::c2c {
namespace {

std::vector<std::uint8_t> bytes_of(const char* s) {
  return {reinterpret_cast<const std::uint8_t*>(s), reinterpret_cast<const std::uint8_t*>(s) + std::strlen(s)};
}

TEST(Crc16, CheckValue) {
  EXPECT_EQ(crc16(bytes_of("123456789")), 0x29B1);
  EXPECT_EQ(crc16({}), 0xFFFF);
}

TEST(Codec, FrameSizes) {
  EXPECT_EQ(frame_size(Kind::read_req, 64), 15u);
  EXPECT_EQ(frame_size(Kind::write_req, 64), 15u + 64);
  EXPECT_EQ(frame_size(Kind::read_resp, 64), 7u + 64);
  EXPECT_EQ(frame_size(Kind::read_resp, 8), 15u);
  EXPECT_EQ(frame_size(Kind::write_resp, 64), 7u);
  EXPECT_EQ(frame_size(Kind::error_resp, 0), 7u);
}

TEST(Codec, LayoutIsLittleEndianWithTrailingCrc) {
  const Frame f{Kind::read_req, 9, 0x0102030405060708, 0x0140, {}};
  const auto b = encode(f);
  ASSERT_EQ(b.size(), 15u);
  EXPECT_EQ(b[0], kMagic);
  EXPECT_EQ(b[1], 1);
  EXPECT_EQ(b[2], 9);
  EXPECT_EQ(b[3], 0x08);
  EXPECT_EQ(b[10], 0x01);
  EXPECT_EQ(b[11], 0x40);
  EXPECT_EQ(b[12], 0x01);
  const std::uint16_t crc = crc16(std::span(b).first(13));
  EXPECT_EQ(b[13], crc & 0xff);
  EXPECT_EQ(b[14], crc >> 8);
}

TEST(Codec, RoundTripsEveryKind) {
  std::mt19937 rng(3);
  for (Kind k : {Kind::read_req, Kind::write_req, Kind::read_resp, Kind::write_resp, Kind::error_resp}) {
    for (std::uint16_t len : {1, 7, 4096}) {
      Frame f;
      f.kind = k;
      f.tag = static_cast<std::uint8_t>(rng());
      f.addr = is_request(k) ? (std::uint64_t{rng()} << 32 | rng()) : 0;
      f.len = k == Kind::error_resp ? 0 : len;
      if (has_payload(k)) {
        f.payload.resize(len);
        for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
      }
      const auto wire = encode(f);
      EXPECT_EQ(wire.size(), frame_size(k, f.len));
      const auto back = decode(wire);
      ASSERT_TRUE(std::holds_alternative<Frame>(back)) << std::get<DecodeError>(back).why;
      EXPECT_EQ(std::get<Frame>(back), f);
    }
  }
}

TEST(Codec, RejectsContractViolations) {
  EXPECT_THROW(encode(Frame{Kind::read_req, 0, 0, 0, {}}), std::invalid_argument);
  EXPECT_THROW(encode(Frame{Kind::read_req, 0, 0, 4097, {}}), std::invalid_argument);
  EXPECT_THROW(encode(Frame{Kind::write_req, 0, 0, 2, {1}}), std::invalid_argument);
  EXPECT_THROW(encode(Frame{static_cast<Kind>(9), 0, 0, 0, {}}), std::invalid_argument);
}

TEST(Codec, EverySingleBitFlipIsDetected) {
  const auto good = encode(Frame{Kind::write_req, 4, 0x1000, 3, {0xaa, 0xbb, 0xcc}});
  for (std::size_t i = 1; i < good.size(); ++i) {
    for (int bit = 0; bit < 8; ++bit) {
      auto bad = good;
      bad[i] ^= static_cast<std::uint8_t>(1 << bit);
      EXPECT_TRUE(std::holds_alternative<DecodeError>(decode(bad))) << i << ":" << bit;
    }
  }
}

TEST(Codec, DecodeDiagnostics) {
  auto why = [](std::vector<std::uint8_t> b) {
    const auto r = decode(b);
    return std::holds_alternative<DecodeError>(r) ? std::get<DecodeError>(r).why : std::string("ok");
  };
  EXPECT_EQ(why({0x00, 0x01}), "missing magic");
  auto f = encode(Frame{Kind::write_resp, 1, 0, 8, {}});
  EXPECT_EQ(why({f.begin(), f.end() - 1}), "truncated frame");
  f.push_back(0);
  EXPECT_EQ(why(f), "trailing bytes");
}

TEST(StreamDecoder, ReassemblesAcrossFeeds) {
  const auto a = encode(Frame{Kind::read_resp, 1, 0, 4, {1, 2, 3, 4}});
  const auto b = encode(Frame{Kind::write_resp, 2, 0, 16, {}});
  std::vector<std::uint8_t> all(a);
  all.insert(all.end(), b.begin(), b.end());
  StreamDecoder d;
  std::vector<Frame> got;
  for (std::uint8_t byte : all) {
    d.feed(std::span(&byte, 1));
    while (auto item = d.next()) got.push_back(std::get<Frame>(*item));
  }
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].tag, 1);
  EXPECT_EQ(got[1].kind, Kind::write_resp);
  EXPECT_EQ(d.buffered(), 0u);
}

TEST(StreamDecoder, ResyncsAfterCorruptFrame) {
  auto bad = encode(Frame{Kind::write_req, 5, 0x40, 2, {7, 8}});
  bad[12] ^= 0xff;
  const auto good = encode(Frame{Kind::read_req, 6, 0x80, 8, {}});
  StreamDecoder d;
  const std::uint8_t noise[] = {0x11, 0x22};
  d.feed(noise);
  d.feed(bad);
  d.feed(good);
  auto first = d.next();
  ASSERT_TRUE(first && std::holds_alternative<DecodeError>(*first));
  EXPECT_EQ(std::get<DecodeError>(*first).tag, 5);
  std::optional<Frame> found;
  while (auto item = d.next()) {
    if (auto* f = std::get_if<Frame>(&*item)) found = *f;
  }
  ASSERT_TRUE(found);
  EXPECT_EQ(found->tag, 6);
  EXPECT_EQ(found->addr, 0x80u);
}

TEST(LinkModel, SerializesAtBitsPerCycle) {
  LinkModel one(1);
  EXPECT_EQ(one.transmit(100, 15), 220u);
  // Back-to-back frames queue behind the busy wire.
  EXPECT_EQ(one.transmit(150, 7), 276u);
  EXPECT_EQ(one.transmit(1000, 1), 1008u);
  EXPECT_EQ(one.wire_bytes(), 23u);
  LinkModel four(4);
  EXPECT_EQ(four.transmit(0, 3), 6u);
}

TEST(PipeTransport, DeliversInOrderAndReportsClosedPeer) {
  auto [a, b] = make_pipe_pair();
  a->send({1});
  a->send({2, 3});
  EXPECT_EQ(b->receive(), (std::vector<std::uint8_t>{1}));
  EXPECT_EQ(b->receive(), (std::vector<std::uint8_t>{2, 3}));
  a.reset();
  EXPECT_THROW(b->receive(), LinkError);
}

// --- endpoint pair ---------------------------------------------------------

constexpr Addr kWindow = 0x4000'0000;
constexpr Addr kPeerRam = 0x8000'0000;
constexpr Addr kRamSize = 0x10000;

class Ram final : public Target {
 public:
  Ram() : mem(kRamSize, 0) {}
  Response access(const Transaction& t) override {
    if (t.addr < kPeerRam || t.addr + t.bytes() > kPeerRam + kRamSize) return {Resp::decerr, 1};
    std::uint8_t* p = mem.data() + (t.addr - kPeerRam);
    if (t.kind == TxnKind::read) {
      std::memcpy(t.data.data(), p, t.bytes());
    } else {
      std::memcpy(p, t.data.data(), t.bytes());
    }
    return {Resp::okay, 2};
  }
  std::vector<std::uint8_t> mem;
};

class Idle final : public Steppable {
 public:
  HartTick tick(const StopConditions&) override { return {HartTick::Kind::waiting, 0, StopReason::idle}; }
  std::optional<Cycle> wake_cycle() const override { return std::nullopt; }
  void fill_result(RunResult&) const override {}
};

struct Op {
  TxnKind kind;
  Addr addr;
  std::vector<std::uint8_t> data;
  Resp resp = Resp::okay;
};

// Issues each op through the endpoint and spins while it is pending.
class Requester final : public Steppable {
 public:
  Requester(Endpoint& ep, std::vector<Op>& ops) : ep_(ep), ops_(ops) {}
  HartTick tick(const StopConditions&) override {
    if (next_ == ops_.size()) return {HartTick::Kind::stop, 0, StopReason::exit};
    Op& op = ops_[next_];
    const Transaction t = op.kind == TxnKind::read ? Transaction::read(op.addr, op.data)
                                                   : Transaction::write(op.addr, op.data);
    const Response r = ep_.access(t);
    if (r.resp == Resp::pending) return {HartTick::Kind::waiting, 0, StopReason::idle};
    op.resp = r.resp;
    ++next_;
    return {HartTick::Kind::ran, 1, StopReason::trap};
  }
  std::optional<Cycle> wake_cycle() const override { return std::nullopt; }
  void fill_result(RunResult&) const override {}

 private:
  Endpoint& ep_;
  std::vector<Op>& ops_;
  std::size_t next_ = 0;
};

struct Pair {
  Pair() : near(nk, near_bus, kWindow, 0x1000'0000), far(fk, ram, kWindow, 0x1000'0000) {
    nk.set_quantum(256);
    fk.set_quantum(256);
    auto [a, b] = make_pipe_pair();
    std::thread t([&, bb = std::move(b)]() mutable { far.attach(std::move(bb)); });
    near.attach(std::move(a));
    t.join();
  }
  // Runs the requester to completion while the far side serves.
  RunResult run(std::vector<Op>& ops) {
    std::thread t([&] {
      Idle idle;
      fk.run(idle, 1'000'000'000);
    });
    Requester req(near, ops);
    const RunResult r = nk.run(req, 1'000'000'000);
    near.detach();
    t.join();
    return r;
  }
  Kernel nk, fk;
  Ram near_bus, ram;
  Endpoint near, far;
};

TEST(Endpoint, HandshakeRejectsQuantumMismatch) {
  Kernel a, b;
  a.set_quantum(100);
  b.set_quantum(200);
  Ram ra, rb;
  Endpoint ea(a, ra, kWindow, 0x1000), eb(b, rb, kWindow, 0x1000);
  auto [ta, tb] = make_pipe_pair();
  std::thread t([&, t2 = std::move(tb)]() mutable { EXPECT_THROW(eb.attach(std::move(t2)), LinkError); });
  EXPECT_THROW(ea.attach(std::move(ta)), LinkError);
  t.join();
}

TEST(Endpoint, UnattachedWindowDecodeErrors) {
  Kernel k;
  Ram r;
  Endpoint ep(k, r, kWindow, 0x1000);
  std::uint8_t buf[8] = {};
  EXPECT_EQ(ep.access(Transaction::read(kWindow, buf)).resp, Resp::decerr);
  EXPECT_EQ(ep.access(Transaction::read(kWindow + 0x1000, buf)).resp, Resp::decerr);
}

TEST(Endpoint, RandomLoopbacksAreByteExact) {
  Pair p;
  std::mt19937_64 rng(11);
  std::vector<Op> ops;
  std::vector<std::uint8_t> shadow(kRamSize, 0);
  for (int i = 0; i < 200; ++i) {
    const std::size_t len = 1 + rng() % 512;
    const Addr off = rng() % (kRamSize - len);
    Op w{TxnKind::write, kWindow + off, std::vector<std::uint8_t>(len)};
    for (auto& b : w.data) b = static_cast<std::uint8_t>(rng());
    std::memcpy(shadow.data() + off, w.data.data(), len);
    ops.push_back(w);
    ops.push_back({TxnKind::read, kWindow + off, std::vector<std::uint8_t>(len)});
  }
  p.run(ops);
  for (std::size_t i = 0; i < ops.size(); i += 2) {
    ASSERT_EQ(ops[i].resp, Resp::okay);
    ASSERT_EQ(ops[i + 1].resp, Resp::okay);
    EXPECT_EQ(ops[i + 1].data, ops[i].data) << "op " << i;
  }
  EXPECT_EQ(p.ram.mem, shadow);
  EXPECT_EQ(p.far.stats().requests_served, ops.size());
}

TEST(Endpoint, WireRateNeverExceedsOneBitPerCycle) {
  Pair p;
  std::vector<Op> ops;
  for (int i = 0; i < 64; ++i) {
    ops.push_back({TxnKind::write, kWindow + 0x100 * i, std::vector<std::uint8_t>(256, 0x5a)});
  }
  const RunResult r = p.run(ops);
  const auto& tx = p.near.link();
  EXPECT_LE(tx.wire_bytes() * 8, tx.busy_until());
  EXPECT_LE(tx.busy_until(), r.cycle);
  // Payload is strictly less than what crossed the wire.
  EXPECT_LT(p.near.stats().payload_tx, tx.wire_bytes());
  EXPECT_EQ(p.near.stats().payload_tx, 64u * 256);
}

TEST(Endpoint, FarSideBusErrorBecomesSlaveError) {
  Pair p;
  std::vector<Op> ops{{TxnKind::read, kWindow + kRamSize, std::vector<std::uint8_t>(4)},
                      {TxnKind::read, kWindow, std::vector<std::uint8_t>(4)}};
  p.run(ops);
  EXPECT_EQ(ops[0].resp, Resp::slverr);
  EXPECT_EQ(ops[1].resp, Resp::okay);
}

TEST(Endpoint, CorruptedRequestIsReportedAndLinkRecovers) {
  Pair p;
  unsigned irqs = 0;
  p.near.set_irq([&] { ++irqs; });
  p.near.corrupt_next_frames(1);
  std::vector<Op> ops{{TxnKind::write, kWindow + 0x40, std::vector<std::uint8_t>(8, 0x77)},
                      {TxnKind::write, kWindow + 0x40, std::vector<std::uint8_t>(8, 0x66)}};
  p.run(ops);
  EXPECT_EQ(ops[0].resp, Resp::slverr);
  EXPECT_EQ(ops[1].resp, Resp::okay);
  EXPECT_EQ(p.far.stats().crc_errors, 1u);
  EXPECT_EQ(p.ram.mem[0x40], 0x66);
}

TEST(Endpoint, RegistersExposePeerBaseAndStatus) {
  Kernel k;
  Ram r;
  Endpoint ep(k, r, kWindow, 0x1000);
  ASSERT_EQ(ep.write32(Endpoint::kPeerBaseLo, 0x1234'0000), Resp::okay);
  ASSERT_EQ(ep.write32(Endpoint::kPeerBaseHi, 0x2), Resp::okay);
  EXPECT_EQ(ep.peer_base(), 0x2'1234'0000u);
  std::uint32_t v = 1;
  ep.read32(Endpoint::kLinkStatus, v);
  EXPECT_EQ(v, 0u);
}

}  // namespace
}  // namespace basilisk::c2c
