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

#include "basilisk/interconnect.hpp"

#include <algorithm>
#include <cstring>

namespace basilisk {

bool Transaction::well_formed() const {
  return len_beats >= 1 && len_beats <= kMaxBurstBeats && is_pow2(beat_bytes) && beat_bytes <= 8 &&
         data.size() == bytes();
}

namespace {
std::uint32_t natural_beat(Addr addr, std::size_t len) {
  std::uint32_t beat = 8;
  while (beat > 1 && (addr % beat != 0 || len % beat != 0)) beat >>= 1;
  return beat;
}
}  // namespace

Transaction Transaction::read(Addr addr, std::span<std::uint8_t> buf, MasterId m) {
  const std::uint32_t beat = natural_beat(addr, buf.size());
  return Transaction{m, TxnKind::read, addr, static_cast<std::uint32_t>(buf.size() / beat), beat,
                     buf};
}

Transaction Transaction::write(Addr addr, std::span<std::uint8_t> buf, MasterId m) {
  const std::uint32_t beat = natural_beat(addr, buf.size());
  return Transaction{m, TxnKind::write, addr, static_cast<std::uint32_t>(buf.size() / beat), beat,
                     buf};
}

// ---------------------------------------------------------------------------

void AddressMap::add(Region r) {
  if (r.size == 0) throw ConfigError(fmt::format("region '{}' has zero size", r.name));
  if (r.base % 4096 != 0 || r.size % 4096 != 0) {
    throw ConfigError(fmt::format("region '{}' is not 4 KiB aligned", r.name));
  }
  if (r.base + r.size < r.base) throw ConfigError(fmt::format("region '{}' wraps", r.name));
  for (const auto& o : regions_) {
    if (r.base < o.end() && o.base < r.end()) {
      throw ConfigError(fmt::format("region '{}' overlaps '{}'", r.name, o.name));
    }
  }
  auto pos = std::lower_bound(regions_.begin(), regions_.end(), r.base,
                              [](const Region& a, Addr b) { return a.base < b; });
  regions_.insert(pos, std::move(r));
}

const Region* AddressMap::route(Addr addr) const {
  auto it = std::upper_bound(regions_.begin(), regions_.end(), addr,
                             [](Addr a, const Region& r) { return a < r.base; });
  if (it == regions_.begin()) return nullptr;
  --it;
  return it->contains(addr) ? &*it : nullptr;
}

const Region* AddressMap::find(const std::string& name) const {
  for (const auto& r : regions_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::string AddressMap::describe() const {
  std::string s;
  for (const auto& r : regions_) {
    s += fmt::format("map {:<10} base=0x{:09x} size=0x{:08x} bus={}\n", r.name, r.base, r.size,
                     r.bus == Bus::xbar ? "xbar" : "regbus");
  }
  return s;
}

// ---------------------------------------------------------------------------

RegbusResult Regbus::access(const RegbusAccess& acc) {
  ++kernel_.counters().regbus_accesses;
  if (acc.addr % 4 != 0) return {Resp::slverr, 0};
  const Region* r = map_.route(acc.addr);
  if (r == nullptr || r->bus != Bus::regbus) return {Resp::decerr, 0};
  auto it = devices_.find(r->target_id);
  if (it == devices_.end()) return {Resp::decerr, 0};
  RegbusResult res;
  if (acc.kind == TxnKind::read) {
    res.resp = it->second->read32(acc.addr - r->base, res.data);
  } else {
    res.resp = it->second->write32(acc.addr - r->base, acc.data);
  }
  return res;
}

Response RegisterTarget::access(const Transaction& txn) {
  if (txn.len_beats != 1 || (txn.beat_bytes != 4 && txn.beat_bytes != 8) ||
      txn.addr % txn.beat_bytes != 0) {
    return {Resp::slverr, latency_};
  }
  const Addr off = txn.addr - base_;
  for (std::uint32_t w = 0; w < txn.beat_bytes / 4; ++w) {
    std::uint8_t* p = txn.data.data() + 4 * w;
    Resp r;
    if (txn.kind == TxnKind::read) {
      std::uint32_t v = 0;
      r = dev_.read32(off + 4 * w, v);
      std::memcpy(p, &v, 4);
    } else {
      std::uint32_t v;
      std::memcpy(&v, p, 4);
      r = dev_.write32(off + 4 * w, v);
    }
    if (r != Resp::okay) return {r, latency_};
  }
  return {Resp::okay, latency_};
}

// ---------------------------------------------------------------------------

Response Crossbar::submit(const Transaction& txn) {
  if (!txn.well_formed() || txn.crosses_4k()) return {Resp::slverr, 1};
  const Region* r = map_.route(txn.addr);
  if (r == nullptr || !r->contains(txn.addr + txn.bytes() - 1)) return {Resp::decerr, 1};

  if (r->bus == Bus::regbus) {
    if (regbus_ == nullptr) return {Resp::decerr, 1};
    if (txn.len_beats != 1 || txn.beat_bytes != 4) return {Resp::slverr, Regbus::kServiceCycles};
    RegbusAccess acc{txn.addr, txn.kind, 0};
    if (txn.kind == TxnKind::write) std::memcpy(&acc.data, txn.data.data(), 4);
    RegbusResult res = regbus_->access(acc);
    if (txn.kind == TxnKind::read) std::memcpy(txn.data.data(), &res.data, 4);
    return {res.resp, Regbus::kServiceCycles};
  }

  auto it = targets_.find(r->target_id);
  if (it == targets_.end()) return {Resp::decerr, 1};
  Response resp = it->second->access(txn);
  if (resp.resp == Resp::pending) return resp;

  const Cycle transfer = ceil_div(txn.bytes(), port_bytes_);
  resp.cycles += transfer;
  PortStats& ps = stats_[r->target_id];
  ps.bytes += txn.bytes();
  ps.busy_cycles += resp.cycles;
  ++ps.transactions;
  if (std::find(llc_ports_.begin(), llc_ports_.end(), r->target_id) != llc_ports_.end()) {
    kernel_.counters().llc_port_bytes += txn.bytes();
  }
  return resp;
}

// ---------------------------------------------------------------------------

std::vector<BurstSpan> split_bursts(Addr addr, std::uint64_t len, std::uint32_t max_beat) {
  std::vector<BurstSpan> out;
  while (len > 0) {
    std::uint32_t beat = max_beat;
    while (beat > 1 && (addr % beat != 0 || len < beat)) beat >>= 1;
    const std::uint64_t to_boundary = kBurstBoundary - addr % kBurstBoundary;
    std::uint64_t chunk = std::min<std::uint64_t>({len, to_boundary, std::uint64_t{kMaxBurstBeats} * beat});
    // Narrow head beats only until the next full-width alignment.
    if (addr % max_beat != 0) chunk = std::min<std::uint64_t>(chunk, max_beat - addr % max_beat);
    chunk -= chunk % beat;
    const auto beats = static_cast<std::uint32_t>(chunk / beat);
    out.push_back({addr, beats, beat});
    addr += chunk;
    len -= chunk;
  }
  return out;
}

}  // namespace basilisk
