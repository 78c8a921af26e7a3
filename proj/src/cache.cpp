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

#include "basilisk/cache.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <set>

namespace basilisk {

void CacheConfig::validate() const {
  if (ways == 0 || ways > 32 || sets == 0 || line_bytes < 8 || !is_pow2(sets) ||
      !is_pow2(line_bytes)) {
    throw ConfigError(fmt::format("invalid cache geometry: {} ways x {} sets x {} B", ways, sets,
                                  line_bytes));
  }
}

CacheConfig CacheConfig::from_capacity(Addr capacity, unsigned ways, unsigned line_bytes,
                                       Cycle hit_latency) {
  if (ways == 0 || line_bytes == 0 || capacity % (Addr{ways} * line_bytes) != 0) {
    throw ConfigError(fmt::format("capacity {} not divisible into {} ways of {} B lines", capacity,
                                  ways, line_bytes));
  }
  CacheConfig c;
  c.ways = ways;
  c.line_bytes = line_bytes;
  c.sets = static_cast<unsigned>(capacity / (Addr{ways} * line_bytes));
  c.hit_latency = hit_latency;
  c.validate();
  return c;
}

Cache::Cache(std::string name, const CacheConfig& cfg, Target& downstream, Kernel& kernel,
             Counters counters, MasterId master)
    : name_(std::move(name)),
      cfg_(cfg),
      down_(downstream),
      kernel_(kernel),
      counters_(counters),
      master_(master) {
  cfg_.validate();
  meta_.resize(std::size_t{cfg_.sets} * cfg_.ways);
  for (unsigned s = 0; s < cfg_.sets; ++s) {
    for (unsigned w = 0; w < cfg_.ways; ++w) meta(s, w).lru_rank = w;
  }
  data_.assign(cfg_.capacity(), 0);
}

void Cache::touch(unsigned set, unsigned way) {
  const unsigned old = meta(set, way).lru_rank;
  for (unsigned w = 0; w < cfg_.ways; ++w) {
    if (meta(set, w).lru_rank < old) ++meta(set, w).lru_rank;
  }
  meta(set, way).lru_rank = 0;
}

unsigned Cache::pick_victim(unsigned set) const {
  unsigned victim = cfg_.ways;
  for (unsigned w = 0; w < cfg_.ways; ++w) {
    if (way_masked(w)) continue;
    if (!line(set, w).valid) return w;
    if (victim == cfg_.ways || line(set, w).lru_rank > line(set, victim).lru_rank) victim = w;
  }
  return victim;
}

Cycle Cache::write_back(unsigned set, unsigned way, Resp* resp) {
  CacheLine& l = meta(set, way);
  if (!l.valid || !l.dirty) return 0;
  const Addr addr = line_addr(l.tag, set);
  auto txn = Transaction::write(addr, {line_data(set, way), cfg_.line_bytes}, master_);
  Response r = down_.access(txn);
  if (resp != nullptr) *resp = r.resp;
  l.dirty = false;
  ++writebacks_;
  if (name_ == "llc") ++kernel_.counters().llc_writebacks;
  kernel_.tracer().emit(kernel_.now(), TraceKind::llc, "cache={} op=writeback line=0x{:x}", name_,
                        addr);
  return r.cycles;
}

LookupResult Cache::lookup_access(Addr addr, AccessKind kind, std::span<std::uint8_t> data) {
  LookupResult res;
  const Addr line_no = addr / cfg_.line_bytes;
  const unsigned offset = static_cast<unsigned>(addr % cfg_.line_bytes);
  const unsigned set = static_cast<unsigned>(line_no % cfg_.sets);
  const Addr tag = line_no / cfg_.sets;

  if (usable_ways() == 0) {
    // Every way is scratchpad: traffic goes straight to the next level.
    res.bypassed = true;
    auto txn = kind == AccessKind::read ? Transaction::read(addr, data, master_)
                                        : Transaction::write(addr, data, master_);
    Response r = down_.access(txn);
    res.resp = r.resp;
    res.stall_cycles = r.cycles;
    return res;
  }

  ++lookups_;
  auto& counters = kernel_.counters();
  unsigned way = cfg_.ways;
  for (unsigned w = 0; w < cfg_.ways; ++w) {
    if (!way_masked(w) && line(set, w).valid && line(set, w).tag == tag) {
      way = w;
      break;
    }
  }

  if (way != cfg_.ways) {
    res.hit = true;
    if (counters_.hits) ++(counters.*counters_.hits);
  } else {
    if (counters_.misses) ++(counters.*counters_.misses);
    if (kind == AccessKind::write && cfg_.write_through) {
      auto txn = Transaction::write(addr, data, master_);
      Response r = down_.access(txn);
      res.resp = r.resp;
      res.stall_cycles = cfg_.hit_latency + r.cycles;
      return res;
    }
    way = pick_victim(set);
    CacheLine& victim = meta(set, way);
    Cycle penalty = 0;
    if (victim.valid) {
      res.evicted_line = line_addr(victim.tag, set);
      res.evicted_dirty = victim.dirty;
      penalty += write_back(set, way);
      victim.valid = false;
    }
    const Addr base = line_no * cfg_.line_bytes;
    auto refill = Transaction::read(base, {line_data(set, way), cfg_.line_bytes}, master_);
    Response r = down_.access(refill);
    penalty += r.cycles;
    res.stall_cycles += penalty;
    if (r.resp != Resp::okay) {
      res.resp = r.resp;
      res.stall_cycles += cfg_.hit_latency;
      return res;
    }
    victim.valid = true;
    victim.dirty = false;
    victim.tag = tag;
  }

  kernel_.tracer().emit(kernel_.now(), TraceKind::llc, "cache={} op={} addr=0x{:x} {}", name_,
                        kind == AccessKind::read ? "rd" : "wr", addr, res.hit ? "hit" : "miss");

  touch(set, way);
  std::uint8_t* p = line_data(set, way) + offset;
  if (kind == AccessKind::read) {
    std::memcpy(data.data(), p, data.size());
  } else {
    std::memcpy(p, data.data(), data.size());
    if (cfg_.write_through) {
      auto txn = Transaction::write(addr, data, master_);
      res.stall_cycles += down_.access(txn).cycles;
    } else {
      meta(set, way).dirty = true;
    }
  }
  res.stall_cycles += cfg_.hit_latency;
  return res;
}

Response Cache::access(const Transaction& txn) {
  Response out{Resp::okay, cfg_.hit_latency};
  const AccessKind kind = txn.kind == TxnKind::read ? AccessKind::read : AccessKind::write;
  Addr addr = txn.addr;
  std::size_t pos = 0;
  const std::size_t total = txn.bytes();
  while (pos < total) {
    const std::size_t in_line = cfg_.line_bytes - addr % cfg_.line_bytes;
    const std::size_t n = std::min(in_line, total - pos);
    LookupResult r = lookup_access(addr, kind, txn.data.subspan(pos, n));
    out.cycles += r.bypassed ? r.stall_cycles : r.stall_cycles - cfg_.hit_latency;
    if (r.resp != Resp::okay) {
      out.resp = r.resp;
      return out;
    }
    addr += n;
    pos += n;
  }
  return out;
}

Cycle Cache::configure_spm(std::uint32_t way_mask) {
  way_mask &= (cfg_.ways >= 32 ? ~0u : ((1u << cfg_.ways) - 1));
  const std::uint32_t newly = way_mask & ~spm_mask_;
  const std::uint32_t freed = spm_mask_ & ~way_mask;
  Cycle cycles = 0;
  for (unsigned w = 0; w < cfg_.ways; ++w) {
    if ((newly >> w) & 1u) {
      for (unsigned s = 0; s < cfg_.sets; ++s) {
        cycles += write_back(s, w);
        meta(s, w).valid = false;
      }
    }
    if ((freed >> w) & 1u) {
      for (unsigned s = 0; s < cfg_.sets; ++s) meta(s, w).valid = false;
    }
  }
  spm_mask_ = way_mask;
  kernel_.tracer().emit(kernel_.now(), TraceKind::llc, "cache={} op=spm_mask mask=0x{:x}", name_,
                        way_mask);
  return cycles;
}

Cycle Cache::flush() {
  Cycle cycles = 0;
  for (unsigned s = 0; s < cfg_.sets; ++s) {
    for (unsigned w = 0; w < cfg_.ways; ++w) {
      cycles += write_back(s, w);
      meta(s, w).valid = false;
    }
  }
  return cycles;
}

void Cache::invalidate_all() {
  for (auto& l : meta_) {
    l.valid = false;
    l.dirty = false;
  }
}

std::optional<unsigned> Cache::find(Addr addr) const {
  const Addr line_no = addr / cfg_.line_bytes;
  const auto set = static_cast<unsigned>(line_no % cfg_.sets);
  const Addr tag = line_no / cfg_.sets;
  for (unsigned w = 0; w < cfg_.ways; ++w) {
    if (!way_masked(w) && line(set, w).valid && line(set, w).tag == tag) return w;
  }
  return std::nullopt;
}

void Cache::peek(Addr addr, std::span<std::uint8_t> out) const {
  const auto way = find(addr);
  if (!way) return;
  const auto set = static_cast<unsigned>((addr / cfg_.line_bytes) % cfg_.sets);
  const std::uint8_t* p =
      data_.data() + (Addr{*way} * cfg_.sets + set) * cfg_.line_bytes + addr % cfg_.line_bytes;
  std::copy(p, p + out.size(), out.begin());
}

void Cache::poke(Addr addr, std::span<const std::uint8_t> in) {
  const auto way = find(addr);
  if (!way) return;
  const auto set = static_cast<unsigned>((addr / cfg_.line_bytes) % cfg_.sets);
  std::copy(in.begin(), in.end(), line_data(set, *way) + addr % cfg_.line_bytes);
}

Resp Cache::spm_access(Addr offset, AccessKind kind, std::span<std::uint8_t> data) {
  if (offset > cfg_.capacity() || data.size() > cfg_.capacity() - offset) return Resp::slverr;
  const Addr last = offset + (data.empty() ? 0 : data.size() - 1);
  for (Addr w = offset / way_bytes(); w <= last / way_bytes(); ++w) {
    if (!way_masked(static_cast<unsigned>(w))) return Resp::slverr;
  }
  // The [way][set][line] layout makes the scratchpad offset a data-array index.
  std::uint8_t* p = data_.data() + offset;
  if (kind == AccessKind::read) {
    std::memcpy(data.data(), p, data.size());
  } else {
    std::memcpy(p, data.data(), data.size());
  }
  return Resp::okay;
}

Response ScratchpadTarget::access(const Transaction& txn) {
  const AccessKind kind = txn.kind == TxnKind::read ? AccessKind::read : AccessKind::write;
  return {llc_.spm_access(txn.addr - base_, kind, txn.data), llc_.config().hit_latency};
}

Resp LlcConfigRegs::read32(Addr offset, std::uint32_t& value) {
  switch (offset) {
    case kSpmMask: value = llc_.spm_mask(); return Resp::okay;
    case kFlush: value = 0; return Resp::okay;
    case kStatus: value = kernel_.now() < busy_until_ ? 1u : 0u; return Resp::okay;
    default: return Resp::slverr;
  }
}

Resp LlcConfigRegs::write32(Addr offset, std::uint32_t value) {
  switch (offset) {
    case kSpmMask: {
      const Cycle c = llc_.configure_spm(value);
      busy_until_ = std::max(busy_until_, kernel_.now()) + c;
      return Resp::okay;
    }
    case kFlush:
      if (value & 1u) {
        const Cycle c = llc_.flush();
        busy_until_ = std::max(busy_until_, kernel_.now()) + c;
      }
      return Resp::okay;
    case kStatus: return Resp::okay;
    default: return Resp::slverr;
  }
}

bool Cache::partition_invariant() const {
  for (unsigned s = 0; s < cfg_.sets; ++s) {
    for (unsigned w = 0; w < cfg_.ways; ++w) {
      if (way_masked(w) && line(s, w).valid) return false;
    }
  }
  return true;
}

bool Cache::unique_tags() const {
  for (unsigned s = 0; s < cfg_.sets; ++s) {
    std::set<Addr> tags;
    for (unsigned w = 0; w < cfg_.ways; ++w) {
      if (line(s, w).valid && !tags.insert(line(s, w).tag).second) return false;
    }
  }
  return true;
}

std::size_t Cache::valid_lines() const {
  return static_cast<std::size_t>(
      std::count_if(meta_.begin(), meta_.end(), [](const CacheLine& l) { return l.valid; }));
}

std::size_t Cache::usable_ways() const {
  return cfg_.ways - static_cast<std::size_t>(std::popcount(spm_mask_));
}

}  // namespace basilisk
