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

#include "basilisk/dma.hpp"

#include <algorithm>

namespace basilisk {

DmaEngine::DmaEngine(Kernel& kernel, Target& bus) : kernel_(kernel), bus_(bus) {}

bool DmaEngine::submit(const DmaJob& job) {
  if (status_ == DmaStatus::busy) return false;
  job_ = job;
  status_ = DmaStatus::busy;
  err_addr_ = 0;
  row_ = 0;
  row_off_ = 0;
  started_ = kernel_.now();
  kernel_.tracer().emit(kernel_.now(), TraceKind::dma,
                        "start src=0x{:x} dst=0x{:x} size={} reps={} sstride={} dstride={}",
                        job.src, job.dst, job.size, job.reps, job.src_stride, job.dst_stride);
  if (job.size == 0 || job.reps == 0) {
    finish(DmaStatus::error, job.src);
    return true;
  }
  plan_chunk();
  kernel_.schedule_in(0, [this] { step(); });
  return true;
}

void DmaEngine::clear() {
  if (status_ != DmaStatus::busy) status_ = DmaStatus::idle;
}

void DmaEngine::plan_chunk() {
  Chunk c;
  c.src = job_.src + static_cast<Addr>(static_cast<std::int64_t>(row_) * job_.src_stride) + row_off_;
  c.dst = job_.dst + static_cast<Addr>(static_cast<std::int64_t>(row_) * job_.dst_stride) + row_off_;
  c.len = std::min<std::uint64_t>(kChunkBytes, job_.size - row_off_);
  // Keep buffered copies equivalent to a byte-serial copy when the
  // destination trails the source by less than a chunk.
  if (c.dst > c.src && c.dst - c.src < c.len) c.len = c.dst - c.src;
  c.buf.resize(c.len);
  c.reads = split_bursts(c.src, c.len);
  c.writes = split_bursts(c.dst, c.len);
  chunk_ = std::move(c);
}

void DmaEngine::step() {
  if (status_ != DmaStatus::busy) return;
  Chunk& c = chunk_;
  const std::size_t total = c.reads.size() + c.writes.size();
  while (c.next < total) {
    const bool is_read = c.next < c.reads.size();
    const BurstSpan& b = is_read ? c.reads[c.next] : c.writes[c.next - c.reads.size()];
    const Addr base = is_read ? c.src : c.dst;
    std::span<std::uint8_t> data(c.buf.data() + (b.addr - base), b.bytes());
    Transaction t = is_read ? Transaction::read(b.addr, data, MasterId::dma)
                            : Transaction::write(b.addr, data, MasterId::dma);
    t.len_beats = b.len_beats;
    t.beat_bytes = b.beat_bytes;
    const Response r = bus_.access(t);
    if (r.resp == Resp::pending) {
      kernel_.schedule_in(kRetryCycles, [this] { step(); });
      return;
    }
    if (r.resp != Resp::okay) {
      kernel_.tracer().emit(kernel_.now(), TraceKind::dma, "error addr=0x{:x} resp={}", b.addr,
                            to_string(r.resp));
      finish(DmaStatus::error, b.addr);
      return;
    }
    (is_read ? c.read_cycles : c.write_cycles) += r.cycles;
    ++c.next;
  }

  const Cycle cost = std::max<Cycle>(1, std::max(c.read_cycles, c.write_cycles));
  bytes_moved_ += c.len;
  kernel_.counters().dma_bytes += c.len;
  row_off_ += c.len;
  if (row_off_ == job_.size) {
    row_off_ = 0;
    ++row_;
  }
  const bool last = row_ == job_.reps;
  kernel_.schedule_in(cost, [this, last] {
    if (last) {
      finish(DmaStatus::done);
    } else {
      plan_chunk();
      step();
    }
  });
}

void DmaEngine::finish(DmaStatus st, Addr err) {
  status_ = st;
  err_addr_ = err;
  busy_cycles_ += kernel_.now() - started_;
  ++jobs_;
  ++kernel_.counters().dma_irqs;
  kernel_.tracer().emit(kernel_.now(), TraceKind::dma, "{} bytes={}",
                        st == DmaStatus::done ? "done" : "fail", bytes_moved_);
  if (irq_) irq_();
}

Resp DmaEngine::read32(Addr offset, std::uint32_t& value) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  switch (offset) {
    case kSrcLo: value = lo(cfg_.src); break;
    case kSrcHi: value = hi(cfg_.src); break;
    case kDstLo: value = lo(cfg_.dst); break;
    case kDstHi: value = hi(cfg_.dst); break;
    case kSize: value = cfg_.size; break;
    case kReps: value = cfg_.reps; break;
    case kSrcStride: value = lo(static_cast<std::uint64_t>(cfg_.src_stride)); break;
    case kDstStride: value = lo(static_cast<std::uint64_t>(cfg_.dst_stride)); break;
    case kCtrl: value = 0; break;
    case kStatus: value = static_cast<std::uint32_t>(status_); break;
    case kErrLo: value = lo(err_addr_); break;
    case kErrHi: value = hi(err_addr_); break;
    default: value = 0; break;
  }
  return Resp::okay;
}

Resp DmaEngine::write32(Addr offset, std::uint32_t value) {
  auto set_lo = [&](Addr& a) { a = (a & ~Addr{0xffffffff}) | value; };
  auto set_hi = [&](Addr& a) { a = (a & 0xffffffffu) | (Addr{value} << 32); };
  switch (offset) {
    case kSrcLo: set_lo(cfg_.src); break;
    case kSrcHi: set_hi(cfg_.src); break;
    case kDstLo: set_lo(cfg_.dst); break;
    case kDstHi: set_hi(cfg_.dst); break;
    case kSize: cfg_.size = value; break;
    case kReps: cfg_.reps = value; break;
    case kSrcStride: cfg_.src_stride = static_cast<std::int32_t>(value); break;
    case kDstStride: cfg_.dst_stride = static_cast<std::int32_t>(value); break;
    case kCtrl:
      if ((value & kCtrlClear) != 0) clear();
      if ((value & kCtrlStart) != 0) submit(cfg_);
      break;
    default: break;
  }
  return Resp::okay;
}

}  // namespace basilisk
