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

#include "basilisk/hyperram.hpp"

#include <cstring>

namespace basilisk {

HyperRam::HyperRam(Kernel& kernel, Addr base, const DramConfig& cfg)
    : kernel_(kernel), base_(base), cfg_(cfg), mem_(cfg.size(), 0), chip_accesses_(cfg.chips, 0) {
  if (cfg.chips == 0 || cfg.bytes_per_chip == 0 || cfg.bytes_per_cycle == 0) {
    throw ConfigError("dram geometry must be non-zero");
  }
}

Response HyperRam::access(const Transaction& txn) {
  const std::uint64_t len = txn.bytes();
  if (txn.addr < base_ || txn.addr - base_ + len > mem_.size() || len == 0) {
    return {Resp::decerr, 1};
  }
  Addr off = txn.addr - base_;
  std::uint8_t* host = txn.data.data();
  std::uint64_t left = len;
  Cycle cycles = 0;
  while (left > 0) {
    const unsigned chip = chip_of(off);
    const Addr chip_end = Addr{chip + 1} * cfg_.bytes_per_chip;
    const std::uint64_t part = std::min<std::uint64_t>(left, chip_end - off);
    if (txn.kind == TxnKind::read) {
      std::memcpy(host, mem_.data() + off, part);
    } else {
      std::memcpy(mem_.data() + off, host, part);
    }
    cycles += service_cycles(part);
    ++chip_accesses_[chip];
    off += part;
    host += part;
    left -= part;
  }
  auto& c = kernel_.counters();
  (txn.kind == TxnKind::read ? c.dram_bytes_rd : c.dram_bytes_wr) += len;
  kernel_.tracer().emit(kernel_.now(), TraceKind::dram, "op={} addr=0x{:x} bytes={} cycles={}",
                        txn.kind == TxnKind::read ? "rd" : "wr", txn.addr, len, cycles);
  return {Resp::okay, cycles};
}

void HyperRam::load_image(Addr offset, std::span<const std::uint8_t> bytes) {
  if (offset > mem_.size() || bytes.size() > mem_.size() - offset) {
    throw LoadError(fmt::format("dram load of {} bytes at offset 0x{:x} out of range", bytes.size(),
                                offset));
  }
  std::memcpy(mem_.data() + offset, bytes.data(), bytes.size());
}

std::vector<std::uint8_t> HyperRam::dump(Addr offset, std::size_t len) const {
  if (offset > mem_.size() || len > mem_.size() - offset) {
    throw LoadError(fmt::format("dram dump of {} bytes at offset 0x{:x} out of range", len, offset));
  }
  return {mem_.begin() + static_cast<std::ptrdiff_t>(offset),
          mem_.begin() + static_cast<std::ptrdiff_t>(offset + len)};
}

}  // namespace basilisk
