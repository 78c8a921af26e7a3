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

// Straight-line reference interpreter used to cross-check the simulator core.
// It shares no code with the core: its own decoder, compressed expansion,
// CSR file, trap logic, sv39 walker (no TLB) and FP layer.

#include <array>
#include <cstdint>
#include <vector>

namespace basilisk::ref {

enum class Mode : std::uint8_t { U = 0, S = 1, M = 3 };

struct Event {
  enum Kind : std::uint8_t { retired, trapped, waiting } kind = retired;
  std::uint64_t cause = 0;
  std::uint64_t tval = 0;
};

class RefHart {
 public:
  RefHart(std::uint64_t mem_base, std::size_t mem_size);

  void reset(std::uint64_t pc);
  Event step();

  /// CSR value as seen by an M-mode read; false when unimplemented.
  bool csr(unsigned num, std::uint64_t& out) const;
  /// Unchecked CSR write (test setup); false when unimplemented.
  bool write_csr(unsigned num, std::uint64_t v) { return csr_store(num, v); }

  std::uint64_t mem_base() const { return base_; }
  std::vector<std::uint8_t>& memory() { return mem_; }
  const std::vector<std::uint8_t>& memory() const { return mem_; }

  // Architectural state, public for test setup and comparison.
  std::uint64_t pc = 0;
  std::array<std::uint64_t, 32> x{};
  std::array<std::uint64_t, 32> f{};
  Mode mode = Mode::M;
  std::uint64_t mstatus = 0;  // without SD
  std::uint64_t medeleg = 0, mideleg = 0, mie = 0, mtvec = 0, mscratch = 0;
  std::uint64_t mepc = 0, mcause = 0, mtval = 0, mcounteren = 0;
  std::uint64_t stvec = 0, sscratch = 0, sepc = 0, scause = 0, stval = 0, scounteren = 0;
  std::uint64_t satp = 0;
  std::uint64_t fflags = 0, frm = 0;
  std::uint64_t instret = 0;
  std::int64_t mcycle_delta = 0;
  std::uint64_t sw_pending = 0;   // software-writable mip bits
  std::uint64_t ext_pending = 0;  // lines driven from outside
  bool reserved = false;
  std::uint64_t reserved_addr = 0;
  bool sleeping = false;
  std::uint64_t fp_ops = 0;

  // Supplied by the harness before each step.
  std::uint64_t now_cycle = 0;
  std::uint64_t now_time = 0;
  /// Physical range that accepts AMOs; everything when lo == hi.
  std::uint64_t amo_lo = 0, amo_hi = 0;

  std::uint64_t pending() const { return sw_pending | ext_pending; }

 private:
  struct Fault {
    bool hit = false;
    std::uint64_t cause = 0;
    std::uint64_t tval = 0;
  };

  void enter_trap(std::uint64_t cause, std::uint64_t tval, bool irq);
  int interrupt_to_take() const;
  Mode effective_data_mode() const;
  bool xlate(std::uint64_t va, int kind, std::uint64_t& pa);
  bool phys_read(std::uint64_t pa, unsigned n, std::uint64_t& v) const;
  bool phys_write(std::uint64_t pa, unsigned n, std::uint64_t v);
  bool vload(std::uint64_t va, unsigned n, std::uint64_t& v, bool lr = false);
  bool vstore(std::uint64_t va, unsigned n, std::uint64_t v);

  bool exec32(std::uint32_t w, unsigned len, std::uint32_t tval_raw);
  bool exec_amo(std::uint32_t w);
  bool exec_system(std::uint32_t w);
  bool exec_fp(std::uint32_t w);
  bool csr_op(std::uint32_t w);
  bool csr_store(unsigned num, std::uint64_t v);
  bool bad() {
    fault_ = {true, 2, raw_};
    return false;
  }
  bool raise(std::uint64_t c, std::uint64_t tv) {
    fault_ = {true, c, tv};
    return false;
  }
  void setx(unsigned r, std::uint64_t v) {
    if (r) x[r] = v;
  }
  void dirty() { mstatus |= 3ull << 13; }
  bool fp_on() const { return ((mstatus >> 13) & 3) != 0; }
  void setf(unsigned r, std::uint64_t v) {
    f[r] = v;
    dirty();
  }
  void sets(unsigned r, std::uint32_t v) { setf(r, 0xffffffff00000000ull | v); }
  std::uint32_t gets(unsigned r) const;
  void flags(unsigned fl) {
    if (fl) {
      fflags |= fl;
      dirty();
    }
  }

  std::uint64_t base_;
  std::vector<std::uint8_t> mem_;
  std::uint64_t npc_ = 0;
  std::uint32_t raw_ = 0;
  Fault fault_;
  bool wait_ = false;
  bool instret_written_ = false;
};

/// Expands a 16-bit parcel to its 32-bit equivalent; 0 when reserved.
std::uint32_t expand_compressed(std::uint16_t c);

}  // namespace basilisk::ref
