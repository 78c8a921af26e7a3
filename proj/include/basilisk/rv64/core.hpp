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
#include <cstdint>
#include <optional>
#include <span>

#include "basilisk/rv64/isa.hpp"
#include "basilisk/types.hpp"

namespace basilisk::rv64 {

enum class Priv : std::uint8_t { U = 0, S = 1, M = 3 };

enum class MemKind : std::uint8_t { fetch, load, store, ptw };

struct BusResult {
  Resp resp = Resp::okay;
  Cycle cycles = 0;
};

/// The hart's view of the physical memory system.
class CoreBus {
 public:
  virtual ~CoreBus() = default;
  virtual BusResult read(Addr paddr, std::span<std::uint8_t> data, MemKind kind) = 0;
  virtual BusResult write(Addr paddr, std::span<const std::uint8_t> data) = 0;
  /// Whether atomic read-modify-write is supported at this physical address.
  virtual bool amo_allowed(Addr) const { return true; }
  virtual Cycle fence_data() { return 0; }
  virtual Cycle fence_instr() { return 0; }
  virtual std::uint64_t cycle() const = 0;
  virtual std::uint64_t time() const = 0;
};

namespace cause {
inline constexpr std::uint64_t kInsnMisaligned = 0;
inline constexpr std::uint64_t kInsnAccess = 1;
inline constexpr std::uint64_t kIllegal = 2;
inline constexpr std::uint64_t kBreakpoint = 3;
inline constexpr std::uint64_t kLoadMisaligned = 4;
inline constexpr std::uint64_t kLoadAccess = 5;
inline constexpr std::uint64_t kStoreMisaligned = 6;
inline constexpr std::uint64_t kStoreAccess = 7;
inline constexpr std::uint64_t kEcallU = 8;
inline constexpr std::uint64_t kEcallS = 9;
inline constexpr std::uint64_t kEcallM = 11;
inline constexpr std::uint64_t kInsnPage = 12;
inline constexpr std::uint64_t kLoadPage = 13;
inline constexpr std::uint64_t kStorePage = 15;

inline constexpr std::uint64_t kInterrupt = std::uint64_t{1} << 63;
inline constexpr std::uint64_t kSsi = 1;
inline constexpr std::uint64_t kMsi = 3;
inline constexpr std::uint64_t kSti = 5;
inline constexpr std::uint64_t kMti = 7;
inline constexpr std::uint64_t kSei = 9;
inline constexpr std::uint64_t kMei = 11;
}  // namespace cause

namespace csr {
inline constexpr unsigned kFflags = 0x001, kFrm = 0x002, kFcsr = 0x003;
inline constexpr unsigned kCycle = 0xc00, kTime = 0xc01, kInstret = 0xc02;
inline constexpr unsigned kSstatus = 0x100, kSie = 0x104, kStvec = 0x105, kScounteren = 0x106;
inline constexpr unsigned kSscratch = 0x140, kSepc = 0x141, kScause = 0x142, kStval = 0x143;
inline constexpr unsigned kSip = 0x144, kSatp = 0x180;
inline constexpr unsigned kMvendorid = 0xf11, kMarchid = 0xf12, kMimpid = 0xf13, kMhartid = 0xf14;
inline constexpr unsigned kMstatus = 0x300, kMisa = 0x301, kMedeleg = 0x302, kMideleg = 0x303;
inline constexpr unsigned kMie = 0x304, kMtvec = 0x305, kMcounteren = 0x306;
inline constexpr unsigned kMscratch = 0x340, kMepc = 0x341, kMcause = 0x342, kMtval = 0x343;
inline constexpr unsigned kMip = 0x344, kMcycle = 0xb00, kMinstret = 0xb02;
}  // namespace csr

namespace mstatus {
inline constexpr std::uint64_t kSie = 1u << 1;
inline constexpr std::uint64_t kMie = 1u << 3;
inline constexpr std::uint64_t kSpie = 1u << 5;
inline constexpr std::uint64_t kMpie = 1u << 7;
inline constexpr std::uint64_t kSpp = 1u << 8;
inline constexpr unsigned kMppShift = 11;
inline constexpr std::uint64_t kMpp = 3u << kMppShift;
inline constexpr unsigned kFsShift = 13;
inline constexpr std::uint64_t kFs = 3u << kFsShift;
inline constexpr std::uint64_t kMprv = 1u << 17;
inline constexpr std::uint64_t kSum = 1u << 18;
inline constexpr std::uint64_t kMxr = 1u << 19;
inline constexpr std::uint64_t kTvm = 1u << 20;
inline constexpr std::uint64_t kTw = 1u << 21;
inline constexpr std::uint64_t kTsr = 1u << 22;
inline constexpr std::uint64_t kUxl = std::uint64_t{2} << 32;
inline constexpr std::uint64_t kSxl = std::uint64_t{2} << 34;
inline constexpr std::uint64_t kSd = std::uint64_t{1} << 63;
}  // namespace mstatus

/// RV64 with the I, M, A, F, D and C extension bits.
inline constexpr std::uint64_t kMisa = (std::uint64_t{2} << 62) | (1u << 0) | (1u << 2) |
                                       (1u << 3) | (1u << 5) | (1u << 8) | (1u << 12);

struct CoreState {
  Addr pc = 0;
  std::array<std::uint64_t, 32> x{};
  std::array<std::uint64_t, 32> f{};
  Priv priv = Priv::M;
  std::optional<Addr> reservation;

  std::uint64_t mstatus = 0;
  std::uint64_t medeleg = 0;
  std::uint64_t mideleg = 0;
  std::uint64_t mie = 0;
  std::uint64_t mip_sw = 0;    // software-writable pending bits
  std::uint64_t irq_lines = 0; // pending bits driven by interrupt controllers
  std::uint64_t mtvec = 0;
  std::uint64_t mscratch = 0;
  std::uint64_t mepc = 0;
  std::uint64_t mcause = 0;
  std::uint64_t mtval = 0;
  std::uint64_t mcounteren = 0;
  std::uint64_t stvec = 0;
  std::uint64_t sscratch = 0;
  std::uint64_t sepc = 0;
  std::uint64_t scause = 0;
  std::uint64_t stval = 0;
  std::uint64_t scounteren = 0;
  std::uint64_t satp = 0;
  std::uint64_t fflags = 0;
  std::uint64_t frm = 0;
  std::uint64_t instret = 0;
  std::int64_t cycle_offset = 0;
  bool wfi = false;

  std::uint64_t mip() const { return mip_sw | irq_lines; }
};

struct StepResult {
  enum class Kind : std::uint8_t { retired, trapped, waiting, breakpoint };
  Kind kind = Kind::retired;
  std::uint64_t cause = 0;  // mcause encoding (interrupt bit included)
  std::uint64_t tval = 0;
  Cycle stall = 0;
  Addr pc = 0;
  Instruction insn;
};

struct Translation {
  bool ok = false;
  Addr paddr = 0;
  std::uint64_t cause = 0;
  Cycle cycles = 0;
};

class Core {
 public:
  static constexpr std::size_t kTlbEntries = 16;

  explicit Core(CoreBus& bus) : bus_(bus) { reset(0); }

  void reset(Addr pc);
  CoreState& state() { return s_; }
  const CoreState& state() const { return s_; }

  /// Executes one instruction or takes one trap. A `waiting` result has no
  /// architectural side effects (WFI, or a memory access still in flight).
  StepResult step();

  /// When set, ebreak reports `breakpoint` instead of trapping.
  void set_ebreak_halts(bool on) { ebreak_halts_ = on; }

  /// Debug CSR access without privilege checks. nullopt / false when the CSR
  /// is not implemented.
  std::optional<std::uint64_t> read_csr(unsigned num) const;
  bool write_csr(unsigned num, std::uint64_t value);

  /// Address translation at the current effective privilege.
  Translation translate(Addr vaddr, MemKind access);
  void take_trap(std::uint64_t cause, std::uint64_t tval, bool interrupt);

  void set_irq_line(std::uint64_t cause_bit, bool level);
  /// Highest-priority interrupt that would be taken now, as a cause number.
  std::optional<std::uint64_t> pending_interrupt() const;
  void flush_tlb();

  std::uint64_t fp_ops() const { return fp_ops_; }
  std::uint64_t tlb_misses() const { return tlb_misses_; }

 private:
  enum class Outcome : std::uint8_t { ok, trap, pending, wait, breakpoint };

  struct TlbEntry {
    bool valid = false;
    std::uint64_t vpn = 0;
    unsigned level = 0;
    std::uint64_t pte = 0;
  };

  Outcome fetch(Instruction& insn);
  Outcome execute(const Instruction& in);
  Outcome exec_fp(const Instruction& in);
  Outcome exec_system(const Instruction& in);
  Outcome exec_amo(const Instruction& in);
  Outcome raise(std::uint64_t c, std::uint64_t tval) {
    exc_cause_ = c;
    exc_tval_ = tval;
    return Outcome::trap;
  }
  Outcome illegal(const Instruction& in) { return raise(cause::kIllegal, in.raw); }

  Outcome load(Addr va, unsigned size, std::uint64_t& out, bool reserve = false);
  Outcome store(Addr va, unsigned size, std::uint64_t value);

  Priv data_priv() const;
  Translation walk(Addr vaddr, MemKind access, Priv priv);
  bool csr_read(unsigned num, std::uint64_t& value);
  bool csr_write(unsigned num, std::uint64_t value);
  bool fp_enabled() const { return (s_.mstatus & mstatus::kFs) != 0; }
  void mark_fs_dirty() { s_.mstatus |= mstatus::kFs; }
  std::optional<std::uint8_t> resolve_rm(std::uint8_t rm) const;
  std::uint32_t read_s(unsigned r) const;
  void write_s(unsigned r, std::uint32_t v);
  void write_d(unsigned r, std::uint64_t v);
  void write_x(unsigned r, std::uint64_t v) {
    if (r != 0) s_.x[r] = v;
  }
  void accrue(std::uint8_t flags) {
    if (flags != 0) {
      s_.fflags |= flags;
      mark_fs_dirty();
    }
  }

  CoreBus& bus_;
  CoreState s_;
  std::array<TlbEntry, kTlbEntries> tlb_{};
  unsigned tlb_next_ = 0;
  bool ebreak_halts_ = false;
  Addr next_pc_ = 0;
  Cycle stall_ = 0;
  std::uint64_t exc_cause_ = 0;
  std::uint64_t exc_tval_ = 0;
  std::uint64_t fp_ops_ = 0;
  std::uint64_t tlb_misses_ = 0;
};

}  // namespace basilisk::rv64
