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

#include "basilisk/rv64/core.hpp"

#include <cstring>

#include "basilisk/rv64/fpu.hpp"

namespace basilisk::rv64 {

namespace {

constexpr std::uint64_t kPteV = 1u << 0;
constexpr std::uint64_t kPteR = 1u << 1;
constexpr std::uint64_t kPteW = 1u << 2;
constexpr std::uint64_t kPteX = 1u << 3;
constexpr std::uint64_t kPteU = 1u << 4;
constexpr std::uint64_t kPteA = 1u << 6;
constexpr std::uint64_t kPteD = 1u << 7;

constexpr std::uint64_t kMstatusWritable =
    mstatus::kSie | mstatus::kMie | mstatus::kSpie | mstatus::kMpie | mstatus::kSpp |
    mstatus::kMpp | mstatus::kFs | mstatus::kMprv | mstatus::kSum | mstatus::kMxr |
    mstatus::kTvm | mstatus::kTw | mstatus::kTsr;
constexpr std::uint64_t kSstatusMask = mstatus::kSie | mstatus::kSpie | mstatus::kSpp |
                                       mstatus::kFs | mstatus::kSum | mstatus::kMxr |
                                       mstatus::kUxl | mstatus::kSd;
constexpr std::uint64_t kSstatusWritable =
    mstatus::kSie | mstatus::kSpie | mstatus::kSpp | mstatus::kFs | mstatus::kSum | mstatus::kMxr;
constexpr std::uint64_t kMieMask = 0xaaa;
constexpr std::uint64_t kDelegableIrqs = 0x222;
constexpr std::uint64_t kDelegableExc = 0xb3ff;
constexpr std::uint64_t kBoxMask = 0xffffffff00000000ull;

std::uint64_t sext32(std::uint64_t v) {
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(static_cast<std::int32_t>(v)));
}

std::uint64_t sext_n(std::uint64_t v, unsigned bytes) {
  switch (bytes) {
    case 1: return static_cast<std::uint64_t>(static_cast<std::int64_t>(static_cast<std::int8_t>(v)));
    case 2: return static_cast<std::uint64_t>(static_cast<std::int64_t>(static_cast<std::int16_t>(v)));
    case 4: return sext32(v);
    default: return v;
  }
}

std::uint64_t le_load(const std::uint8_t* p, unsigned n) {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < n; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

void le_store(std::uint8_t* p, unsigned n, std::uint64_t v) {
  for (unsigned i = 0; i < n; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t page_fault_cause(MemKind k) {
  switch (k) {
    case MemKind::fetch: return cause::kInsnPage;
    case MemKind::store: return cause::kStorePage;
    default: return cause::kLoadPage;
  }
}

std::uint64_t access_fault_cause(MemKind k) {
  switch (k) {
    case MemKind::fetch: return cause::kInsnAccess;
    case MemKind::store: return cause::kStoreAccess;
    default: return cause::kLoadAccess;
  }
}

constexpr std::uint64_t kIrqPriority[] = {cause::kMei, cause::kMsi, cause::kMti,
                                          cause::kSei, cause::kSsi, cause::kSti};

std::int64_t as_signed(std::uint64_t v) { return static_cast<std::int64_t>(v); }

}  // namespace

void Core::reset(Addr pc) {
  s_ = CoreState{};
  s_.pc = pc;
  s_.priv = Priv::M;
  s_.mstatus = mstatus::kUxl | mstatus::kSxl | (std::uint64_t{1} << mstatus::kFsShift);
  flush_tlb();
  fp_ops_ = 0;
}

void Core::flush_tlb() {
  for (auto& e : tlb_) e.valid = false;
  tlb_next_ = 0;
}

void Core::set_irq_line(std::uint64_t cause_bit, bool level) {
  const std::uint64_t bit = std::uint64_t{1} << cause_bit;
  s_.irq_lines = level ? (s_.irq_lines | bit) : (s_.irq_lines & ~bit);
}

std::optional<std::uint64_t> Core::pending_interrupt() const {
  const std::uint64_t pending = s_.mip() & s_.mie;
  if (pending == 0) return std::nullopt;
  const bool m_enabled = s_.priv != Priv::M || (s_.mstatus & mstatus::kMie) != 0;
  const bool s_enabled = s_.priv == Priv::U || (s_.priv == Priv::S && (s_.mstatus & mstatus::kSie));
  const std::uint64_t m_pending = pending & ~s_.mideleg;
  const std::uint64_t s_pending = pending & s_.mideleg;
  if (m_pending != 0 && m_enabled) {
    for (std::uint64_t c : kIrqPriority) {
      if ((m_pending >> c) & 1u) return c;
    }
  }
  if (s_pending != 0 && s_enabled && s_.priv != Priv::M) {
    for (std::uint64_t c : kIrqPriority) {
      if ((s_pending >> c) & 1u) return c;
    }
  }
  return std::nullopt;
}

void Core::take_trap(std::uint64_t c, std::uint64_t tval, bool interrupt) {
  const std::uint64_t deleg = interrupt ? s_.mideleg : s_.medeleg;
  const bool to_s = s_.priv != Priv::M && ((deleg >> c) & 1u) != 0;
  const std::uint64_t cause_val = c | (interrupt ? cause::kInterrupt : 0);
  auto& ms = s_.mstatus;
  if (to_s) {
    s_.sepc = s_.pc;
    s_.scause = cause_val;
    s_.stval = tval;
    ms = (ms & ~mstatus::kSpie) | ((ms & mstatus::kSie) ? mstatus::kSpie : 0);
    ms &= ~mstatus::kSie;
    ms = (ms & ~mstatus::kSpp) | (s_.priv == Priv::S ? mstatus::kSpp : 0);
    s_.priv = Priv::S;
    const Addr base = s_.stvec & ~Addr{3};
    s_.pc = ((s_.stvec & 3) == 1 && interrupt) ? base + 4 * c : base;
  } else {
    s_.mepc = s_.pc;
    s_.mcause = cause_val;
    s_.mtval = tval;
    ms = (ms & ~mstatus::kMpie) | ((ms & mstatus::kMie) ? mstatus::kMpie : 0);
    ms &= ~mstatus::kMie;
    ms = (ms & ~mstatus::kMpp) | (std::uint64_t{static_cast<std::uint8_t>(s_.priv)} << mstatus::kMppShift);
    s_.priv = Priv::M;
    const Addr base = s_.mtvec & ~Addr{3};
    s_.pc = ((s_.mtvec & 3) == 1 && interrupt) ? base + 4 * c : base;
  }
  s_.wfi = false;
}

Priv Core::data_priv() const {
  if (s_.priv == Priv::M && (s_.mstatus & mstatus::kMprv)) {
    return static_cast<Priv>((s_.mstatus & mstatus::kMpp) >> mstatus::kMppShift);
  }
  return s_.priv;
}

Translation Core::translate(Addr vaddr, MemKind access) {
  const Priv p = access == MemKind::fetch ? s_.priv : data_priv();
  if (p == Priv::M || (s_.satp >> 60) == 0) return {true, vaddr, 0, 0};
  return walk(vaddr, access, p);
}

Translation Core::walk(Addr va, MemKind access, Priv p) {
  Translation t;
  t.cause = page_fault_cause(access);
  const auto canonical = static_cast<Addr>(static_cast<std::int64_t>(va << 25) >> 25);
  if (canonical != va) return t;

  const std::uint64_t vpn = (va >> 12) & ((std::uint64_t{1} << 27) - 1);
  const TlbEntry* hit = nullptr;
  for (const auto& e : tlb_) {
    if (e.valid && (e.vpn >> (9 * e.level)) == (vpn >> (9 * e.level))) {
      hit = &e;
      break;
    }
  }

  std::uint64_t pte = 0;
  unsigned level = 0;
  if (hit != nullptr) {
    pte = hit->pte;
    level = hit->level;
  } else {
    ++tlb_misses_;
    Addr table = (s_.satp & ((std::uint64_t{1} << 44) - 1)) << 12;
    bool found = false;
    for (int i = 2; i >= 0; --i) {
      const Addr pte_addr = table + ((vpn >> (9 * i)) & 0x1ff) * 8;
      std::uint8_t buf[8];
      const BusResult r = bus_.read(pte_addr, buf, MemKind::ptw);
      t.cycles += r.cycles;
      if (r.resp != Resp::okay) {
        t.cause = access_fault_cause(access);
        return t;
      }
      pte = le_load(buf, 8);
      if (!(pte & kPteV) || (!(pte & kPteR) && (pte & kPteW)) || (pte >> 54) != 0) return t;
      const std::uint64_t ppn = (pte >> 10) & ((std::uint64_t{1} << 44) - 1);
      if (pte & (kPteR | kPteX)) {
        if (i > 0 && (ppn & ((std::uint64_t{1} << (9 * i)) - 1)) != 0) return t;
        level = static_cast<unsigned>(i);
        found = true;
        break;
      }
      if (pte & (kPteU | kPteA | kPteD)) return t;
      table = ppn << 12;
    }
    if (!found) return t;
    tlb_[tlb_next_] = {true, vpn, level, pte};
    tlb_next_ = (tlb_next_ + 1) % kTlbEntries;
  }

  const bool user_page = (pte & kPteU) != 0;
  if (p == Priv::U && !user_page) return t;
  if (p == Priv::S && user_page && (access == MemKind::fetch || !(s_.mstatus & mstatus::kSum))) {
    return t;
  }
  switch (access) {
    case MemKind::fetch:
      if (!(pte & kPteX)) return t;
      break;
    case MemKind::store:
      if (!(pte & kPteW)) return t;
      break;
    default:
      if (!(pte & kPteR) && !((s_.mstatus & mstatus::kMxr) && (pte & kPteX))) return t;
      break;
  }
  if (!(pte & kPteA) || (access == MemKind::store && !(pte & kPteD))) return t;

  const std::uint64_t ppn = (pte >> 10) & ((std::uint64_t{1} << 44) - 1);
  const Addr off_mask = (Addr{1} << (12 + 9 * level)) - 1;
  t.ok = true;
  t.cause = 0;
  t.paddr = ((ppn << 12) & ~off_mask) | (va & off_mask);
  return t;
}

Core::Outcome Core::fetch(Instruction& insn) {
  const Addr pc = s_.pc;
  if (pc & 1) return raise(cause::kInsnMisaligned, pc);
  const Translation t = translate(pc, MemKind::fetch);
  stall_ += t.cycles;
  if (!t.ok) return raise(t.cause, pc);

  std::uint8_t buf[4] = {};
  if ((pc & 0xfff) <= 0xffc) {
    const BusResult r = bus_.read(t.paddr, buf, MemKind::fetch);
    if (r.resp == Resp::pending) return Outcome::pending;
    if (r.resp == Resp::okay) {
      stall_ += r.cycles;
      const auto raw = static_cast<std::uint32_t>(le_load(buf, 4));
      insn = decode(is_compressed_parcel(static_cast<std::uint16_t>(raw)) ? (raw & 0xffffu) : raw);
      return Outcome::ok;
    }
  }
  // Page-straddling fetch, or a 4-byte read that ran off the end of memory.
  BusResult r = bus_.read(t.paddr, {buf, 2}, MemKind::fetch);
  if (r.resp == Resp::pending) return Outcome::pending;
  if (r.resp != Resp::okay) return raise(cause::kInsnAccess, pc);
  stall_ += r.cycles;
  const auto lo = static_cast<std::uint16_t>(le_load(buf, 2));
  if (is_compressed_parcel(lo)) {
    insn = decode16(lo);
    return Outcome::ok;
  }
  Addr hi_pa = t.paddr + 2;
  if (((pc + 2) & 0xfff) == 0) {
    const Translation t2 = translate(pc + 2, MemKind::fetch);
    stall_ += t2.cycles;
    if (!t2.ok) return raise(t2.cause, pc + 2);
    hi_pa = t2.paddr;
  }
  r = bus_.read(hi_pa, {buf + 2, 2}, MemKind::fetch);
  if (r.resp == Resp::pending) return Outcome::pending;
  if (r.resp != Resp::okay) return raise(cause::kInsnAccess, pc + 2);
  stall_ += r.cycles;
  insn = decode32(static_cast<std::uint32_t>(le_load(buf, 4)));
  return Outcome::ok;
}

Core::Outcome Core::load(Addr va, unsigned size, std::uint64_t& out, bool reserve) {
  if (va % size != 0) return raise(cause::kLoadMisaligned, va);
  const Translation t = translate(va, MemKind::load);
  stall_ += t.cycles;
  if (!t.ok) return raise(t.cause, va);
  std::uint8_t buf[8];
  const BusResult r = bus_.read(t.paddr, {buf, size}, MemKind::load);
  if (r.resp == Resp::pending) return Outcome::pending;
  if (r.resp != Resp::okay) return raise(cause::kLoadAccess, va);
  stall_ += r.cycles;
  out = le_load(buf, size);
  if (reserve) s_.reservation = t.paddr;
  return Outcome::ok;
}

Core::Outcome Core::store(Addr va, unsigned size, std::uint64_t value) {
  if (va % size != 0) return raise(cause::kStoreMisaligned, va);
  const Translation t = translate(va, MemKind::store);
  stall_ += t.cycles;
  if (!t.ok) return raise(t.cause, va);
  std::uint8_t buf[8];
  le_store(buf, size, value);
  const BusResult r = bus_.write(t.paddr, {buf, size});
  if (r.resp == Resp::pending) return Outcome::pending;
  if (r.resp != Resp::okay) return raise(cause::kStoreAccess, va);
  stall_ += r.cycles;
  return Outcome::ok;
}

StepResult Core::step() {
  StepResult res;
  stall_ = 0;
  res.pc = s_.pc;

  if (s_.wfi) {
    if ((s_.mip() & s_.mie) == 0) {
      res.kind = StepResult::Kind::waiting;
      return res;
    }
    // Woken: the WFI itself retires now; the interrupt is taken next step.
    s_.wfi = false;
    s_.pc += 4;
    ++s_.instret;
    res.kind = StepResult::Kind::retired;
    res.insn = decode32(0x10500073u);
    return res;
  }

  if (auto irq = pending_interrupt()) {
    take_trap(*irq, 0, true);
    res.kind = StepResult::Kind::trapped;
    res.cause = *irq | cause::kInterrupt;
    return res;
  }

  Instruction insn;
  Outcome o = fetch(insn);
  if (o == Outcome::ok) {
    res.insn = insn;
    next_pc_ = s_.pc + insn.size;
    o = insn.legal() ? execute(insn) : illegal(insn);
  }

  switch (o) {
    case Outcome::ok:
      s_.pc = next_pc_;
      ++s_.instret;
      res.kind = StepResult::Kind::retired;
      res.stall = stall_;
      return res;
    case Outcome::trap:
      take_trap(exc_cause_, exc_tval_, false);
      res.kind = StepResult::Kind::trapped;
      res.cause = exc_cause_;
      res.tval = exc_tval_;
      res.stall = stall_;
      return res;
    case Outcome::breakpoint:
      res.kind = StepResult::Kind::breakpoint;
      return res;
    case Outcome::wait:
      s_.wfi = true;
      res.kind = StepResult::Kind::waiting;
      return res;
    case Outcome::pending:
      res.kind = StepResult::Kind::waiting;
      return res;
  }
  return res;
}

Core::Outcome Core::execute(const Instruction& in) {
  auto& x = s_.x;
  const std::uint64_t a = x[in.rs1];
  const std::uint64_t b = x[in.rs2];
  const auto imm = static_cast<std::uint64_t>(in.imm);
  const Addr pc = s_.pc;

  switch (in.op) {
    case Op::lui: write_x(in.rd, imm); return Outcome::ok;
    case Op::auipc: write_x(in.rd, pc + imm); return Outcome::ok;
    case Op::jal:
      write_x(in.rd, pc + in.size);
      next_pc_ = pc + imm;
      return Outcome::ok;
    case Op::jalr: {
      const Addr target = (a + imm) & ~Addr{1};
      write_x(in.rd, pc + in.size);
      next_pc_ = target;
      return Outcome::ok;
    }
    case Op::beq:
    case Op::bne:
    case Op::blt:
    case Op::bge:
    case Op::bltu:
    case Op::bgeu: {
      bool taken = false;
      switch (in.op) {
        case Op::beq: taken = a == b; break;
        case Op::bne: taken = a != b; break;
        case Op::blt: taken = as_signed(a) < as_signed(b); break;
        case Op::bge: taken = as_signed(a) >= as_signed(b); break;
        case Op::bltu: taken = a < b; break;
        default: taken = a >= b; break;
      }
      if (taken) next_pc_ = pc + imm;
      return Outcome::ok;
    }
    case Op::lb:
    case Op::lh:
    case Op::lw:
    case Op::ld:
    case Op::lbu:
    case Op::lhu:
    case Op::lwu: {
      static constexpr unsigned kSize[] = {1, 2, 4, 8, 1, 2, 4};
      const auto idx = static_cast<unsigned>(in.op) - static_cast<unsigned>(Op::lb);
      std::uint64_t v = 0;
      if (Outcome o = load(a + imm, kSize[idx], v); o != Outcome::ok) return o;
      write_x(in.rd, idx < 4 ? sext_n(v, kSize[idx]) : v);
      return Outcome::ok;
    }
    case Op::sb: return store(a + imm, 1, b);
    case Op::sh: return store(a + imm, 2, b);
    case Op::sw: return store(a + imm, 4, b);
    case Op::sd: return store(a + imm, 8, b);
    case Op::addi: write_x(in.rd, a + imm); return Outcome::ok;
    case Op::slti: write_x(in.rd, as_signed(a) < in.imm ? 1 : 0); return Outcome::ok;
    case Op::sltiu: write_x(in.rd, a < imm ? 1 : 0); return Outcome::ok;
    case Op::xori: write_x(in.rd, a ^ imm); return Outcome::ok;
    case Op::ori: write_x(in.rd, a | imm); return Outcome::ok;
    case Op::andi: write_x(in.rd, a & imm); return Outcome::ok;
    case Op::slli: write_x(in.rd, a << (imm & 63)); return Outcome::ok;
    case Op::srli: write_x(in.rd, a >> (imm & 63)); return Outcome::ok;
    case Op::srai: write_x(in.rd, static_cast<std::uint64_t>(as_signed(a) >> (imm & 63))); return Outcome::ok;
    case Op::add: write_x(in.rd, a + b); return Outcome::ok;
    case Op::sub: write_x(in.rd, a - b); return Outcome::ok;
    case Op::sll: write_x(in.rd, a << (b & 63)); return Outcome::ok;
    case Op::slt: write_x(in.rd, as_signed(a) < as_signed(b) ? 1 : 0); return Outcome::ok;
    case Op::sltu: write_x(in.rd, a < b ? 1 : 0); return Outcome::ok;
    case Op::xor_: write_x(in.rd, a ^ b); return Outcome::ok;
    case Op::srl: write_x(in.rd, a >> (b & 63)); return Outcome::ok;
    case Op::sra: write_x(in.rd, static_cast<std::uint64_t>(as_signed(a) >> (b & 63))); return Outcome::ok;
    case Op::or_: write_x(in.rd, a | b); return Outcome::ok;
    case Op::and_: write_x(in.rd, a & b); return Outcome::ok;
    case Op::addiw: write_x(in.rd, sext32(a + imm)); return Outcome::ok;
    case Op::slliw: write_x(in.rd, sext32(a << (imm & 31))); return Outcome::ok;
    case Op::srliw: write_x(in.rd, sext32((a & 0xffffffffu) >> (imm & 31))); return Outcome::ok;
    case Op::sraiw:
      write_x(in.rd, sext32(static_cast<std::uint64_t>(static_cast<std::int32_t>(a) >> (imm & 31))));
      return Outcome::ok;
    case Op::addw: write_x(in.rd, sext32(a + b)); return Outcome::ok;
    case Op::subw: write_x(in.rd, sext32(a - b)); return Outcome::ok;
    case Op::sllw: write_x(in.rd, sext32(a << (b & 31))); return Outcome::ok;
    case Op::srlw: write_x(in.rd, sext32((a & 0xffffffffu) >> (b & 31))); return Outcome::ok;
    case Op::sraw:
      write_x(in.rd, sext32(static_cast<std::uint64_t>(static_cast<std::int32_t>(a) >> (b & 31))));
      return Outcome::ok;
    case Op::mul: write_x(in.rd, a * b); return Outcome::ok;
    case Op::mulh:
      write_x(in.rd, static_cast<std::uint64_t>(
                         (static_cast<__int128>(as_signed(a)) * static_cast<__int128>(as_signed(b))) >> 64));
      return Outcome::ok;
    case Op::mulhsu:
      write_x(in.rd, static_cast<std::uint64_t>(
                         (static_cast<__int128>(as_signed(a)) * static_cast<__int128>(static_cast<unsigned __int128>(b))) >> 64));
      return Outcome::ok;
    case Op::mulhu:
      write_x(in.rd, static_cast<std::uint64_t>(
                         (static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b)) >> 64));
      return Outcome::ok;
    case Op::div:
      if (b == 0) write_x(in.rd, ~std::uint64_t{0});
      else if (as_signed(a) == INT64_MIN && as_signed(b) == -1) write_x(in.rd, a);
      else write_x(in.rd, static_cast<std::uint64_t>(as_signed(a) / as_signed(b)));
      return Outcome::ok;
    case Op::divu: write_x(in.rd, b == 0 ? ~std::uint64_t{0} : a / b); return Outcome::ok;
    case Op::rem:
      if (b == 0) write_x(in.rd, a);
      else if (as_signed(a) == INT64_MIN && as_signed(b) == -1) write_x(in.rd, 0);
      else write_x(in.rd, static_cast<std::uint64_t>(as_signed(a) % as_signed(b)));
      return Outcome::ok;
    case Op::remu: write_x(in.rd, b == 0 ? a : a % b); return Outcome::ok;
    case Op::mulw: write_x(in.rd, sext32(a * b)); return Outcome::ok;
    case Op::divw:
    case Op::remw: {
      const auto sa = static_cast<std::int32_t>(a);
      const auto sb = static_cast<std::int32_t>(b);
      std::int32_t q;
      std::int32_t r;
      if (sb == 0) {
        q = -1;
        r = sa;
      } else if (sa == INT32_MIN && sb == -1) {
        q = sa;
        r = 0;
      } else {
        q = sa / sb;
        r = sa % sb;
      }
      write_x(in.rd, sext32(static_cast<std::uint32_t>(in.op == Op::divw ? q : r)));
      return Outcome::ok;
    }
    case Op::divuw:
    case Op::remuw: {
      const auto ua = static_cast<std::uint32_t>(a);
      const auto ub = static_cast<std::uint32_t>(b);
      const std::uint32_t q = ub == 0 ? 0xffffffffu : ua / ub;
      const std::uint32_t r = ub == 0 ? ua : ua % ub;
      write_x(in.rd, sext32(in.op == Op::divuw ? q : r));
      return Outcome::ok;
    }
    case Op::fence:
      stall_ += bus_.fence_data();
      return Outcome::ok;
    case Op::fence_i:
      stall_ += bus_.fence_instr();
      return Outcome::ok;
    default: break;
  }

  const Fmt fmt = op_info(in.op).fmt;
  if (fmt == Fmt::AMO || fmt == Fmt::LR) return exec_amo(in);
  if (fmt == Fmt::CSR || fmt == Fmt::CSRI || fmt == Fmt::NONE || fmt == Fmt::SFENCE) {
    return exec_system(in);
  }
  return exec_fp(in);
}

Core::Outcome Core::exec_amo(const Instruction& in) {
  const bool dbl = op_info(in.op).mnemonic[std::strlen(op_info(in.op).mnemonic) - 1] == 'd';
  const unsigned size = dbl ? 8 : 4;
  const Addr va = s_.x[in.rs1];
  const std::uint64_t src = s_.x[in.rs2];

  if (in.op == Op::lr_w || in.op == Op::lr_d) {
    std::uint64_t v = 0;
    if (Outcome o = load(va, size, v, true); o != Outcome::ok) return o;
    write_x(in.rd, dbl ? v : sext32(v));
    return Outcome::ok;
  }

  if (va % size != 0) return raise(cause::kStoreMisaligned, va);
  const Translation t = translate(va, MemKind::store);
  stall_ += t.cycles;
  if (!t.ok) return raise(t.cause, va);

  if (in.op == Op::sc_w || in.op == Op::sc_d) {
    const bool ok = s_.reservation && *s_.reservation == t.paddr;
    if (ok) {
      std::uint8_t buf[8];
      le_store(buf, size, src);
      const BusResult r = bus_.write(t.paddr, {buf, size});
      if (r.resp == Resp::pending) return Outcome::pending;
      if (r.resp != Resp::okay) return raise(cause::kStoreAccess, va);
      stall_ += r.cycles;
    }
    s_.reservation.reset();
    write_x(in.rd, ok ? 0 : 1);
    return Outcome::ok;
  }

  if (!bus_.amo_allowed(t.paddr)) return raise(cause::kStoreAccess, va);
  std::uint8_t buf[8];
  BusResult r = bus_.read(t.paddr, {buf, size}, MemKind::load);
  if (r.resp != Resp::okay) return raise(cause::kStoreAccess, va);
  stall_ += r.cycles;
  const std::uint64_t raw_old = le_load(buf, size);
  const std::uint64_t old = dbl ? raw_old : sext32(raw_old);
  const std::uint64_t rhs = dbl ? src : sext32(src);
  std::uint64_t nv = 0;
  switch (in.op) {
    case Op::amoswap_w: case Op::amoswap_d: nv = rhs; break;
    case Op::amoadd_w: case Op::amoadd_d: nv = old + rhs; break;
    case Op::amoxor_w: case Op::amoxor_d: nv = old ^ rhs; break;
    case Op::amoand_w: case Op::amoand_d: nv = old & rhs; break;
    case Op::amoor_w: case Op::amoor_d: nv = old | rhs; break;
    case Op::amomin_w: case Op::amomin_d: nv = as_signed(old) < as_signed(rhs) ? old : rhs; break;
    case Op::amomax_w: case Op::amomax_d: nv = as_signed(old) > as_signed(rhs) ? old : rhs; break;
    case Op::amominu_w:
      nv = static_cast<std::uint32_t>(old) < static_cast<std::uint32_t>(rhs) ? old : rhs;
      break;
    case Op::amomaxu_w:
      nv = static_cast<std::uint32_t>(old) > static_cast<std::uint32_t>(rhs) ? old : rhs;
      break;
    case Op::amominu_d: nv = old < rhs ? old : rhs; break;
    case Op::amomaxu_d: nv = old > rhs ? old : rhs; break;
    default: return illegal(in);
  }
  le_store(buf, size, nv);
  r = bus_.write(t.paddr, {buf, size});
  if (r.resp != Resp::okay) return raise(cause::kStoreAccess, va);
  stall_ += r.cycles;
  write_x(in.rd, old);
  return Outcome::ok;
}

Core::Outcome Core::exec_system(const Instruction& in) {
  switch (in.op) {
    case Op::ecall:
      return raise(s_.priv == Priv::U   ? cause::kEcallU
                   : s_.priv == Priv::S ? cause::kEcallS
                                        : cause::kEcallM,
                   0);
    case Op::ebreak:
      if (ebreak_halts_) return Outcome::breakpoint;
      return raise(cause::kBreakpoint, s_.pc);
    case Op::mret: {
      if (s_.priv != Priv::M) return illegal(in);
      auto& ms = s_.mstatus;
      const auto mpp = static_cast<Priv>((ms & mstatus::kMpp) >> mstatus::kMppShift);
      ms = (ms & ~mstatus::kMie) | ((ms & mstatus::kMpie) ? mstatus::kMie : 0);
      ms |= mstatus::kMpie;
      ms &= ~mstatus::kMpp;
      if (mpp != Priv::M) ms &= ~mstatus::kMprv;
      s_.priv = mpp;
      next_pc_ = s_.mepc;
      return Outcome::ok;
    }
    case Op::sret: {
      if (s_.priv == Priv::U || (s_.priv == Priv::S && (s_.mstatus & mstatus::kTsr))) {
        return illegal(in);
      }
      auto& ms = s_.mstatus;
      const Priv spp = (ms & mstatus::kSpp) ? Priv::S : Priv::U;
      ms = (ms & ~mstatus::kSie) | ((ms & mstatus::kSpie) ? mstatus::kSie : 0);
      ms |= mstatus::kSpie;
      ms &= ~mstatus::kSpp;
      ms &= ~mstatus::kMprv;
      s_.priv = spp;
      next_pc_ = s_.sepc;
      return Outcome::ok;
    }
    case Op::wfi:
      if (s_.priv == Priv::U || (s_.priv == Priv::S && (s_.mstatus & mstatus::kTw))) {
        return illegal(in);
      }
      if ((s_.mip() & s_.mie) != 0) return Outcome::ok;
      return Outcome::wait;
    case Op::sfence_vma:
      if (s_.priv == Priv::U || (s_.priv == Priv::S && (s_.mstatus & mstatus::kTvm))) {
        return illegal(in);
      }
      flush_tlb();
      return Outcome::ok;
    default: break;
  }

  // Zicsr
  const auto num = static_cast<unsigned>(in.imm) & 0xfffu;
  const bool imm_form = op_info(in.op).fmt == Fmt::CSRI;
  const std::uint64_t operand = imm_form ? in.rs1 : s_.x[in.rs1];
  const bool is_write = in.op == Op::csrrw || in.op == Op::csrrwi || in.rs1 != 0;

  if (static_cast<unsigned>(s_.priv) < ((num >> 8) & 3u)) return illegal(in);
  if (is_write && (num >> 10) == 3u) return illegal(in);
  if (num == csr::kSatp && s_.priv == Priv::S && (s_.mstatus & mstatus::kTvm)) return illegal(in);

  std::uint64_t old = 0;
  if (!csr_read(num, old)) return illegal(in);
  if (is_write) {
    std::uint64_t nv = operand;
    if (in.op == Op::csrrs || in.op == Op::csrrsi) nv = old | operand;
    if (in.op == Op::csrrc || in.op == Op::csrrci) nv = old & ~operand;
    if (!csr_write(num, nv)) return illegal(in);
  }
  write_x(in.rd, old);
  return Outcome::ok;
}

bool Core::csr_read(unsigned num, std::uint64_t& value) {
  if ((num == csr::kFflags || num == csr::kFrm || num == csr::kFcsr) && !fp_enabled()) return false;
  if (num >= csr::kCycle && num <= csr::kInstret) {
    const unsigned bit = num - csr::kCycle;
    if (s_.priv != Priv::M && !((s_.mcounteren >> bit) & 1u)) return false;
    if (s_.priv == Priv::U && !((s_.scounteren >> bit) & 1u)) return false;
  }
  auto v = read_csr(num);
  if (!v) return false;
  value = *v;
  return true;
}

std::optional<std::uint64_t> Core::read_csr(unsigned num) const {
  const std::uint64_t sd = ((s_.mstatus & mstatus::kFs) == mstatus::kFs) ? mstatus::kSd : 0;
  switch (num) {
    case csr::kFflags: return s_.fflags;
    case csr::kFrm: return s_.frm;
    case csr::kFcsr: return (s_.frm << 5) | s_.fflags;
    case csr::kCycle:
    case csr::kMcycle:
      return static_cast<std::uint64_t>(static_cast<std::int64_t>(bus_.cycle()) + s_.cycle_offset);
    case csr::kTime: return bus_.time();
    case csr::kInstret:
    case csr::kMinstret: return s_.instret;
    case csr::kSstatus: return (s_.mstatus | sd) & kSstatusMask;
    case csr::kSie: return s_.mie & s_.mideleg;
    case csr::kStvec: return s_.stvec;
    case csr::kScounteren: return s_.scounteren;
    case csr::kSscratch: return s_.sscratch;
    case csr::kSepc: return s_.sepc;
    case csr::kScause: return s_.scause;
    case csr::kStval: return s_.stval;
    case csr::kSip: return s_.mip() & s_.mideleg;
    case csr::kSatp: return s_.satp;
    case csr::kMvendorid: return 0;
    case csr::kMarchid: return 3;
    case csr::kMimpid: return 0;
    case csr::kMhartid: return 0;
    case csr::kMstatus: return s_.mstatus | sd;
    case csr::kMisa: return kMisa;
    case csr::kMedeleg: return s_.medeleg;
    case csr::kMideleg: return s_.mideleg;
    case csr::kMie: return s_.mie;
    case csr::kMtvec: return s_.mtvec;
    case csr::kMcounteren: return s_.mcounteren;
    case csr::kMscratch: return s_.mscratch;
    case csr::kMepc: return s_.mepc;
    case csr::kMcause: return s_.mcause;
    case csr::kMtval: return s_.mtval;
    case csr::kMip: return s_.mip();
    default: return std::nullopt;
  }
}

bool Core::csr_write(unsigned num, std::uint64_t v) {
  if ((num == csr::kFflags || num == csr::kFrm || num == csr::kFcsr) && !fp_enabled()) return false;
  return write_csr(num, v);
}

bool Core::write_csr(unsigned num, std::uint64_t v) {
  auto set_tvec = [](std::uint64_t& reg, std::uint64_t val) {
    reg = (val & 3u) >= 2 ? (val & ~std::uint64_t{3}) : val;
  };
  switch (num) {
    case csr::kFflags: s_.fflags = v & 0x1f; mark_fs_dirty(); return true;
    case csr::kFrm: s_.frm = v & 7; mark_fs_dirty(); return true;
    case csr::kFcsr:
      s_.fflags = v & 0x1f;
      s_.frm = (v >> 5) & 7;
      mark_fs_dirty();
      return true;
    case csr::kMcycle:
      s_.cycle_offset = static_cast<std::int64_t>(v) - static_cast<std::int64_t>(bus_.cycle());
      return true;
    case csr::kMinstret:
      // The writing instruction itself retires afterwards; compensate so the
      // next read observes the written value.
      s_.instret = v - 1;
      return true;
    case csr::kSstatus:
      s_.mstatus = (s_.mstatus & ~kSstatusWritable) | (v & kSstatusWritable);
      return true;
    case csr::kSie:
      s_.mie = (s_.mie & ~s_.mideleg) | (v & s_.mideleg & kDelegableIrqs);
      return true;
    case csr::kStvec: set_tvec(s_.stvec, v); return true;
    case csr::kScounteren: s_.scounteren = v & 7; return true;
    case csr::kSscratch: s_.sscratch = v; return true;
    case csr::kSepc: s_.sepc = v & ~std::uint64_t{1}; return true;
    case csr::kScause: s_.scause = v; return true;
    case csr::kStval: s_.stval = v; return true;
    case csr::kSip: {
      const std::uint64_t mask = (1u << cause::kSsi) & s_.mideleg;
      s_.mip_sw = (s_.mip_sw & ~mask) | (v & mask);
      return true;
    }
    case csr::kSatp: {
      const std::uint64_t mode = v >> 60;
      if (mode == 0 || mode == 8) {
        s_.satp = v & ((std::uint64_t{0xf} << 60) | (std::uint64_t{0xffff} << 44) |
                       ((std::uint64_t{1} << 44) - 1));
        flush_tlb();
      }
      return true;
    }
    case csr::kMstatus: {
      std::uint64_t nv = (s_.mstatus & ~kMstatusWritable) | (v & kMstatusWritable);
      if (((nv & mstatus::kMpp) >> mstatus::kMppShift) == 2) nv &= ~mstatus::kMpp;
      s_.mstatus = nv;
      return true;
    }
    case csr::kMisa: return true;
    case csr::kMedeleg: s_.medeleg = v & kDelegableExc; return true;
    case csr::kMideleg: s_.mideleg = v & kDelegableIrqs; return true;
    case csr::kMie: s_.mie = v & kMieMask; return true;
    case csr::kMtvec: set_tvec(s_.mtvec, v); return true;
    case csr::kMcounteren: s_.mcounteren = v & 7; return true;
    case csr::kMscratch: s_.mscratch = v; return true;
    case csr::kMepc: s_.mepc = v & ~std::uint64_t{1}; return true;
    case csr::kMcause: s_.mcause = v; return true;
    case csr::kMtval: s_.mtval = v; return true;
    case csr::kMip: s_.mip_sw = (s_.mip_sw & ~kDelegableIrqs) | (v & kDelegableIrqs); return true;
    case csr::kCycle:
    case csr::kTime:
    case csr::kInstret:
    case csr::kMvendorid:
    case csr::kMarchid:
    case csr::kMimpid:
    case csr::kMhartid: return false;
    default: return false;
  }
}

std::optional<std::uint8_t> Core::resolve_rm(std::uint8_t rm) const {
  const std::uint8_t eff = rm == kRmDyn ? static_cast<std::uint8_t>(s_.frm) : rm;
  if (eff > 4) return std::nullopt;
  return eff;
}

std::uint32_t Core::read_s(unsigned r) const {
  const std::uint64_t v = s_.f[r];
  if ((v & kBoxMask) != kBoxMask) return fpu::kCanonicalNanS;
  return static_cast<std::uint32_t>(v);
}

void Core::write_s(unsigned r, std::uint32_t v) {
  s_.f[r] = kBoxMask | v;
  mark_fs_dirty();
}

void Core::write_d(unsigned r, std::uint64_t v) {
  s_.f[r] = v;
  mark_fs_dirty();
}

Core::Outcome Core::exec_fp(const Instruction& in) {
  if (!fp_enabled()) return illegal(in);
  const Fmt fmt = op_info(in.op).fmt;
  fpu::Rm rm = fpu::rne;
  if (uses_rm(fmt)) {
    auto r = resolve_rm(in.rm);
    if (!r) return illegal(in);
    rm = static_cast<fpu::Rm>(*r);
  }
  const auto& f = s_.f;
  const std::uint64_t d1 = f[in.rs1], d2 = f[in.rs2], d3 = f[in.rs3];
  const std::uint32_t s1 = read_s(in.rs1), s2 = read_s(in.rs2), s3 = read_s(in.rs3);
  const std::uint64_t xa = s_.x[in.rs1];
  const auto imm = static_cast<std::uint64_t>(in.imm);

  auto put_s = [&](fpu::Result r) {
    accrue(r.flags);
    write_s(in.rd, static_cast<std::uint32_t>(r.bits));
    return Outcome::ok;
  };
  auto put_d = [&](fpu::Result r) {
    accrue(r.flags);
    write_d(in.rd, r.bits);
    return Outcome::ok;
  };
  auto put_x = [&](fpu::Result r) {
    accrue(r.flags);
    write_x(in.rd, r.bits);
    return Outcome::ok;
  };

  switch (in.op) {
    case Op::flw: {
      std::uint64_t v = 0;
      if (Outcome o = load(xa + imm, 4, v); o != Outcome::ok) return o;
      write_s(in.rd, static_cast<std::uint32_t>(v));
      return Outcome::ok;
    }
    case Op::fld: {
      std::uint64_t v = 0;
      if (Outcome o = load(xa + imm, 8, v); o != Outcome::ok) return o;
      write_d(in.rd, v);
      return Outcome::ok;
    }
    case Op::fsw: return store(xa + imm, 4, d2);
    case Op::fsd: return store(xa + imm, 8, d2);

    case Op::fmadd_s: fp_ops_ += 2; return put_s(fpu::fma_s(s1, s2, s3, false, false, rm));
    case Op::fmsub_s: fp_ops_ += 2; return put_s(fpu::fma_s(s1, s2, s3, false, true, rm));
    case Op::fnmsub_s: fp_ops_ += 2; return put_s(fpu::fma_s(s1, s2, s3, true, false, rm));
    case Op::fnmadd_s: fp_ops_ += 2; return put_s(fpu::fma_s(s1, s2, s3, true, true, rm));
    case Op::fmadd_d: fp_ops_ += 2; return put_d(fpu::fma_d(d1, d2, d3, false, false, rm));
    case Op::fmsub_d: fp_ops_ += 2; return put_d(fpu::fma_d(d1, d2, d3, false, true, rm));
    case Op::fnmsub_d: fp_ops_ += 2; return put_d(fpu::fma_d(d1, d2, d3, true, false, rm));
    case Op::fnmadd_d: fp_ops_ += 2; return put_d(fpu::fma_d(d1, d2, d3, true, true, rm));

    case Op::fadd_s: ++fp_ops_; return put_s(fpu::add_s(s1, s2, rm));
    case Op::fsub_s: ++fp_ops_; return put_s(fpu::sub_s(s1, s2, rm));
    case Op::fmul_s: ++fp_ops_; return put_s(fpu::mul_s(s1, s2, rm));
    case Op::fdiv_s: ++fp_ops_; return put_s(fpu::div_s(s1, s2, rm));
    case Op::fsqrt_s: ++fp_ops_; return put_s(fpu::sqrt_s(s1, rm));
    case Op::fadd_d: ++fp_ops_; return put_d(fpu::add_d(d1, d2, rm));
    case Op::fsub_d: ++fp_ops_; return put_d(fpu::sub_d(d1, d2, rm));
    case Op::fmul_d: ++fp_ops_; return put_d(fpu::mul_d(d1, d2, rm));
    case Op::fdiv_d: ++fp_ops_; return put_d(fpu::div_d(d1, d2, rm));
    case Op::fsqrt_d: ++fp_ops_; return put_d(fpu::sqrt_d(d1, rm));

    case Op::fsgnj_s: write_s(in.rd, (s1 & 0x7fffffffu) | (s2 & 0x80000000u)); return Outcome::ok;
    case Op::fsgnjn_s: write_s(in.rd, (s1 & 0x7fffffffu) | (~s2 & 0x80000000u)); return Outcome::ok;
    case Op::fsgnjx_s: write_s(in.rd, s1 ^ (s2 & 0x80000000u)); return Outcome::ok;
    case Op::fsgnj_d: {
      constexpr std::uint64_t kSign = std::uint64_t{1} << 63;
      write_d(in.rd, (d1 & ~kSign) | (d2 & kSign));
      return Outcome::ok;
    }
    case Op::fsgnjn_d: {
      constexpr std::uint64_t kSign = std::uint64_t{1} << 63;
      write_d(in.rd, (d1 & ~kSign) | (~d2 & kSign));
      return Outcome::ok;
    }
    case Op::fsgnjx_d: write_d(in.rd, d1 ^ (d2 & (std::uint64_t{1} << 63))); return Outcome::ok;

    case Op::fmin_s: return put_s(fpu::min_s(s1, s2));
    case Op::fmax_s: return put_s(fpu::max_s(s1, s2));
    case Op::fmin_d: return put_d(fpu::min_d(d1, d2));
    case Op::fmax_d: return put_d(fpu::max_d(d1, d2));

    case Op::fcvt_s_d: return put_s(fpu::cvt_s_d(d1, rm));
    case Op::fcvt_d_s: return put_d(fpu::cvt_d_s(s1));

    case Op::feq_s: return put_x(fpu::eq_s(s1, s2));
    case Op::flt_s: return put_x(fpu::lt_s(s1, s2));
    case Op::fle_s: return put_x(fpu::le_s(s1, s2));
    case Op::feq_d: return put_x(fpu::eq_d(d1, d2));
    case Op::flt_d: return put_x(fpu::lt_d(d1, d2));
    case Op::fle_d: return put_x(fpu::le_d(d1, d2));

    case Op::fclass_s: write_x(in.rd, fpu::classify_s(s1)); return Outcome::ok;
    case Op::fclass_d: write_x(in.rd, fpu::classify_d(d1)); return Outcome::ok;
    case Op::fmv_x_w: write_x(in.rd, sext32(d1)); return Outcome::ok;
    case Op::fmv_x_d: write_x(in.rd, d1); return Outcome::ok;
    case Op::fmv_w_x: write_s(in.rd, static_cast<std::uint32_t>(xa)); return Outcome::ok;
    case Op::fmv_d_x: write_d(in.rd, xa); return Outcome::ok;

    case Op::fcvt_w_s: return put_x(fpu::s_to_int(s1, true, 32, rm));
    case Op::fcvt_wu_s: return put_x(fpu::s_to_int(s1, false, 32, rm));
    case Op::fcvt_l_s: return put_x(fpu::s_to_int(s1, true, 64, rm));
    case Op::fcvt_lu_s: return put_x(fpu::s_to_int(s1, false, 64, rm));
    case Op::fcvt_w_d: return put_x(fpu::d_to_int(d1, true, 32, rm));
    case Op::fcvt_wu_d: return put_x(fpu::d_to_int(d1, false, 32, rm));
    case Op::fcvt_l_d: return put_x(fpu::d_to_int(d1, true, 64, rm));
    case Op::fcvt_lu_d: return put_x(fpu::d_to_int(d1, false, 64, rm));

    case Op::fcvt_s_w: return put_s(fpu::int_to_s(xa, true, 32, rm));
    case Op::fcvt_s_wu: return put_s(fpu::int_to_s(xa, false, 32, rm));
    case Op::fcvt_s_l: return put_s(fpu::int_to_s(xa, true, 64, rm));
    case Op::fcvt_s_lu: return put_s(fpu::int_to_s(xa, false, 64, rm));
    case Op::fcvt_d_w: return put_d(fpu::int_to_d(xa, true, 32, rm));
    case Op::fcvt_d_wu: return put_d(fpu::int_to_d(xa, false, 32, rm));
    case Op::fcvt_d_l: return put_d(fpu::int_to_d(xa, true, 64, rm));
    case Op::fcvt_d_lu: return put_d(fpu::int_to_d(xa, false, 64, rm));
    default: return illegal(in);
  }
}

}  // namespace basilisk::rv64
