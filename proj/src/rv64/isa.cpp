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

#include "basilisk/rv64/isa.hpp"

#include <array>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>

namespace basilisk::rv64 {

namespace {

constexpr OpInfo kOps[] = {
#define BASILISK_X(name, str, fmt, ...) {Op::name, str, Fmt::fmt, __VA_ARGS__},
    BASILISK_RV64_OPS(BASILISK_X)
#undef BASILISK_X
};
static_assert(std::size(kOps) == kOpCount);

constexpr const char* kCopNames[] = {
    "",          "c.addi4spn", "c.fld",   "c.lw",      "c.ld",    "c.fsd",   "c.sw",
    "c.sd",      "c.nop",      "c.addi",  "c.addiw",   "c.li",    "c.addi16sp", "c.lui",
    "c.srli",    "c.srai",     "c.andi",  "c.sub",     "c.xor",   "c.or",    "c.and",
    "c.subw",    "c.addw",     "c.j",     "c.beqz",    "c.bnez",  "c.slli",  "c.fldsp",
    "c.lwsp",    "c.ldsp",     "c.jr",    "c.mv",      "c.ebreak", "c.jalr", "c.add",
    "c.fsdsp",   "c.swsp",     "c.sdsp",
};
static_assert(std::size(kCopNames) == kCOpCount + 1);

constexpr const char* kXNames[32] = {"zero", "ra", "sp", "gp", "tp",  "t0",  "t1", "t2",
                                     "s0",   "s1", "a0", "a1", "a2",  "a3",  "a4", "a5",
                                     "a6",   "a7", "s2", "s3", "s4",  "s5",  "s6", "s7",
                                     "s8",   "s9", "s10", "s11", "t3", "t4", "t5", "t6"};
constexpr const char* kFNames[32] = {"ft0", "ft1", "ft2",  "ft3",  "ft4", "ft5", "ft6",  "ft7",
                                     "fs0", "fs1", "fa0",  "fa1",  "fa2", "fa3", "fa4",  "fa5",
                                     "fa6", "fa7", "fs2",  "fs3",  "fs4", "fs5", "fs6",  "fs7",
                                     "fs8", "fs9", "fs10", "fs11", "ft8", "ft9", "ft10", "ft11"};
constexpr const char* kRmNames[8] = {"rne", "rtz", "rdn", "rup", "rmm", nullptr, nullptr, "dyn"};

struct CsrName {
  unsigned num;
  const char* name;
};
constexpr CsrName kCsrs[] = {
    {0x001, "fflags"},   {0x002, "frm"},        {0x003, "fcsr"},     {0xc00, "cycle"},
    {0xc01, "time"},     {0xc02, "instret"},    {0x100, "sstatus"},  {0x104, "sie"},
    {0x105, "stvec"},    {0x106, "scounteren"}, {0x140, "sscratch"}, {0x141, "sepc"},
    {0x142, "scause"},   {0x143, "stval"},      {0x144, "sip"},      {0x180, "satp"},
    {0xf11, "mvendorid"}, {0xf12, "marchid"},   {0xf13, "mimpid"},   {0xf14, "mhartid"},
    {0x300, "mstatus"},  {0x301, "misa"},       {0x302, "medeleg"},  {0x303, "mideleg"},
    {0x304, "mie"},      {0x305, "mtvec"},      {0x306, "mcounteren"}, {0x340, "mscratch"},
    {0x341, "mepc"},     {0x342, "mcause"},     {0x343, "mtval"},    {0x344, "mip"},
    {0xb00, "mcycle"},   {0xb02, "minstret"},
};

constexpr std::int64_t sext(std::uint64_t v, unsigned bits) {
  const std::uint64_t m = std::uint64_t{1} << (bits - 1);
  v &= (bits == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
  return static_cast<std::int64_t>((v ^ m) - m);
}

constexpr std::uint32_t bits(std::uint32_t v, unsigned hi, unsigned lo) {
  return (v >> lo) & ((1u << (hi - lo + 1)) - 1);
}

std::int64_t imm_i(std::uint32_t r) { return sext(r >> 20, 12); }
std::int64_t imm_s(std::uint32_t r) { return sext((bits(r, 31, 25) << 5) | bits(r, 11, 7), 12); }
std::int64_t imm_b(std::uint32_t r) {
  return sext((bits(r, 31, 31) << 12) | (bits(r, 7, 7) << 11) | (bits(r, 30, 25) << 5) |
                  (bits(r, 11, 8) << 1),
              13);
}
std::int64_t imm_u(std::uint32_t r) { return sext(r & 0xfffff000u, 32); }
std::int64_t imm_j(std::uint32_t r) {
  return sext((bits(r, 31, 31) << 20) | (bits(r, 19, 12) << 12) | (bits(r, 20, 20) << 11) |
                  (bits(r, 30, 21) << 1),
              21);
}

using Bucket = std::vector<const OpInfo*>;

const std::array<Bucket, 32>& buckets() {
  static const std::array<Bucket, 32> table = [] {
    std::array<Bucket, 32> t;
    for (const auto& info : kOps) t[(info.match & 0x7f) >> 2].push_back(&info);
    return t;
  }();
  return table;
}

void fill_fields(Instruction& in, const OpInfo& info) {
  const std::uint32_t r = in.raw;
  const auto rd = static_cast<std::uint8_t>(bits(r, 11, 7));
  const auto rs1 = static_cast<std::uint8_t>(bits(r, 19, 15));
  const auto rs2 = static_cast<std::uint8_t>(bits(r, 24, 20));
  const auto f3 = static_cast<std::uint8_t>(bits(r, 14, 12));
  switch (info.fmt) {
    case Fmt::U: in.rd = rd; in.imm = imm_u(r); break;
    case Fmt::J: in.rd = rd; in.imm = imm_j(r); break;
    case Fmt::JALR:
    case Fmt::LOAD:
    case Fmt::I:
    case Fmt::FLOAD: in.rd = rd; in.rs1 = rs1; in.imm = imm_i(r); break;
    case Fmt::B: in.rs1 = rs1; in.rs2 = rs2; in.imm = imm_b(r); break;
    case Fmt::STORE:
    case Fmt::FSTORE: in.rs1 = rs1; in.rs2 = rs2; in.imm = imm_s(r); break;
    case Fmt::SHIFT: in.rd = rd; in.rs1 = rs1; in.imm = bits(r, 25, 20); break;
    case Fmt::SHIFTW: in.rd = rd; in.rs1 = rs1; in.imm = bits(r, 24, 20); break;
    case Fmt::R:
    case Fmt::FR:
    case Fmt::FCMP: in.rd = rd; in.rs1 = rs1; in.rs2 = rs2; break;
    case Fmt::FENCE:
    case Fmt::NONE: in.rd = rd; in.rs1 = rs1; in.imm = r >> 20; break;
    case Fmt::SFENCE: in.rs1 = rs1; in.rs2 = rs2; break;
    case Fmt::CSR:
    case Fmt::CSRI: in.rd = rd; in.rs1 = rs1; in.imm = r >> 20; break;
    case Fmt::AMO: in.rd = rd; in.rs1 = rs1; in.rs2 = rs2; in.rm = bits(r, 26, 25); break;
    case Fmt::LR: in.rd = rd; in.rs1 = rs1; in.rm = bits(r, 26, 25); break;
    case Fmt::R4:
      in.rd = rd; in.rs1 = rs1; in.rs2 = rs2;
      in.rs3 = static_cast<std::uint8_t>(bits(r, 31, 27));
      in.rm = f3;
      break;
    case Fmt::FR_RM: in.rd = rd; in.rs1 = rs1; in.rs2 = rs2; in.rm = f3; break;
    case Fmt::FR1_RM:
    case Fmt::F2X_RM:
    case Fmt::X2F_RM: in.rd = rd; in.rs1 = rs1; in.rm = f3; break;
    case Fmt::F2X:
    case Fmt::X2F: in.rd = rd; in.rs1 = rs1; break;
  }
}

Instruction compressed(std::uint16_t raw, COp cop, Op op, unsigned rd, unsigned rs1, unsigned rs2,
                       std::int64_t imm) {
  Instruction in;
  in.raw = raw;
  in.size = 2;
  in.cop = cop;
  in.op = op;
  in.rd = static_cast<std::uint8_t>(rd);
  in.rs1 = static_cast<std::uint8_t>(rs1);
  in.rs2 = static_cast<std::uint8_t>(rs2);
  in.imm = imm;
  return in;
}

Instruction illegal16(std::uint16_t raw) {
  Instruction in;
  in.raw = raw;
  in.size = 2;
  return in;
}

[[noreturn]] void unencodable(const Instruction& in, const char* why) {
  throw std::invalid_argument(fmt::format("cannot encode {}: {}", in.cop != COp::none
                                                                       ? cop_mnemonic(in.cop)
                                                                       : op_info(in.op).mnemonic,
                                          why));
}

bool fits_signed(std::int64_t v, unsigned bits) {
  const std::int64_t lim = std::int64_t{1} << (bits - 1);
  return v >= -lim && v < lim;
}

bool fits_unsigned(std::int64_t v, unsigned bits) {
  return v >= 0 && static_cast<std::uint64_t>(v) < (std::uint64_t{1} << bits);
}

bool is_prime(unsigned r) { return r >= 8 && r <= 15; }

std::uint32_t encode16(const Instruction& in) {
  const unsigned rd = in.rd, rs1 = in.rs1, rs2 = in.rs2;
  const std::int64_t imm = in.imm;
  auto need = [&](bool ok, const char* why) {
    if (!ok) unencodable(in, why);
  };
  auto prime = [&](unsigned r) {
    need(is_prime(r), "register must be x8..x15");
    return (r - 8) & 7u;
  };
  const auto u = static_cast<std::uint32_t>(imm);
  switch (in.cop) {
    case COp::c_addi4spn:
      need(rs1 == 2 && imm > 0 && fits_unsigned(imm, 10) && imm % 4 == 0, "bad immediate");
      return (bits(u, 5, 4) << 11) | (bits(u, 9, 6) << 7) | (bits(u, 2, 2) << 6) |
             (bits(u, 3, 3) << 5) | (prime(rd) << 2);
    case COp::c_fld:
    case COp::c_ld:
      need(fits_unsigned(imm, 8) && imm % 8 == 0, "bad offset");
      return ((in.cop == COp::c_fld ? 1u : 3u) << 13) | (bits(u, 5, 3) << 10) |
             (prime(rs1) << 7) | (bits(u, 7, 6) << 5) | (prime(rd) << 2);
    case COp::c_lw:
      need(fits_unsigned(imm, 7) && imm % 4 == 0, "bad offset");
      return (2u << 13) | (bits(u, 5, 3) << 10) | (prime(rs1) << 7) | (bits(u, 2, 2) << 6) |
             (bits(u, 6, 6) << 5) | (prime(rd) << 2);
    case COp::c_fsd:
    case COp::c_sd:
      need(fits_unsigned(imm, 8) && imm % 8 == 0, "bad offset");
      return ((in.cop == COp::c_fsd ? 5u : 7u) << 13) | (bits(u, 5, 3) << 10) |
             (prime(rs1) << 7) | (bits(u, 7, 6) << 5) | (prime(rs2) << 2);
    case COp::c_sw:
      need(fits_unsigned(imm, 7) && imm % 4 == 0, "bad offset");
      return (6u << 13) | (bits(u, 5, 3) << 10) | (prime(rs1) << 7) | (bits(u, 2, 2) << 6) |
             (bits(u, 6, 6) << 5) | (prime(rs2) << 2);
    case COp::c_nop:
      need(rd == 0 && rs1 == 0 && imm == 0, "c.nop takes no operands");
      return 0x0001;
    case COp::c_addi:
    case COp::c_addiw:
    case COp::c_li: {
      const unsigned f3 = in.cop == COp::c_addi ? 0u : in.cop == COp::c_addiw ? 1u : 2u;
      need(rd != 0, "rd must not be x0");
      need(in.cop == COp::c_li ? rs1 == 0 : rs1 == rd, "rs1 mismatch");
      need(fits_signed(imm, 6), "immediate out of range");
      return 1u | (f3 << 13) | (bits(u, 5, 5) << 12) | (rd << 7) | (bits(u, 4, 0) << 2);
    }
    case COp::c_addi16sp:
      need(rd == 2 && rs1 == 2 && imm != 0 && fits_signed(imm, 10) && imm % 16 == 0,
           "bad immediate");
      return 1u | (3u << 13) | (bits(u, 9, 9) << 12) | (2u << 7) | (bits(u, 4, 4) << 6) |
             (bits(u, 6, 6) << 5) | (bits(u, 8, 7) << 3) | (bits(u, 5, 5) << 2);
    case COp::c_lui: {
      need(rd != 0 && rd != 2, "rd must not be x0 or sp");
      need(imm != 0 && imm % 4096 == 0 && fits_signed(imm, 18), "immediate out of range");
      const auto v = static_cast<std::uint32_t>(imm >> 12);
      return 1u | (3u << 13) | (bits(v, 5, 5) << 12) | (rd << 7) | (bits(v, 4, 0) << 2);
    }
    case COp::c_srli:
    case COp::c_srai:
    case COp::c_andi: {
      need(rs1 == rd, "rs1 must equal rd");
      const unsigned f2 = in.cop == COp::c_srli ? 0u : in.cop == COp::c_srai ? 1u : 2u;
      need(in.cop == COp::c_andi ? fits_signed(imm, 6) : fits_unsigned(imm, 6),
           "immediate out of range");
      return 1u | (4u << 13) | (bits(u, 5, 5) << 12) | (f2 << 10) | (prime(rd) << 7) |
             (bits(u, 4, 0) << 2);
    }
    case COp::c_sub:
    case COp::c_xor:
    case COp::c_or:
    case COp::c_and:
    case COp::c_subw:
    case COp::c_addw: {
      need(rs1 == rd, "rs1 must equal rd");
      static constexpr std::array<std::pair<unsigned, unsigned>, 6> kSel = {
          {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 0}, {1, 1}}};
      const auto sel = kSel[static_cast<unsigned>(in.cop) - static_cast<unsigned>(COp::c_sub)];
      return 1u | (4u << 13) | (sel.first << 12) | (3u << 10) | (prime(rd) << 7) |
             (sel.second << 5) | (prime(rs2) << 2);
    }
    case COp::c_j:
      need(rd == 0 && fits_signed(imm, 12) && imm % 2 == 0, "offset out of range");
      return 1u | (5u << 13) | (bits(u, 11, 11) << 12) | (bits(u, 4, 4) << 11) |
             (bits(u, 9, 8) << 9) | (bits(u, 10, 10) << 8) | (bits(u, 6, 6) << 7) |
             (bits(u, 7, 7) << 6) | (bits(u, 3, 1) << 3) | (bits(u, 5, 5) << 2);
    case COp::c_beqz:
    case COp::c_bnez:
      need(rs2 == 0 && fits_signed(imm, 9) && imm % 2 == 0, "offset out of range");
      return 1u | ((in.cop == COp::c_beqz ? 6u : 7u) << 13) | (bits(u, 8, 8) << 12) |
             (bits(u, 4, 3) << 10) | (prime(rs1) << 7) | (bits(u, 7, 6) << 5) |
             (bits(u, 2, 1) << 3) | (bits(u, 5, 5) << 2);
    case COp::c_slli:
      need(rd != 0 && rs1 == rd && fits_unsigned(imm, 6), "bad operands");
      return 2u | (bits(u, 5, 5) << 12) | (rd << 7) | (bits(u, 4, 0) << 2);
    case COp::c_fldsp:
    case COp::c_ldsp:
      need(rs1 == 2 && fits_unsigned(imm, 9) && imm % 8 == 0, "bad offset");
      need(in.cop == COp::c_fldsp || rd != 0, "rd must not be x0");
      return 2u | ((in.cop == COp::c_fldsp ? 1u : 3u) << 13) | (bits(u, 5, 5) << 12) |
             (rd << 7) | (bits(u, 4, 3) << 5) | (bits(u, 8, 6) << 2);
    case COp::c_lwsp:
      need(rs1 == 2 && rd != 0 && fits_unsigned(imm, 8) && imm % 4 == 0, "bad offset");
      return 2u | (2u << 13) | (bits(u, 5, 5) << 12) | (rd << 7) | (bits(u, 4, 2) << 4) |
             (bits(u, 7, 6) << 2);
    case COp::c_jr:
      need(rd == 0 && rs1 != 0 && imm == 0, "bad operands");
      return 2u | (4u << 13) | (rs1 << 7);
    case COp::c_jalr:
      need(rd == 1 && rs1 != 0 && imm == 0, "bad operands");
      return 2u | (4u << 13) | (1u << 12) | (rs1 << 7);
    case COp::c_mv:
      need(rd != 0 && rs1 == 0 && rs2 != 0, "bad operands");
      return 2u | (4u << 13) | (rd << 7) | (rs2 << 2);
    case COp::c_add:
      need(rd != 0 && rs1 == rd && rs2 != 0, "bad operands");
      return 2u | (4u << 13) | (1u << 12) | (rd << 7) | (rs2 << 2);
    case COp::c_ebreak: return 0x9002;
    case COp::c_fsdsp:
    case COp::c_sdsp:
      need(rs1 == 2 && fits_unsigned(imm, 9) && imm % 8 == 0, "bad offset");
      return 2u | ((in.cop == COp::c_fsdsp ? 5u : 7u) << 13) | (bits(u, 5, 3) << 10) |
             (bits(u, 8, 6) << 7) | (rs2 << 2);
    case COp::c_swsp:
      need(rs1 == 2 && fits_unsigned(imm, 8) && imm % 4 == 0, "bad offset");
      return 2u | (6u << 13) | (bits(u, 5, 2) << 9) | (bits(u, 7, 6) << 7) | (rs2 << 2);
    case COp::none: break;
  }
  unencodable(in, "not a compressed form");
}

std::string xr(unsigned r) { return kXNames[r & 31]; }
std::string fr(unsigned r) { return kFNames[r & 31]; }

std::string fence_set(unsigned v) {
  if (v == 0) return "0";
  std::string s;
  if (v & 8) s += 'i';
  if (v & 4) s += 'o';
  if (v & 2) s += 'r';
  if (v & 1) s += 'w';
  return s;
}

std::string hex_target(std::uint64_t pc, std::int64_t off) {
  return fmt::format("0x{:x}", pc + static_cast<std::uint64_t>(off));
}

std::string csr_text(unsigned csr) {
  if (const char* n = csr_name(csr)) return n;
  return fmt::format("0x{:x}", csr);
}

std::string word_directive(const Instruction& in) {
  return in.size == 2 ? fmt::format(".half 0x{:04x}", in.raw & 0xffffu)
                      : fmt::format(".word 0x{:08x}", in.raw);
}

std::string format16(const Instruction& in, std::uint64_t pc) {
  const char* m = cop_mnemonic(in.cop);
  switch (in.cop) {
    case COp::c_addi4spn: return fmt::format("{} {}, sp, {}", m, xr(in.rd), in.imm);
    case COp::c_fld: return fmt::format("{} {}, {}({})", m, fr(in.rd), in.imm, xr(in.rs1));
    case COp::c_lw:
    case COp::c_ld: return fmt::format("{} {}, {}({})", m, xr(in.rd), in.imm, xr(in.rs1));
    case COp::c_fsd: return fmt::format("{} {}, {}({})", m, fr(in.rs2), in.imm, xr(in.rs1));
    case COp::c_sw:
    case COp::c_sd: return fmt::format("{} {}, {}({})", m, xr(in.rs2), in.imm, xr(in.rs1));
    case COp::c_nop:
    case COp::c_ebreak: return m;
    case COp::c_addi:
    case COp::c_addiw:
    case COp::c_li:
    case COp::c_srli:
    case COp::c_srai:
    case COp::c_andi:
    case COp::c_slli: return fmt::format("{} {}, {}", m, xr(in.rd), in.imm);
    case COp::c_addi16sp: return fmt::format("{} sp, {}", m, in.imm);
    case COp::c_lui:
      return fmt::format("{} {}, 0x{:x}", m, xr(in.rd),
                         static_cast<std::uint64_t>(in.imm >> 12) & 0xfffffu);
    case COp::c_sub:
    case COp::c_xor:
    case COp::c_or:
    case COp::c_and:
    case COp::c_subw:
    case COp::c_addw:
    case COp::c_mv:
    case COp::c_add: return fmt::format("{} {}, {}", m, xr(in.rd), xr(in.rs2));
    case COp::c_j: return fmt::format("{} {}", m, hex_target(pc, in.imm));
    case COp::c_beqz:
    case COp::c_bnez: return fmt::format("{} {}, {}", m, xr(in.rs1), hex_target(pc, in.imm));
    case COp::c_fldsp: return fmt::format("{} {}, {}(sp)", m, fr(in.rd), in.imm);
    case COp::c_lwsp:
    case COp::c_ldsp: return fmt::format("{} {}, {}(sp)", m, xr(in.rd), in.imm);
    case COp::c_jr:
    case COp::c_jalr: return fmt::format("{} {}", m, xr(in.rs1));
    case COp::c_fsdsp: return fmt::format("{} {}, {}(sp)", m, fr(in.rs2), in.imm);
    case COp::c_swsp:
    case COp::c_sdsp: return fmt::format("{} {}, {}(sp)", m, xr(in.rs2), in.imm);
    case COp::none: break;
  }
  return word_directive(in);
}

}  // namespace

const OpInfo& op_info(Op op) { return kOps[static_cast<std::size_t>(op)]; }

std::span<const OpInfo> all_ops() { return kOps; }

std::optional<Op> find_op(std::string_view mnemonic) {
  static const std::unordered_map<std::string_view, Op> index = [] {
    std::unordered_map<std::string_view, Op> m;
    for (const auto& info : kOps) m.emplace(info.mnemonic, info.op);
    return m;
  }();
  auto it = index.find(mnemonic);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

const char* cop_mnemonic(COp c) { return kCopNames[static_cast<std::size_t>(c)]; }

std::optional<COp> find_cop(std::string_view mnemonic) {
  for (std::size_t i = 1; i < std::size(kCopNames); ++i) {
    if (mnemonic == kCopNames[i]) return static_cast<COp>(i);
  }
  return std::nullopt;
}

bool uses_rm(Fmt fmt) {
  return fmt == Fmt::R4 || fmt == Fmt::FR_RM || fmt == Fmt::FR1_RM || fmt == Fmt::F2X_RM ||
         fmt == Fmt::X2F_RM;
}

bool rd_is_fp(Fmt fmt, Op) {
  return fmt == Fmt::FLOAD || fmt == Fmt::R4 || fmt == Fmt::FR_RM || fmt == Fmt::FR ||
         fmt == Fmt::FR1_RM || fmt == Fmt::X2F || fmt == Fmt::X2F_RM;
}

bool rs1_is_fp(Fmt fmt, Op) {
  return fmt == Fmt::R4 || fmt == Fmt::FR_RM || fmt == Fmt::FR || fmt == Fmt::FR1_RM ||
         fmt == Fmt::FCMP || fmt == Fmt::F2X || fmt == Fmt::F2X_RM;
}

bool rs2_is_fp(Fmt fmt, Op) {
  return fmt == Fmt::FSTORE || fmt == Fmt::R4 || fmt == Fmt::FR_RM || fmt == Fmt::FR ||
         fmt == Fmt::FCMP;
}

Instruction decode32(std::uint32_t raw) {
  Instruction in;
  in.raw = raw;
  in.size = 4;
  if ((raw & 3u) != 3u) return in;
  for (const OpInfo* info : buckets()[(raw & 0x7f) >> 2]) {
    if ((raw & info->mask) != info->match) continue;
    in.op = info->op;
    fill_fields(in, *info);
    if (uses_rm(info->fmt) && (in.rm == 5 || in.rm == 6)) in.op = Op::illegal;
    return in;
  }
  return in;
}

Instruction decode16(std::uint16_t raw) {
  const std::uint32_t r = raw;
  const unsigned q = r & 3u;
  const unsigned f3 = bits(r, 15, 13);
  const unsigned rd = bits(r, 11, 7);
  const unsigned rs2 = bits(r, 6, 2);
  const unsigned rdp = bits(r, 4, 2) + 8;
  const unsigned rs1p = bits(r, 9, 7) + 8;
  const std::int64_t imm6 = sext((bits(r, 12, 12) << 5) | bits(r, 6, 2), 6);
  const std::uint32_t shamt = (bits(r, 12, 12) << 5) | bits(r, 6, 2);
  const std::uint32_t uimm_d = (bits(r, 12, 10) << 3) | (bits(r, 6, 5) << 6);
  const std::uint32_t uimm_w = (bits(r, 12, 10) << 3) | (bits(r, 6, 6) << 2) | (bits(r, 5, 5) << 6);

  if (q == 0) {
    switch (f3) {
      case 0: {
        const std::uint32_t nz = (bits(r, 12, 11) << 4) | (bits(r, 10, 7) << 6) |
                                 (bits(r, 6, 6) << 2) | (bits(r, 5, 5) << 3);
        if (nz == 0) return illegal16(raw);
        return compressed(raw, COp::c_addi4spn, Op::addi, rdp, 2, 0, nz);
      }
      case 1: return compressed(raw, COp::c_fld, Op::fld, rdp, rs1p, 0, uimm_d);
      case 2: return compressed(raw, COp::c_lw, Op::lw, rdp, rs1p, 0, uimm_w);
      case 3: return compressed(raw, COp::c_ld, Op::ld, rdp, rs1p, 0, uimm_d);
      case 5: return compressed(raw, COp::c_fsd, Op::fsd, 0, rs1p, rdp, uimm_d);
      case 6: return compressed(raw, COp::c_sw, Op::sw, 0, rs1p, rdp, uimm_w);
      case 7: return compressed(raw, COp::c_sd, Op::sd, 0, rs1p, rdp, uimm_d);
      default: return illegal16(raw);
    }
  }

  if (q == 1) {
    switch (f3) {
      case 0:
        if (rd == 0) {
          if (imm6 != 0) return illegal16(raw);
          return compressed(raw, COp::c_nop, Op::addi, 0, 0, 0, 0);
        }
        return compressed(raw, COp::c_addi, Op::addi, rd, rd, 0, imm6);
      case 1:
        if (rd == 0) return illegal16(raw);
        return compressed(raw, COp::c_addiw, Op::addiw, rd, rd, 0, imm6);
      case 2:
        if (rd == 0) return illegal16(raw);
        return compressed(raw, COp::c_li, Op::addi, rd, 0, 0, imm6);
      case 3: {
        if (rd == 2) {
          const std::int64_t nz =
              sext((bits(r, 12, 12) << 9) | (bits(r, 6, 6) << 4) | (bits(r, 5, 5) << 6) |
                       (bits(r, 4, 3) << 7) | (bits(r, 2, 2) << 5),
                   10);
          if (nz == 0) return illegal16(raw);
          return compressed(raw, COp::c_addi16sp, Op::addi, 2, 2, 0, nz);
        }
        if (rd == 0 || imm6 == 0) return illegal16(raw);
        return compressed(raw, COp::c_lui, Op::lui, rd, 0, 0, imm6 * 4096);
      }
      case 4: {
        switch (bits(r, 11, 10)) {
          case 0: return compressed(raw, COp::c_srli, Op::srli, rs1p, rs1p, 0, shamt);
          case 1: return compressed(raw, COp::c_srai, Op::srai, rs1p, rs1p, 0, shamt);
          case 2: return compressed(raw, COp::c_andi, Op::andi, rs1p, rs1p, 0, imm6);
          default: {
            const unsigned sel = bits(r, 6, 5);
            if (bits(r, 12, 12) == 0) {
              static constexpr COp kC[] = {COp::c_sub, COp::c_xor, COp::c_or, COp::c_and};
              static constexpr Op kO[] = {Op::sub, Op::xor_, Op::or_, Op::and_};
              return compressed(raw, kC[sel], kO[sel], rs1p, rs1p, rdp, 0);
            }
            if (sel == 0) return compressed(raw, COp::c_subw, Op::subw, rs1p, rs1p, rdp, 0);
            if (sel == 1) return compressed(raw, COp::c_addw, Op::addw, rs1p, rs1p, rdp, 0);
            return illegal16(raw);
          }
        }
      }
      case 5: {
        const std::int64_t off =
            sext((bits(r, 12, 12) << 11) | (bits(r, 11, 11) << 4) | (bits(r, 10, 9) << 8) |
                     (bits(r, 8, 8) << 10) | (bits(r, 7, 7) << 6) | (bits(r, 6, 6) << 7) |
                     (bits(r, 5, 3) << 1) | (bits(r, 2, 2) << 5),
                 12);
        return compressed(raw, COp::c_j, Op::jal, 0, 0, 0, off);
      }
      default: {
        const std::int64_t off =
            sext((bits(r, 12, 12) << 8) | (bits(r, 11, 10) << 3) | (bits(r, 6, 5) << 6) |
                     (bits(r, 4, 3) << 1) | (bits(r, 2, 2) << 5),
                 9);
        return f3 == 6 ? compressed(raw, COp::c_beqz, Op::beq, 0, rs1p, 0, off)
                       : compressed(raw, COp::c_bnez, Op::bne, 0, rs1p, 0, off);
      }
    }
  }

  if (q == 2) {
    switch (f3) {
      case 0:
        if (rd == 0) return illegal16(raw);
        return compressed(raw, COp::c_slli, Op::slli, rd, rd, 0, shamt);
      case 1:
      case 3: {
        const std::uint32_t off = (bits(r, 12, 12) << 5) | (bits(r, 6, 5) << 3) |
                                  (bits(r, 4, 2) << 6);
        if (f3 == 1) return compressed(raw, COp::c_fldsp, Op::fld, rd, 2, 0, off);
        if (rd == 0) return illegal16(raw);
        return compressed(raw, COp::c_ldsp, Op::ld, rd, 2, 0, off);
      }
      case 2: {
        if (rd == 0) return illegal16(raw);
        const std::uint32_t off = (bits(r, 12, 12) << 5) | (bits(r, 6, 4) << 2) |
                                  (bits(r, 3, 2) << 6);
        return compressed(raw, COp::c_lwsp, Op::lw, rd, 2, 0, off);
      }
      case 4:
        if (bits(r, 12, 12) == 0) {
          if (rs2 == 0) {
            if (rd == 0) return illegal16(raw);
            return compressed(raw, COp::c_jr, Op::jalr, 0, rd, 0, 0);
          }
          if (rd == 0) return illegal16(raw);
          return compressed(raw, COp::c_mv, Op::add, rd, 0, rs2, 0);
        }
        if (rs2 == 0) {
          if (rd == 0) return compressed(raw, COp::c_ebreak, Op::ebreak, 0, 0, 0, 0);
          return compressed(raw, COp::c_jalr, Op::jalr, 1, rd, 0, 0);
        }
        if (rd == 0) return illegal16(raw);
        return compressed(raw, COp::c_add, Op::add, rd, rd, rs2, 0);
      case 5:
      case 7: {
        const std::uint32_t off = (bits(r, 12, 10) << 3) | (bits(r, 9, 7) << 6);
        return f3 == 5 ? compressed(raw, COp::c_fsdsp, Op::fsd, 0, 2, rs2, off)
                       : compressed(raw, COp::c_sdsp, Op::sd, 0, 2, rs2, off);
      }
      default: {
        const std::uint32_t off = (bits(r, 12, 9) << 2) | (bits(r, 8, 7) << 6);
        return compressed(raw, COp::c_swsp, Op::sw, 0, 2, rs2, off);
      }
    }
  }
  return illegal16(raw);
}

Instruction decode(std::uint32_t raw) {
  if (is_compressed_parcel(static_cast<std::uint16_t>(raw))) {
    return decode16(static_cast<std::uint16_t>(raw));
  }
  return decode32(raw);
}

std::uint32_t encode(const Instruction& in) {
  if (in.op == Op::illegal) unencodable(in, "illegal instruction");
  if (in.cop != COp::none) return encode16(in);
  const OpInfo& info = op_info(in.op);
  auto need = [&](bool ok, const char* why) {
    if (!ok) unencodable(in, why);
  };
  need(in.rd < 32 && in.rs1 < 32 && in.rs2 < 32 && in.rs3 < 32, "register out of range");
  const std::uint32_t rd = std::uint32_t{in.rd} << 7;
  const std::uint32_t rs1 = std::uint32_t{in.rs1} << 15;
  const std::uint32_t rs2 = std::uint32_t{in.rs2} << 20;
  const auto u = static_cast<std::uint32_t>(in.imm);
  std::uint32_t w = info.match;
  switch (info.fmt) {
    case Fmt::U:
      need(in.imm % 4096 == 0 && fits_signed(in.imm, 32), "immediate out of range");
      w |= rd | (u & 0xfffff000u);
      break;
    case Fmt::J:
      need(in.imm % 2 == 0 && fits_signed(in.imm, 21), "jump offset out of range");
      w |= rd | (bits(u, 20, 20) << 31) | (bits(u, 10, 1) << 21) | (bits(u, 11, 11) << 20) |
           (bits(u, 19, 12) << 12);
      break;
    case Fmt::JALR:
    case Fmt::LOAD:
    case Fmt::I:
    case Fmt::FLOAD:
      need(fits_signed(in.imm, 12), "immediate out of range");
      w |= rd | rs1 | (u << 20);
      break;
    case Fmt::B:
      need(in.imm % 2 == 0 && fits_signed(in.imm, 13), "branch offset out of range");
      w |= rs1 | rs2 | (bits(u, 12, 12) << 31) | (bits(u, 10, 5) << 25) | (bits(u, 4, 1) << 8) |
           (bits(u, 11, 11) << 7);
      break;
    case Fmt::STORE:
    case Fmt::FSTORE:
      need(fits_signed(in.imm, 12), "offset out of range");
      w |= rs1 | rs2 | (bits(u, 11, 5) << 25) | (bits(u, 4, 0) << 7);
      break;
    case Fmt::SHIFT:
      need(fits_unsigned(in.imm, 6), "shift amount out of range");
      w |= rd | rs1 | (u << 20);
      break;
    case Fmt::SHIFTW:
      need(fits_unsigned(in.imm, 5), "shift amount out of range");
      w |= rd | rs1 | (u << 20);
      break;
    case Fmt::R:
    case Fmt::FR:
    case Fmt::FCMP: w |= rd | rs1 | rs2; break;
    case Fmt::FENCE:
    case Fmt::NONE:
      if (info.mask != 0xffffffffu) {
        need(fits_unsigned(in.imm, 12), "immediate out of range");
        w |= rd | rs1 | (u << 20);
      }
      break;
    case Fmt::SFENCE: w |= rs1 | rs2; break;
    case Fmt::CSR:
    case Fmt::CSRI:
      need(fits_unsigned(in.imm, 12), "csr number out of range");
      w |= rd | rs1 | (u << 20);
      break;
    case Fmt::AMO: w |= rd | rs1 | rs2 | ((in.rm & 3u) << 25); break;
    case Fmt::LR: w |= rd | rs1 | ((in.rm & 3u) << 25); break;
    case Fmt::R4:
      need(in.rm < 8, "bad rounding mode");
      w |= rd | rs1 | rs2 | (std::uint32_t{in.rs3} << 27) | (std::uint32_t{in.rm} << 12);
      break;
    case Fmt::FR_RM:
      need(in.rm < 8, "bad rounding mode");
      w |= rd | rs1 | rs2 | (std::uint32_t{in.rm} << 12);
      break;
    case Fmt::FR1_RM:
    case Fmt::F2X_RM:
    case Fmt::X2F_RM:
      need(in.rm < 8, "bad rounding mode");
      w |= rd | rs1 | (std::uint32_t{in.rm} << 12);
      break;
    case Fmt::F2X:
    case Fmt::X2F: w |= rd | rs1; break;
  }
  return w;
}

const char* xreg_name(unsigned r) { return kXNames[r & 31]; }
const char* freg_name(unsigned r) { return kFNames[r & 31]; }

std::optional<unsigned> parse_xreg(std::string_view s) {
  for (unsigned i = 0; i < 32; ++i) {
    if (s == kXNames[i]) return i;
  }
  if (s == "fp") return 8;
  if (s.size() >= 2 && s.size() <= 3 && s[0] == 'x') {
    unsigned v = 0;
    for (char c : s.substr(1)) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + static_cast<unsigned>(c - '0');
    }
    if (s.size() == 3 && s[1] == '0') return std::nullopt;
    if (v < 32) return v;
  }
  return std::nullopt;
}

std::optional<unsigned> parse_freg(std::string_view s) {
  for (unsigned i = 0; i < 32; ++i) {
    if (s == kFNames[i]) return i;
  }
  if (s.size() >= 2 && s.size() <= 3 && s[0] == 'f') {
    unsigned v = 0;
    for (char c : s.substr(1)) {
      if (c < '0' || c > '9') return std::nullopt;
      v = v * 10 + static_cast<unsigned>(c - '0');
    }
    if (s.size() == 3 && s[1] == '0') return std::nullopt;
    if (v < 32) return v;
  }
  return std::nullopt;
}

const char* rm_name(unsigned rm) { return rm < 8 ? kRmNames[rm] : nullptr; }

std::optional<unsigned> parse_rm(std::string_view s) {
  for (unsigned i = 0; i < 8; ++i) {
    if (kRmNames[i] != nullptr && s == kRmNames[i]) return i;
  }
  return std::nullopt;
}

const char* csr_name(unsigned csr) {
  for (const auto& c : kCsrs) {
    if (c.num == csr) return c.name;
  }
  return nullptr;
}

std::optional<unsigned> parse_csr(std::string_view s) {
  for (const auto& c : kCsrs) {
    if (s == c.name) return c.num;
  }
  return std::nullopt;
}

std::string format_instruction(const Instruction& in, std::uint64_t pc) {
  if (!in.legal()) return word_directive(in);
  if (in.cop != COp::none) return format16(in, pc);
  const OpInfo& info = op_info(in.op);
  const char* m = info.mnemonic;
  auto with_rm = [&](std::string s) {
    if (in.rm != kRmDyn) s += fmt::format(", {}", rm_name(in.rm));
    return s;
  };
  static constexpr const char* kAqRl[] = {"", ".rl", ".aq", ".aqrl"};
  switch (info.fmt) {
    case Fmt::U:
      return fmt::format("{} {}, 0x{:x}", m, xr(in.rd),
                         (static_cast<std::uint64_t>(in.imm) >> 12) & 0xfffffu);
    case Fmt::J: return fmt::format("{} {}, {}", m, xr(in.rd), hex_target(pc, in.imm));
    case Fmt::JALR:
    case Fmt::LOAD: return fmt::format("{} {}, {}({})", m, xr(in.rd), in.imm, xr(in.rs1));
    case Fmt::B:
      return fmt::format("{} {}, {}, {}", m, xr(in.rs1), xr(in.rs2), hex_target(pc, in.imm));
    case Fmt::STORE: return fmt::format("{} {}, {}({})", m, xr(in.rs2), in.imm, xr(in.rs1));
    case Fmt::I:
    case Fmt::SHIFT:
    case Fmt::SHIFTW: return fmt::format("{} {}, {}, {}", m, xr(in.rd), xr(in.rs1), in.imm);
    case Fmt::R: return fmt::format("{} {}, {}, {}", m, xr(in.rd), xr(in.rs1), xr(in.rs2));
    case Fmt::FENCE: {
      const auto v = static_cast<unsigned>(in.imm);
      if ((v >> 8) != 0 || in.rd != 0 || in.rs1 != 0) return word_directive(in);
      return fmt::format("{} {}, {}", m, fence_set((v >> 4) & 15u), fence_set(v & 15u));
    }
    case Fmt::NONE:
      if (in.rd != 0 || in.rs1 != 0 || (info.mask != 0xffffffffu && in.imm != 0)) {
        return word_directive(in);
      }
      return m;
    case Fmt::SFENCE: return fmt::format("{} {}, {}", m, xr(in.rs1), xr(in.rs2));
    case Fmt::CSR:
      return fmt::format("{} {}, {}, {}", m, xr(in.rd), csr_text(static_cast<unsigned>(in.imm)),
                         xr(in.rs1));
    case Fmt::CSRI:
      return fmt::format("{} {}, {}, {}", m, xr(in.rd), csr_text(static_cast<unsigned>(in.imm)),
                         in.rs1);
    case Fmt::AMO:
      return fmt::format("{}{} {}, {}, ({})", m, kAqRl[in.rm & 3u], xr(in.rd), xr(in.rs2),
                         xr(in.rs1));
    case Fmt::LR: return fmt::format("{}{} {}, ({})", m, kAqRl[in.rm & 3u], xr(in.rd), xr(in.rs1));
    case Fmt::FLOAD: return fmt::format("{} {}, {}({})", m, fr(in.rd), in.imm, xr(in.rs1));
    case Fmt::FSTORE: return fmt::format("{} {}, {}({})", m, fr(in.rs2), in.imm, xr(in.rs1));
    case Fmt::R4:
      return with_rm(
          fmt::format("{} {}, {}, {}, {}", m, fr(in.rd), fr(in.rs1), fr(in.rs2), fr(in.rs3)));
    case Fmt::FR_RM:
      return with_rm(fmt::format("{} {}, {}, {}", m, fr(in.rd), fr(in.rs1), fr(in.rs2)));
    case Fmt::FR: return fmt::format("{} {}, {}, {}", m, fr(in.rd), fr(in.rs1), fr(in.rs2));
    case Fmt::FR1_RM: return with_rm(fmt::format("{} {}, {}", m, fr(in.rd), fr(in.rs1)));
    case Fmt::FCMP: return fmt::format("{} {}, {}, {}", m, xr(in.rd), fr(in.rs1), fr(in.rs2));
    case Fmt::F2X: return fmt::format("{} {}, {}", m, xr(in.rd), fr(in.rs1));
    case Fmt::F2X_RM: return with_rm(fmt::format("{} {}, {}", m, xr(in.rd), fr(in.rs1)));
    case Fmt::X2F: return fmt::format("{} {}, {}", m, fr(in.rd), xr(in.rs1));
    case Fmt::X2F_RM: return with_rm(fmt::format("{} {}, {}", m, fr(in.rd), xr(in.rs1)));
  }
  return word_directive(in);
}

}  // namespace basilisk::rv64
