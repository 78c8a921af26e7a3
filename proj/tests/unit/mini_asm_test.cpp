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

#include "basilisk/mini_asm.hpp"

#include <gtest/gtest.h>

#include <random>

#include "basilisk/rv64/isa.hpp"

namespace basilisk::masm {
namespace {

using rv64::Instruction;
using rv64::Op;

std::vector<std::uint8_t> bytes_of(std::string_view src, Addr base = 0x80000000) {
  return assemble(src, base).image;
}

TEST(MiniAsm, AddiEncoding) {
  EXPECT_EQ(bytes_of("addi x1, x0, 5"), (std::vector<std::uint8_t>{0x93, 0x00, 0x50, 0x00}));
}

TEST(MiniAsm, NopIsAddiZero) { EXPECT_EQ(bytes_of("nop"), bytes_of("addi x0, x0, 0")); }

TEST(MiniAsm, SelfLoopHasZeroOffset) {
  const auto r = assemble("loop: j loop", 0x80000000);
  ASSERT_EQ(r.image.size(), 4u);
  EXPECT_EQ(r.image, bytes_of("jal x0, 0x80000000"));
  EXPECT_EQ(r.symbols.at("loop"), 0x80000000u);
  const std::string text = disassemble(r.image, 0x80000000);
  EXPECT_EQ(text, "jal zero, 0x80000000\n");
  EXPECT_EQ(assemble(text, 0x80000000).image, r.image);
}

TEST(MiniAsm, EcallDisassembly) {
  const std::uint8_t w[] = {0x73, 0, 0, 0};
  EXPECT_EQ(disassemble(w, 0), "ecall\n");
}

TEST(MiniAsm, UnknownWordBecomesDirective) {
  const std::uint8_t w[] = {0xff, 0xff, 0xff, 0xff};
  EXPECT_EQ(disassemble(w, 0), ".word 0xffffffff\n");
  const std::uint8_t h[] = {0x00, 0x00};
  EXPECT_EQ(disassemble(h, 0), ".half 0x0000\n");
}

TEST(MiniAsm, ErrorsCarryLineNumbers) {
  auto line_of = [](std::string_view src) {
    try {
      assemble(src, 0);
    } catch (const AsmError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("nop\nfoo: nop\nfoo: nop\n"), 3);
  EXPECT_EQ(line_of("nop\n\nfrobnicate a0\n"), 3);
  EXPECT_EQ(line_of("beq a0, a1, far\n.zero 8192\nfar: nop\n"), 1);
  EXPECT_EQ(line_of("addi a0, a0, 4096\n"), 1);
  EXPECT_EQ(line_of("nop\nj nowhere\n"), 2);
}

TEST(MiniAsm, LabelArithmetic) {
  const auto r = assemble("a: nop\nb: nop\n.dword b+8\n.word b-a\n", 0x1000);
  ASSERT_EQ(r.image.size(), 20u);
  EXPECT_EQ(r.image[8], 0x0c);
  EXPECT_EQ(r.image[9], 0x10);
  EXPECT_EQ(r.image[16], 4);
}

TEST(MiniAsm, DataSectionFollowsText) {
  const auto r = assemble(".data\nmsg: .asciz \"hi\\n\"\n.text\nstart: la a0, msg\n", 0x1000);
  EXPECT_EQ(r.data_base, 0x1010u);
  EXPECT_EQ(r.symbols.at("msg"), 0x1010u);
  EXPECT_EQ(r.image.size(), 0x14u);
  EXPECT_EQ(r.image[0x10], 'h');
  EXPECT_EQ(r.image[0x12], '\n');
  EXPECT_EQ(r.image[0x13], 0);
}

TEST(MiniAsm, AlignAndOrg) {
  const auto r = assemble("nop\n.align 4\nx: nop\n.org 0x40\ny: .byte 1\n", 0);
  EXPECT_EQ(r.symbols.at("x"), 16u);
  EXPECT_EQ(r.symbols.at("y"), 0x40u);
  EXPECT_EQ(r.image.size(), 0x41u);
}

TEST(MiniAsm, EquConstants) {
  EXPECT_EQ(bytes_of(".equ N, 5\naddi x1, x0, N\n"), bytes_of("addi x1, x0, 5"));
}

TEST(MiniAsm, BranchPseudosSwapOperands) {
  EXPECT_EQ(bytes_of("x: bgt a0, a1, x"), bytes_of("x: blt a1, a0, x"));
  EXPECT_EQ(bytes_of("x: ble a0, a1, x"), bytes_of("x: bge a1, a0, x"));
  EXPECT_EQ(bytes_of("x: bgtu a0, a1, x"), bytes_of("x: bltu a1, a0, x"));
  EXPECT_EQ(bytes_of("x: bleu a0, a1, x"), bytes_of("x: bgeu a1, a0, x"));
  EXPECT_EQ(bytes_of("x: beqz a0, x"), bytes_of("x: beq a0, zero, x"));
  EXPECT_EQ(bytes_of("ret"), bytes_of("jalr x0, 0(x1)"));
  EXPECT_EQ(bytes_of("mv a0, a1"), bytes_of("addi a0, a1, 0"));
}

TEST(MiniAsm, CallReachesFarTarget) {
  const auto r = assemble("call f\n.zero 0x12344\nf: ret\n", 0x80000000);
  const Instruction auipc = rv64::decode(r.image[0] | r.image[1] << 8 | r.image[2] << 16 |
                                         static_cast<std::uint32_t>(r.image[3]) << 24);
  const Instruction jalr = rv64::decode(r.image[4] | r.image[5] << 8 | r.image[6] << 16 |
                                        static_cast<std::uint32_t>(r.image[7]) << 24);
  ASSERT_EQ(auipc.op, Op::auipc);
  ASSERT_EQ(jalr.op, Op::jalr);
  EXPECT_EQ(auipc.imm + jalr.imm, 0x1234c);
  EXPECT_EQ(jalr.rd, 1);
}

// Evaluates an li expansion the way the hardware would.
std::uint64_t run_li(const std::vector<Instruction>& seq) {
  std::uint64_t r = 0;
  for (const Instruction& in : seq) {
    const std::uint64_t src = in.rs1 == 0 ? 0 : r;
    switch (in.op) {
      case Op::lui: r = static_cast<std::uint64_t>(in.imm); break;
      case Op::addi: r = src + static_cast<std::uint64_t>(in.imm); break;
      case Op::addiw:
        r = static_cast<std::uint64_t>(static_cast<std::int64_t>(
            static_cast<std::int32_t>(static_cast<std::uint32_t>(src + in.imm))));
        break;
      case Op::slli: r = src << in.imm; break;
      default: ADD_FAILURE() << "unexpected op in li expansion";
    }
  }
  return r;
}

TEST(MiniAsm, LiMaterializesAnyConstantInEightOrFewer) {
  std::mt19937_64 rng(7);
  std::vector<std::int64_t> values = {0,          1,          -1,         2047,        -2048,
                                      2048,       0x7ffff800, INT32_MAX,  INT32_MIN,   0x80000000,
                                      INT64_MAX,  INT64_MIN,  0x123456789abcdef0, -0x123456789ab};
  for (int i = 0; i < 20000; ++i) {
    std::uint64_t v = rng();
    v >>= rng() % 64;
    if (rng() & 1) v = ~v;
    values.push_back(static_cast<std::int64_t>(v));
  }
  for (std::int64_t v : values) {
    const auto seq = materialize(10, v);
    ASSERT_LE(seq.size(), 8u) << v;
    ASSERT_EQ(run_li(seq), static_cast<std::uint64_t>(v)) << v;
    for (const auto& in : seq) ASSERT_NO_THROW(rv64::encode(in));
  }
}

TEST(MiniAsm, SymbolFileRoundTrip) {
  const auto r = assemble("a: nop\nb: nop\n", 0x80000000);
  const std::string text = symbol_file(r.symbols);
  EXPECT_EQ(text, "a 0000000080000000\nb 0000000080000004\n");
  EXPECT_EQ(parse_symbol_file(text), r.symbols);
}

// Every legal encoding printed by the disassembler reassembles to itself.
TEST(MiniAsm, DisassemblyIsAFixpointForRandomWords) {
  std::mt19937 rng(11);
  for (int i = 0; i < 200000; ++i) {
    const std::uint32_t w = rng();
    std::uint8_t b[4] = {static_cast<std::uint8_t>(w), static_cast<std::uint8_t>(w >> 8),
                         static_cast<std::uint8_t>(w >> 16), static_cast<std::uint8_t>(w >> 24)};
    const Addr pc = 0x80000000u + 2 * (rng() % 1024);
    const std::string text = disassemble(b, pc);
    std::vector<std::uint8_t> again;
    try {
      again = assemble(text, pc).image;
    } catch (const AsmError& e) {
      FAIL() << "0x" << std::hex << w << ": " << text << " -> " << e.what();
    }
    ASSERT_EQ(again, std::vector<std::uint8_t>(b, b + 4)) << std::hex << w << ": " << text;
  }
}

TEST(MiniAsm, EveryCompressedParcelRoundTrips) {
  for (std::uint32_t p = 0; p < 0x10000; ++p) {
    if (!rv64::is_compressed_parcel(static_cast<std::uint16_t>(p))) continue;
    const std::uint8_t b[2] = {static_cast<std::uint8_t>(p), static_cast<std::uint8_t>(p >> 8)};
    const std::string text = disassemble(b, 0x1000);
    std::vector<std::uint8_t> again;
    try {
      again = assemble(text, 0x1000).image;
    } catch (const AsmError& e) {
      FAIL() << std::hex << p << ": " << text << " -> " << e.what();
    }
    ASSERT_EQ(again, std::vector<std::uint8_t>(b, b + 2)) << std::hex << p << ": " << text;
  }
}

TEST(MiniAsm, VocabularyIsClosed) {
  for (const rv64::OpInfo& info : rv64::all_ops()) {
    Instruction in;
    in.op = info.op;
    in.rm = rv64::uses_rm(info.fmt) ? rv64::kRmDyn : 0;
    if (info.fmt == rv64::Fmt::FENCE) in.imm = 0xff;
    if (info.fmt == rv64::Fmt::U) in.imm = 0x1000;
    std::uint32_t w = 0;
    ASSERT_NO_THROW(w = rv64::encode(in)) << info.mnemonic;
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(w), static_cast<std::uint8_t>(w >> 8),
                               static_cast<std::uint8_t>(w >> 16),
                               static_cast<std::uint8_t>(w >> 24)};
    const std::string text = disassemble(b, 0x1000);
    EXPECT_EQ(text.substr(0, std::string(info.mnemonic).size()), info.mnemonic) << text;
    EXPECT_EQ(assemble(text, 0x1000).image, std::vector<std::uint8_t>(b, b + 4)) << text;
    EXPECT_EQ(rv64::decode(w).op, info.op) << info.mnemonic;
  }
  for (std::size_t c = 1; c <= rv64::kCOpCount; ++c) {
    const auto cop = static_cast<rv64::COp>(c);
    EXPECT_EQ(rv64::find_cop(rv64::cop_mnemonic(cop)), cop);
  }
}

}  // namespace
}  // namespace basilisk::masm
