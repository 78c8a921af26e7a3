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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace basilisk::rv64 {

/// Operand syntax / field layout classes.
enum class Fmt : std::uint8_t {
  U,       // rd, imm20
  J,       // rd, target
  JALR,    // rd, off(rs1)
  B,       // rs1, rs2, target
  LOAD,    // rd, off(rs1)
  STORE,   // rs2, off(rs1)
  I,       // rd, rs1, imm12
  SHIFT,   // rd, rs1, shamt6
  SHIFTW,  // rd, rs1, shamt5
  R,       // rd, rs1, rs2
  FENCE,   // pred, succ
  NONE,    // no operands
  SFENCE,  // rs1, rs2
  CSR,     // rd, csr, rs1
  CSRI,    // rd, csr, uimm5
  AMO,     // rd, rs2, (rs1)
  LR,      // rd, (rs1)
  FLOAD,   // fd, off(rs1)
  FSTORE,  // fs2, off(rs1)
  R4,      // fd, fs1, fs2, fs3[, rm]
  FR_RM,   // fd, fs1, fs2[, rm]
  FR,      // fd, fs1, fs2
  FR1_RM,  // fd, fs1[, rm]
  FCMP,    // rd, fs1, fs2
  F2X,     // rd, fs1
  F2X_RM,  // rd, fs1[, rm]
  X2F,     // fd, rs1
  X2F_RM,  // fd, rs1[, rm]
};

// clang-format off
#define BASILISK_M_U(op)           (op), 0x0000007fu
#define BASILISK_M_I(op, f3)       ((op) | ((f3) << 12)), 0x0000707fu
#define BASILISK_M_R(op, f3, f7)   ((op) | ((f3) << 12) | ((f7) << 25)), 0xfe00707fu
#define BASILISK_M_SH(op, f3, f6)  ((op) | ((f3) << 12) | ((f6) << 26)), 0xfc00707fu
#define BASILISK_M_AMO(f3, f5)     (0x2fu | ((f3) << 12) | ((f5) << 27)), 0xf800707fu
#define BASILISK_M_LR(f3)          (0x2fu | ((f3) << 12) | (2u << 27)), 0xf9f0707fu
#define BASILISK_M_FR(f7)          (0x53u | ((f7) << 25)), 0xfe00007fu
#define BASILISK_M_FR3(f7, f3)     (0x53u | ((f3) << 12) | ((f7) << 25)), 0xfe00707fu
#define BASILISK_M_FU(f7, r2)      (0x53u | ((r2) << 20) | ((f7) << 25)), 0xfff0007fu
#define BASILISK_M_FU3(f7, r2, f3) (0x53u | ((f3) << 12) | ((r2) << 20) | ((f7) << 25)), 0xfff0707fu
#define BASILISK_M_R4(op, fmt)     ((op) | ((fmt) << 25)), 0x0600007fu
#define BASILISK_M_EXACT(v)        (v), 0xffffffffu

#define BASILISK_RV64_OPS(X) \
  X(lui,        "lui",        U,      BASILISK_M_U(0x37u)) \
  X(auipc,      "auipc",      U,      BASILISK_M_U(0x17u)) \
  X(jal,        "jal",        J,      BASILISK_M_U(0x6fu)) \
  X(jalr,       "jalr",       JALR,   BASILISK_M_I(0x67u, 0u)) \
  X(beq,        "beq",        B,      BASILISK_M_I(0x63u, 0u)) \
  X(bne,        "bne",        B,      BASILISK_M_I(0x63u, 1u)) \
  X(blt,        "blt",        B,      BASILISK_M_I(0x63u, 4u)) \
  X(bge,        "bge",        B,      BASILISK_M_I(0x63u, 5u)) \
  X(bltu,       "bltu",       B,      BASILISK_M_I(0x63u, 6u)) \
  X(bgeu,       "bgeu",       B,      BASILISK_M_I(0x63u, 7u)) \
  X(lb,         "lb",         LOAD,   BASILISK_M_I(0x03u, 0u)) \
  X(lh,         "lh",         LOAD,   BASILISK_M_I(0x03u, 1u)) \
  X(lw,         "lw",         LOAD,   BASILISK_M_I(0x03u, 2u)) \
  X(ld,         "ld",         LOAD,   BASILISK_M_I(0x03u, 3u)) \
  X(lbu,        "lbu",        LOAD,   BASILISK_M_I(0x03u, 4u)) \
  X(lhu,        "lhu",        LOAD,   BASILISK_M_I(0x03u, 5u)) \
  X(lwu,        "lwu",        LOAD,   BASILISK_M_I(0x03u, 6u)) \
  X(sb,         "sb",         STORE,  BASILISK_M_I(0x23u, 0u)) \
  X(sh,         "sh",         STORE,  BASILISK_M_I(0x23u, 1u)) \
  X(sw,         "sw",         STORE,  BASILISK_M_I(0x23u, 2u)) \
  X(sd,         "sd",         STORE,  BASILISK_M_I(0x23u, 3u)) \
  X(addi,       "addi",       I,      BASILISK_M_I(0x13u, 0u)) \
  X(slti,       "slti",       I,      BASILISK_M_I(0x13u, 2u)) \
  X(sltiu,      "sltiu",      I,      BASILISK_M_I(0x13u, 3u)) \
  X(xori,       "xori",       I,      BASILISK_M_I(0x13u, 4u)) \
  X(ori,        "ori",        I,      BASILISK_M_I(0x13u, 6u)) \
  X(andi,       "andi",       I,      BASILISK_M_I(0x13u, 7u)) \
  X(slli,       "slli",       SHIFT,  BASILISK_M_SH(0x13u, 1u, 0x00u)) \
  X(srli,       "srli",       SHIFT,  BASILISK_M_SH(0x13u, 5u, 0x00u)) \
  X(srai,       "srai",       SHIFT,  BASILISK_M_SH(0x13u, 5u, 0x10u)) \
  X(add,        "add",        R,      BASILISK_M_R(0x33u, 0u, 0x00u)) \
  X(sub,        "sub",        R,      BASILISK_M_R(0x33u, 0u, 0x20u)) \
  X(sll,        "sll",        R,      BASILISK_M_R(0x33u, 1u, 0x00u)) \
  X(slt,        "slt",        R,      BASILISK_M_R(0x33u, 2u, 0x00u)) \
  X(sltu,       "sltu",       R,      BASILISK_M_R(0x33u, 3u, 0x00u)) \
  X(xor_,       "xor",        R,      BASILISK_M_R(0x33u, 4u, 0x00u)) \
  X(srl,        "srl",        R,      BASILISK_M_R(0x33u, 5u, 0x00u)) \
  X(sra,        "sra",        R,      BASILISK_M_R(0x33u, 5u, 0x20u)) \
  X(or_,        "or",         R,      BASILISK_M_R(0x33u, 6u, 0x00u)) \
  X(and_,       "and",        R,      BASILISK_M_R(0x33u, 7u, 0x00u)) \
  X(fence,      "fence",      FENCE,  BASILISK_M_I(0x0fu, 0u)) \
  X(fence_i,    "fence.i",    NONE,   BASILISK_M_I(0x0fu, 1u)) \
  X(ecall,      "ecall",      NONE,   BASILISK_M_EXACT(0x00000073u)) \
  X(ebreak,     "ebreak",     NONE,   BASILISK_M_EXACT(0x00100073u)) \
  X(addiw,      "addiw",      I,      BASILISK_M_I(0x1bu, 0u)) \
  X(slliw,      "slliw",      SHIFTW, BASILISK_M_R(0x1bu, 1u, 0x00u)) \
  X(srliw,      "srliw",      SHIFTW, BASILISK_M_R(0x1bu, 5u, 0x00u)) \
  X(sraiw,      "sraiw",      SHIFTW, BASILISK_M_R(0x1bu, 5u, 0x20u)) \
  X(addw,       "addw",       R,      BASILISK_M_R(0x3bu, 0u, 0x00u)) \
  X(subw,       "subw",       R,      BASILISK_M_R(0x3bu, 0u, 0x20u)) \
  X(sllw,       "sllw",       R,      BASILISK_M_R(0x3bu, 1u, 0x00u)) \
  X(srlw,       "srlw",       R,      BASILISK_M_R(0x3bu, 5u, 0x00u)) \
  X(sraw,       "sraw",       R,      BASILISK_M_R(0x3bu, 5u, 0x20u)) \
  X(mul,        "mul",        R,      BASILISK_M_R(0x33u, 0u, 0x01u)) \
  X(mulh,       "mulh",       R,      BASILISK_M_R(0x33u, 1u, 0x01u)) \
  X(mulhsu,     "mulhsu",     R,      BASILISK_M_R(0x33u, 2u, 0x01u)) \
  X(mulhu,      "mulhu",      R,      BASILISK_M_R(0x33u, 3u, 0x01u)) \
  X(div,        "div",        R,      BASILISK_M_R(0x33u, 4u, 0x01u)) \
  X(divu,       "divu",       R,      BASILISK_M_R(0x33u, 5u, 0x01u)) \
  X(rem,        "rem",        R,      BASILISK_M_R(0x33u, 6u, 0x01u)) \
  X(remu,       "remu",       R,      BASILISK_M_R(0x33u, 7u, 0x01u)) \
  X(mulw,       "mulw",       R,      BASILISK_M_R(0x3bu, 0u, 0x01u)) \
  X(divw,       "divw",       R,      BASILISK_M_R(0x3bu, 4u, 0x01u)) \
  X(divuw,      "divuw",      R,      BASILISK_M_R(0x3bu, 5u, 0x01u)) \
  X(remw,       "remw",       R,      BASILISK_M_R(0x3bu, 6u, 0x01u)) \
  X(remuw,      "remuw",      R,      BASILISK_M_R(0x3bu, 7u, 0x01u)) \
  X(lr_w,       "lr.w",       LR,     BASILISK_M_LR(2u)) \
  X(sc_w,       "sc.w",       AMO,    BASILISK_M_AMO(2u, 0x03u)) \
  X(amoswap_w,  "amoswap.w",  AMO,    BASILISK_M_AMO(2u, 0x01u)) \
  X(amoadd_w,   "amoadd.w",   AMO,    BASILISK_M_AMO(2u, 0x00u)) \
  X(amoxor_w,   "amoxor.w",   AMO,    BASILISK_M_AMO(2u, 0x04u)) \
  X(amoand_w,   "amoand.w",   AMO,    BASILISK_M_AMO(2u, 0x0cu)) \
  X(amoor_w,    "amoor.w",    AMO,    BASILISK_M_AMO(2u, 0x08u)) \
  X(amomin_w,   "amomin.w",   AMO,    BASILISK_M_AMO(2u, 0x10u)) \
  X(amomax_w,   "amomax.w",   AMO,    BASILISK_M_AMO(2u, 0x14u)) \
  X(amominu_w,  "amominu.w",  AMO,    BASILISK_M_AMO(2u, 0x18u)) \
  X(amomaxu_w,  "amomaxu.w",  AMO,    BASILISK_M_AMO(2u, 0x1cu)) \
  X(lr_d,       "lr.d",       LR,     BASILISK_M_LR(3u)) \
  X(sc_d,       "sc.d",       AMO,    BASILISK_M_AMO(3u, 0x03u)) \
  X(amoswap_d,  "amoswap.d",  AMO,    BASILISK_M_AMO(3u, 0x01u)) \
  X(amoadd_d,   "amoadd.d",   AMO,    BASILISK_M_AMO(3u, 0x00u)) \
  X(amoxor_d,   "amoxor.d",   AMO,    BASILISK_M_AMO(3u, 0x04u)) \
  X(amoand_d,   "amoand.d",   AMO,    BASILISK_M_AMO(3u, 0x0cu)) \
  X(amoor_d,    "amoor.d",    AMO,    BASILISK_M_AMO(3u, 0x08u)) \
  X(amomin_d,   "amomin.d",   AMO,    BASILISK_M_AMO(3u, 0x10u)) \
  X(amomax_d,   "amomax.d",   AMO,    BASILISK_M_AMO(3u, 0x14u)) \
  X(amominu_d,  "amominu.d",  AMO,    BASILISK_M_AMO(3u, 0x18u)) \
  X(amomaxu_d,  "amomaxu.d",  AMO,    BASILISK_M_AMO(3u, 0x1cu)) \
  X(csrrw,      "csrrw",      CSR,    BASILISK_M_I(0x73u, 1u)) \
  X(csrrs,      "csrrs",      CSR,    BASILISK_M_I(0x73u, 2u)) \
  X(csrrc,      "csrrc",      CSR,    BASILISK_M_I(0x73u, 3u)) \
  X(csrrwi,     "csrrwi",     CSRI,   BASILISK_M_I(0x73u, 5u)) \
  X(csrrsi,     "csrrsi",     CSRI,   BASILISK_M_I(0x73u, 6u)) \
  X(csrrci,     "csrrci",     CSRI,   BASILISK_M_I(0x73u, 7u)) \
  X(mret,       "mret",       NONE,   BASILISK_M_EXACT(0x30200073u)) \
  X(sret,       "sret",       NONE,   BASILISK_M_EXACT(0x10200073u)) \
  X(wfi,        "wfi",        NONE,   BASILISK_M_EXACT(0x10500073u)) \
  X(sfence_vma, "sfence.vma", SFENCE, 0x12000073u, 0xfe007fffu) \
  X(flw,        "flw",        FLOAD,  BASILISK_M_I(0x07u, 2u)) \
  X(fsw,        "fsw",        FSTORE, BASILISK_M_I(0x27u, 2u)) \
  X(fmadd_s,    "fmadd.s",    R4,     BASILISK_M_R4(0x43u, 0u)) \
  X(fmsub_s,    "fmsub.s",    R4,     BASILISK_M_R4(0x47u, 0u)) \
  X(fnmsub_s,   "fnmsub.s",   R4,     BASILISK_M_R4(0x4bu, 0u)) \
  X(fnmadd_s,   "fnmadd.s",   R4,     BASILISK_M_R4(0x4fu, 0u)) \
  X(fadd_s,     "fadd.s",     FR_RM,  BASILISK_M_FR(0x00u)) \
  X(fsub_s,     "fsub.s",     FR_RM,  BASILISK_M_FR(0x04u)) \
  X(fmul_s,     "fmul.s",     FR_RM,  BASILISK_M_FR(0x08u)) \
  X(fdiv_s,     "fdiv.s",     FR_RM,  BASILISK_M_FR(0x0cu)) \
  X(fsqrt_s,    "fsqrt.s",    FR1_RM, BASILISK_M_FU(0x2cu, 0u)) \
  X(fsgnj_s,    "fsgnj.s",    FR,     BASILISK_M_FR3(0x10u, 0u)) \
  X(fsgnjn_s,   "fsgnjn.s",   FR,     BASILISK_M_FR3(0x10u, 1u)) \
  X(fsgnjx_s,   "fsgnjx.s",   FR,     BASILISK_M_FR3(0x10u, 2u)) \
  X(fmin_s,     "fmin.s",     FR,     BASILISK_M_FR3(0x14u, 0u)) \
  X(fmax_s,     "fmax.s",     FR,     BASILISK_M_FR3(0x14u, 1u)) \
  X(fcvt_w_s,   "fcvt.w.s",   F2X_RM, BASILISK_M_FU(0x60u, 0u)) \
  X(fcvt_wu_s,  "fcvt.wu.s",  F2X_RM, BASILISK_M_FU(0x60u, 1u)) \
  X(fcvt_l_s,   "fcvt.l.s",   F2X_RM, BASILISK_M_FU(0x60u, 2u)) \
  X(fcvt_lu_s,  "fcvt.lu.s",  F2X_RM, BASILISK_M_FU(0x60u, 3u)) \
  X(fmv_x_w,    "fmv.x.w",    F2X,    BASILISK_M_FU3(0x70u, 0u, 0u)) \
  X(fclass_s,   "fclass.s",   F2X,    BASILISK_M_FU3(0x70u, 0u, 1u)) \
  X(feq_s,      "feq.s",      FCMP,   BASILISK_M_FR3(0x50u, 2u)) \
  X(flt_s,      "flt.s",      FCMP,   BASILISK_M_FR3(0x50u, 1u)) \
  X(fle_s,      "fle.s",      FCMP,   BASILISK_M_FR3(0x50u, 0u)) \
  X(fcvt_s_w,   "fcvt.s.w",   X2F_RM, BASILISK_M_FU(0x68u, 0u)) \
  X(fcvt_s_wu,  "fcvt.s.wu",  X2F_RM, BASILISK_M_FU(0x68u, 1u)) \
  X(fcvt_s_l,   "fcvt.s.l",   X2F_RM, BASILISK_M_FU(0x68u, 2u)) \
  X(fcvt_s_lu,  "fcvt.s.lu",  X2F_RM, BASILISK_M_FU(0x68u, 3u)) \
  X(fmv_w_x,    "fmv.w.x",    X2F,    BASILISK_M_FU3(0x78u, 0u, 0u)) \
  X(fld,        "fld",        FLOAD,  BASILISK_M_I(0x07u, 3u)) \
  X(fsd,        "fsd",        FSTORE, BASILISK_M_I(0x27u, 3u)) \
  X(fmadd_d,    "fmadd.d",    R4,     BASILISK_M_R4(0x43u, 1u)) \
  X(fmsub_d,    "fmsub.d",    R4,     BASILISK_M_R4(0x47u, 1u)) \
  X(fnmsub_d,   "fnmsub.d",   R4,     BASILISK_M_R4(0x4bu, 1u)) \
  X(fnmadd_d,   "fnmadd.d",   R4,     BASILISK_M_R4(0x4fu, 1u)) \
  X(fadd_d,     "fadd.d",     FR_RM,  BASILISK_M_FR(0x01u)) \
  X(fsub_d,     "fsub.d",     FR_RM,  BASILISK_M_FR(0x05u)) \
  X(fmul_d,     "fmul.d",     FR_RM,  BASILISK_M_FR(0x09u)) \
  X(fdiv_d,     "fdiv.d",     FR_RM,  BASILISK_M_FR(0x0du)) \
  X(fsqrt_d,    "fsqrt.d",    FR1_RM, BASILISK_M_FU(0x2du, 0u)) \
  X(fsgnj_d,    "fsgnj.d",    FR,     BASILISK_M_FR3(0x11u, 0u)) \
  X(fsgnjn_d,   "fsgnjn.d",   FR,     BASILISK_M_FR3(0x11u, 1u)) \
  X(fsgnjx_d,   "fsgnjx.d",   FR,     BASILISK_M_FR3(0x11u, 2u)) \
  X(fmin_d,     "fmin.d",     FR,     BASILISK_M_FR3(0x15u, 0u)) \
  X(fmax_d,     "fmax.d",     FR,     BASILISK_M_FR3(0x15u, 1u)) \
  X(fcvt_s_d,   "fcvt.s.d",   FR1_RM, BASILISK_M_FU(0x20u, 1u)) \
  X(fcvt_d_s,   "fcvt.d.s",   FR1_RM, BASILISK_M_FU(0x21u, 0u)) \
  X(feq_d,      "feq.d",      FCMP,   BASILISK_M_FR3(0x51u, 2u)) \
  X(flt_d,      "flt.d",      FCMP,   BASILISK_M_FR3(0x51u, 1u)) \
  X(fle_d,      "fle.d",      FCMP,   BASILISK_M_FR3(0x51u, 0u)) \
  X(fclass_d,   "fclass.d",   F2X,    BASILISK_M_FU3(0x71u, 0u, 1u)) \
  X(fcvt_w_d,   "fcvt.w.d",   F2X_RM, BASILISK_M_FU(0x61u, 0u)) \
  X(fcvt_wu_d,  "fcvt.wu.d",  F2X_RM, BASILISK_M_FU(0x61u, 1u)) \
  X(fcvt_l_d,   "fcvt.l.d",   F2X_RM, BASILISK_M_FU(0x61u, 2u)) \
  X(fcvt_lu_d,  "fcvt.lu.d",  F2X_RM, BASILISK_M_FU(0x61u, 3u)) \
  X(fmv_x_d,    "fmv.x.d",    F2X,    BASILISK_M_FU3(0x71u, 0u, 0u)) \
  X(fcvt_d_w,   "fcvt.d.w",   X2F_RM, BASILISK_M_FU(0x69u, 0u)) \
  X(fcvt_d_wu,  "fcvt.d.wu",  X2F_RM, BASILISK_M_FU(0x69u, 1u)) \
  X(fcvt_d_l,   "fcvt.d.l",   X2F_RM, BASILISK_M_FU(0x69u, 2u)) \
  X(fcvt_d_lu,  "fcvt.d.lu",  X2F_RM, BASILISK_M_FU(0x69u, 3u)) \
  X(fmv_d_x,    "fmv.d.x",    X2F,    BASILISK_M_FU3(0x79u, 0u, 0u))
// clang-format on

enum class Op : std::uint16_t {
#define BASILISK_X(name, str, fmt, ...) name,
  BASILISK_RV64_OPS(BASILISK_X)
#undef BASILISK_X
  illegal,
};

inline constexpr std::size_t kOpCount = static_cast<std::size_t>(Op::illegal);

struct OpInfo {
  Op op;
  const char* mnemonic;
  Fmt fmt;
  std::uint32_t match;
  std::uint32_t mask;
};

const OpInfo& op_info(Op op);
std::span<const OpInfo> all_ops();
std::optional<Op> find_op(std::string_view mnemonic);

/// Compressed (RVC) forms. Each decodes to the `Op` of its 32-bit expansion.
enum class COp : std::uint8_t {
  none,
  c_addi4spn, c_fld, c_lw, c_ld, c_fsd, c_sw, c_sd,
  c_nop, c_addi, c_addiw, c_li, c_addi16sp, c_lui, c_srli, c_srai, c_andi,
  c_sub, c_xor, c_or, c_and, c_subw, c_addw, c_j, c_beqz, c_bnez,
  c_slli, c_fldsp, c_lwsp, c_ldsp, c_jr, c_mv, c_ebreak, c_jalr, c_add,
  c_fsdsp, c_swsp, c_sdsp,
};

inline constexpr std::size_t kCOpCount = static_cast<std::size_t>(COp::c_sdsp);

const char* cop_mnemonic(COp c);
std::optional<COp> find_cop(std::string_view mnemonic);

inline constexpr std::uint8_t kRmDyn = 7;

/// A decoded instruction. `imm` is sign-extended; CSR instructions keep the
/// CSR number in `imm` and the 5-bit immediate in `rs1`; fences keep
/// fm/pred/succ in `imm`; AMOs keep aq/rl in `rm`.
struct Instruction {
  std::uint32_t raw = 0;
  Op op = Op::illegal;
  COp cop = COp::none;
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  std::uint8_t rs3 = 0;
  std::uint8_t rm = 0;
  std::uint8_t size = 4;
  std::int64_t imm = 0;

  bool legal() const { return op != Op::illegal; }
  bool compressed() const { return size == 2; }
  /// Same operation and operands, ignoring encoding width.
  bool same_semantics(const Instruction& o) const {
    return op == o.op && rd == o.rd && rs1 == o.rs1 && rs2 == o.rs2 && rs3 == o.rs3 &&
           rm == o.rm && imm == o.imm;
  }
  bool operator==(const Instruction&) const = default;
};

/// Decodes a 32-bit word or, when the low two bits are not 0b11, the low
/// 16-bit parcel. Unknown encodings return op == Op::illegal.
Instruction decode(std::uint32_t raw);
Instruction decode32(std::uint32_t raw);
Instruction decode16(std::uint16_t raw);

inline constexpr bool is_compressed_parcel(std::uint16_t parcel) { return (parcel & 3u) != 3u; }

/// Inverse of decode for legal instructions. For compressed forms returns the
/// 16-bit encoding in the low half. Throws std::invalid_argument when the
/// operands do not fit the encoding.
std::uint32_t encode(const Instruction& insn);

/// Whether the op uses a rounding-mode field.
bool uses_rm(Fmt fmt);
/// Register file of each operand slot.
bool rd_is_fp(Fmt fmt, Op op);
bool rs1_is_fp(Fmt fmt, Op op);
bool rs2_is_fp(Fmt fmt, Op op);

const char* xreg_name(unsigned r);
const char* freg_name(unsigned r);
std::optional<unsigned> parse_xreg(std::string_view s);
std::optional<unsigned> parse_freg(std::string_view s);
const char* rm_name(unsigned rm);
std::optional<unsigned> parse_rm(std::string_view s);
const char* csr_name(unsigned csr);
std::optional<unsigned> parse_csr(std::string_view s);

/// Canonical assembly text. Branch and jump targets are printed as absolute
/// addresses computed from `pc`.
std::string format_instruction(const Instruction& insn, std::uint64_t pc);

}  // namespace basilisk::rv64
