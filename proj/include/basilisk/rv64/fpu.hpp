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

namespace basilisk::rv64::fpu {

enum Rm : std::uint8_t { rne = 0, rtz = 1, rdn = 2, rup = 3, rmm = 4 };

enum Flag : std::uint8_t { NX = 1, UF = 2, OF = 4, DZ = 8, NV = 16 };

inline constexpr std::uint32_t kCanonicalNanS = 0x7fc00000u;
inline constexpr std::uint64_t kCanonicalNanD = 0x7ff8000000000000ull;

struct Result {
  std::uint64_t bits = 0;
  std::uint8_t flags = 0;
};

/// Binary64 arithmetic on raw bit patterns. NaN results are canonical.
Result add_d(std::uint64_t a, std::uint64_t b, Rm rm);
Result sub_d(std::uint64_t a, std::uint64_t b, Rm rm);
Result mul_d(std::uint64_t a, std::uint64_t b, Rm rm);
Result div_d(std::uint64_t a, std::uint64_t b, Rm rm);
Result sqrt_d(std::uint64_t a, Rm rm);
/// (neg_prod ? -(a*b) : a*b) + (neg_add ? -c : c), rounded once.
Result fma_d(std::uint64_t a, std::uint64_t b, std::uint64_t c, bool neg_prod, bool neg_add,
             Rm rm);

/// Binary32 variants; operands and result in the low 32 bits.
Result add_s(std::uint32_t a, std::uint32_t b, Rm rm);
Result sub_s(std::uint32_t a, std::uint32_t b, Rm rm);
Result mul_s(std::uint32_t a, std::uint32_t b, Rm rm);
Result div_s(std::uint32_t a, std::uint32_t b, Rm rm);
Result sqrt_s(std::uint32_t a, Rm rm);
Result fma_s(std::uint32_t a, std::uint32_t b, std::uint32_t c, bool neg_prod, bool neg_add,
             Rm rm);

Result min_d(std::uint64_t a, std::uint64_t b);
Result max_d(std::uint64_t a, std::uint64_t b);
Result min_s(std::uint32_t a, std::uint32_t b);
Result max_s(std::uint32_t a, std::uint32_t b);

/// Comparisons return 0/1 in `bits`. eq signals only on signaling NaNs,
/// lt/le on any NaN.
Result eq_d(std::uint64_t a, std::uint64_t b);
Result lt_d(std::uint64_t a, std::uint64_t b);
Result le_d(std::uint64_t a, std::uint64_t b);
Result eq_s(std::uint32_t a, std::uint32_t b);
Result lt_s(std::uint32_t a, std::uint32_t b);
Result le_s(std::uint32_t a, std::uint32_t b);

std::uint64_t classify_d(std::uint64_t a);
std::uint64_t classify_s(std::uint32_t a);

Result cvt_s_d(std::uint64_t a, Rm rm);
Result cvt_d_s(std::uint32_t a);

/// Float to integer with saturation. `bits` is the sign-extended 64-bit
/// register value (32-bit results are sign-extended as RV64 requires).
Result d_to_int(std::uint64_t a, bool is_signed, unsigned width, Rm rm);
Result s_to_int(std::uint32_t a, bool is_signed, unsigned width, Rm rm);
/// Integer (the low `width` bits of `v`) to float.
Result int_to_d(std::uint64_t v, bool is_signed, unsigned width, Rm rm);
Result int_to_s(std::uint64_t v, bool is_signed, unsigned width, Rm rm);

bool is_snan_d(std::uint64_t a);
bool is_snan_s(std::uint32_t a);

}  // namespace basilisk::rv64::fpu
