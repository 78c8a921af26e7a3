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
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "basilisk/rv64/isa.hpp"
#include "basilisk/types.hpp"

namespace basilisk::masm {

/// Assembly failure; `line` is 1-based (0 when not tied to a line).
class AsmError : public std::runtime_error {
 public:
  AsmError(int line, const std::string& msg);
  int line() const { return line_; }

 private:
  int line_;
};

struct AsmResult {
  std::vector<std::uint8_t> image;
  std::map<std::string, Addr> symbols;
  Addr base = 0;
  /// First byte of the data section (== base + text size rounded up).
  Addr data_base = 0;
};

/// Two-pass assembler. The text section is placed at `base`, the data section
/// after it on a 16-byte boundary.
AsmResult assemble(std::string_view source, Addr base);

/// Expansion of `li` for a 64-bit constant: at most eight instructions.
std::vector<rv64::Instruction> materialize(unsigned rd, std::int64_t value);

struct DisasmOptions {
  /// Append `# 0x<addr>` to every line.
  bool addresses = false;
};

/// One line per instruction; undecodable parcels become .half/.word/.byte.
std::string disassemble(std::span<const std::uint8_t> bytes, Addr base, DisasmOptions opts = {});

/// `name hexaddr` lines, sorted by name.
std::string symbol_file(const std::map<std::string, Addr>& symbols);
std::map<std::string, Addr> parse_symbol_file(std::string_view text);

}  // namespace basilisk::masm
