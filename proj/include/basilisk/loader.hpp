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
#include <span>
#include <string>
#include <vector>

#include "basilisk/types.hpp"

namespace basilisk {

class System;

struct Segment {
  Addr addr = 0;
  std::vector<std::uint8_t> bytes;  // file bytes followed by zero fill up to memsz
};

struct ElfImage {
  Addr entry = 0;
  std::vector<Segment> segments;
};

/// Parses an ELF64 little-endian RISC-V executable. Throws LoadError naming
/// the offending header field.
ElfImage parse_elf(std::span<const std::uint8_t> file);

std::vector<std::uint8_t> read_file(const std::string& path);

/// Copies every PT_LOAD segment into memory through the debug backdoor and
/// returns the entry point. Throws LoadError when a segment is not backed by
/// memory.
Addr load_elf(System& sys, const ElfImage& image);
Addr load_elf(System& sys, const std::string& path);

/// Raw image at `base`; returns `base`.
Addr load_raw(System& sys, const std::string& path, Addr base);

}  // namespace basilisk
