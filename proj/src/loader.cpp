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

#include "basilisk/loader.hpp"

#include <elf.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "basilisk/system.hpp"

namespace basilisk {

ElfImage parse_elf(std::span<const std::uint8_t> file) {
  Elf64_Ehdr eh;
  if (file.size() < EI_NIDENT || std::memcmp(file.data(), ELFMAG, SELFMAG) != 0) {
    throw LoadError("e_ident: not an ELF file");
  }
  if (file[EI_CLASS] != ELFCLASS64) throw LoadError("e_ident[EI_CLASS]: not ELF64");
  if (file[EI_DATA] != ELFDATA2LSB) throw LoadError("e_ident[EI_DATA]: not little-endian");
  if (file.size() < sizeof eh) throw LoadError("e_ehsize: truncated header");
  std::memcpy(&eh, file.data(), sizeof eh);
  if (eh.e_machine != EM_RISCV) {
    throw LoadError(fmt::format("e_machine: {} is not RISC-V ({})", eh.e_machine, EM_RISCV));
  }
  if (eh.e_type != ET_EXEC) throw LoadError(fmt::format("e_type: {} is not ET_EXEC", eh.e_type));
  if (eh.e_phentsize != sizeof(Elf64_Phdr)) throw LoadError("e_phentsize: unexpected size");
  if (eh.e_phoff > file.size() ||
      std::uint64_t{eh.e_phnum} * sizeof(Elf64_Phdr) > file.size() - eh.e_phoff) {
    throw LoadError("e_phoff: program headers outside the file");
  }

  ElfImage img;
  img.entry = eh.e_entry;
  for (unsigned i = 0; i < eh.e_phnum; ++i) {
    Elf64_Phdr ph;
    std::memcpy(&ph, file.data() + eh.e_phoff + i * sizeof ph, sizeof ph);
    if (ph.p_type != PT_LOAD || ph.p_memsz == 0) continue;
    if (ph.p_filesz > ph.p_memsz) throw LoadError(fmt::format("p_filesz: segment {} exceeds p_memsz", i));
    if (ph.p_offset > file.size() || ph.p_filesz > file.size() - ph.p_offset) {
      throw LoadError(fmt::format("p_offset: segment {} outside the file", i));
    }
    Segment s;
    s.addr = ph.p_paddr;
    s.bytes.assign(file.begin() + static_cast<std::ptrdiff_t>(ph.p_offset),
                   file.begin() + static_cast<std::ptrdiff_t>(ph.p_offset + ph.p_filesz));
    s.bytes.resize(ph.p_memsz, 0);
    img.segments.push_back(std::move(s));
  }
  if (img.segments.empty()) throw LoadError("e_phnum: no loadable segments");
  return img;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(fmt::format("cannot open '{}'", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Addr load_elf(System& sys, const ElfImage& image) {
  for (const Segment& s : image.segments) {
    if (!sys.is_memory(s.addr, s.bytes.size())) {
      throw LoadError(fmt::format("segment 0x{:x}+0x{:x} does not fit a memory region", s.addr,
                                  s.bytes.size()));
    }
  }
  for (const Segment& s : image.segments) sys.load(s.addr, s.bytes);
  return image.entry;
}

Addr load_elf(System& sys, const std::string& path) {
  const auto bytes = read_file(path);
  return load_elf(sys, parse_elf(bytes));
}

Addr load_raw(System& sys, const std::string& path, Addr base) {
  sys.load(base, read_file(path));
  return base;
}

}  // namespace basilisk
