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

#include <gtest/gtest.h>

#include <elf.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "basilisk/loader.hpp"
#include "basilisk/mini_asm.hpp"
#include "basilisk/system.hpp"

namespace basilisk {
namespace {

struct Seg {
  Addr vaddr;
  std::vector<std::uint8_t> data;
  std::uint64_t memsz;
};

// Minimal ET_EXEC image: header, program headers, then segment bytes.
std::vector<std::uint8_t> make_elf(Addr entry, const std::vector<Seg>& segs) {
  Elf64_Ehdr eh{};
  std::memcpy(eh.e_ident, ELFMAG, SELFMAG);
  eh.e_ident[EI_CLASS] = ELFCLASS64;
  eh.e_ident[EI_DATA] = ELFDATA2LSB;
  eh.e_ident[EI_VERSION] = EV_CURRENT;
  eh.e_type = ET_EXEC;
  eh.e_machine = EM_RISCV;
  eh.e_version = EV_CURRENT;
  eh.e_entry = entry;
  eh.e_phoff = sizeof eh;
  eh.e_ehsize = sizeof eh;
  eh.e_phentsize = sizeof(Elf64_Phdr);
  eh.e_phnum = static_cast<Elf64_Half>(segs.size() + 1);
  std::vector<std::uint8_t> out(sizeof eh + (segs.size() + 1) * sizeof(Elf64_Phdr));
  std::memcpy(out.data(), &eh, sizeof eh);
  // A non-load header first; the loader must skip it.
  Elf64_Phdr note{};
  note.p_type = PT_NOTE;
  std::memcpy(out.data() + sizeof eh, &note, sizeof note);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    Elf64_Phdr ph{};
    ph.p_type = PT_LOAD;
    ph.p_offset = out.size();
    ph.p_vaddr = ph.p_paddr = segs[i].vaddr;
    ph.p_filesz = segs[i].data.size();
    ph.p_memsz = segs[i].memsz;
    std::memcpy(out.data() + sizeof eh + (i + 1) * sizeof ph, &ph, sizeof ph);
    out.insert(out.end(), segs[i].data.begin(), segs[i].data.end());
  }
  return out;
}

std::string load_error(std::vector<std::uint8_t> file) {
  try {
    parse_elf(file);
  } catch (const LoadError& e) {
    return e.what();
  }
  return "";
}

TEST(Elf, ParsesLoadSegmentsAndZeroFill) {
  const auto file = make_elf(0x8000'0004, {{0x8000'0000, {1, 2, 3}, 8}, {0x7000'0000, {9}, 1}});
  const ElfImage img = parse_elf(file);
  EXPECT_EQ(img.entry, 0x8000'0004u);
  ASSERT_EQ(img.segments.size(), 2u);
  EXPECT_EQ(img.segments[0].bytes, (std::vector<std::uint8_t>{1, 2, 3, 0, 0, 0, 0, 0}));
  EXPECT_EQ(img.segments[1].addr, 0x7000'0000u);
}

TEST(Elf, RejectionsNameTheField) {
  const auto good = make_elf(0x8000'0000, {{0x8000'0000, {1}, 1}});
  EXPECT_NE(load_error({good.begin(), good.begin() + 3}).find("e_ident"), std::string::npos);
  auto f = good;
  f[EI_CLASS] = ELFCLASS32;
  EXPECT_NE(load_error(f).find("EI_CLASS"), std::string::npos);
  f = good;
  f[EI_DATA] = ELFDATA2MSB;
  EXPECT_NE(load_error(f).find("EI_DATA"), std::string::npos);
  f = good;
  f[offsetof(Elf64_Ehdr, e_machine)] = EM_X86_64;
  EXPECT_NE(load_error(f).find("e_machine"), std::string::npos);
  f = good;
  f[offsetof(Elf64_Ehdr, e_type)] = ET_DYN;
  EXPECT_NE(load_error(f).find("e_type"), std::string::npos);
  f = good;
  f.resize(f.size() - 1);
  EXPECT_NE(load_error(f).find("p_offset"), std::string::npos);
  EXPECT_NE(load_error(make_elf(0, {})).find("no loadable"), std::string::npos);
  EXPECT_NE(load_error(make_elf(0, {{0x8000'0000, {1, 2}, 1}})).find("p_filesz"), std::string::npos);
}

TEST(Elf, LoadsIntoSystemAndRuns) {
  // Exits with code 21 through the sim-exit device.
  const auto prog = masm::assemble("li t0, 0x0300f000\nli t1, 43\nsw t1, 0(t0)\nhalt: j halt\n", 0x8000'0000);
  System sys{SimConfig{}};
  const Addr entry = load_elf(sys, parse_elf(make_elf(0x8000'0000, {{0x8000'0000, prog.image, prog.image.size()}})));
  sys.reset_core(entry);
  const RunResult r = sys.run(100'000);
  EXPECT_EQ(r.reason, StopReason::exit);
  EXPECT_EQ(r.exit_code, 21);
}

TEST(Elf, SegmentOutsideMemoryIsLoadError) {
  System sys{SimConfig{}};
  const auto img = parse_elf(make_elf(0, {{0x0300'2000, {1, 2, 3, 4}, 4}}));
  EXPECT_THROW(load_elf(sys, img), LoadError);
  EXPECT_THROW(load_elf(sys, "/nonexistent/image.elf"), LoadError);
}

TEST(RawImage, LoadsAtBase) {
  const auto path = std::filesystem::temp_directory_path() / "basilisk_raw_test.bin";
  std::ofstream(path, std::ios::binary) << "abcd";
  System sys{SimConfig{}};
  EXPECT_EQ(load_raw(sys, path.string(), 0x8000'1000), 0x8000'1000u);
  std::uint8_t buf[4] = {};
  ASSERT_EQ(sys.debug_read(0x8000'1000, buf), Resp::okay);
  EXPECT_EQ(std::memcmp(buf, "abcd", 4), 0);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace basilisk
