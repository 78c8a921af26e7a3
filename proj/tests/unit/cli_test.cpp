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
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome sim(const std::string& args) {
  const std::string cmd = std::string(BASILISK_SIM) + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return o;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) o.out.append(buf, n);
  const int status = ::pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("basilisk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const char* name) const { return (dir_ / name).string(); }
  std::string write(const char* name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }
  // Assembles `src` and returns the raw image path.
  std::string image(const std::string& src) const {
    const std::string in = write("prog.s", src);
    EXPECT_EQ(sim("asm " + in + " -o " + path("prog.bin")).code, 0);
    return path("prog.bin");
  }
  fs::path dir_;
};

const std::string kHello = std::string(BASILISK_PROGRAMS_DIR) + "/hello.s";

TEST_F(Cli, RunsHelloAndReportsCounters) {
  ASSERT_EQ(sim("asm " + kHello + " -o " + path("hello.bin")).code, 0);
  EXPECT_TRUE(fs::exists(path("hello.sym")));
  const Outcome o = sim("run --uart stdio " + path("hello.bin") + " </dev/null");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("Hello from Basilisk"), std::string::npos);
  EXPECT_NE(o.out.find("stop.reason        = exit"), std::string::npos);
  EXPECT_NE(o.out.find("perf.cycles"), std::string::npos);
}

TEST_F(Cli, ExitCodeComesFromProgram) {
  const auto img = image("li t0, 0x0300f000\nli t1, 7\nsw t1, 0(t0)\nh: j h\n");
  EXPECT_EQ(sim("run --quiet --uart none " + img).code, 3);
}

TEST_F(Cli, MissingImageIsLoadError) {
  EXPECT_EQ(sim("run --uart none " + path("absent.bin")).code, 64);
}

TEST_F(Cli, RawImageOutsideMemoryIsLoadError) {
  const auto img = image("nop\n");
  EXPECT_EQ(sim("run --uart none --bin --base 0x03002000 " + img).code, 64);
}

TEST_F(Cli, UnknownKeyIsConfigError) {
  const auto img = image("nop\n");
  EXPECT_EQ(sim("run --uart none --set bogus.key=1 " + img).code, 65);
  EXPECT_EQ(sim("run --uart none --preset turbo " + img).code, 65);
  EXPECT_EQ(sim("config --config " + write("bad.cfg", "sim.quantum = 0\n")).code, 65);
}

TEST_F(Cli, UnreachablePeerIsLinkError) {
  const auto img = image("nop\n");
  // Port 1 on loopback is closed in any sane sandbox.
  EXPECT_EQ(sim("run --uart none --c2c connect:127.0.0.1:1 " + img).code, 66);
}

TEST_F(Cli, UnhandledTrapCycleLimitAndIdle) {
  EXPECT_EQ(sim("run --quiet --uart none " + image("li t0, 0x50000000\nld t1, 0(t0)\n")).code, 67);
  EXPECT_EQ(sim("run --quiet --uart none --max-cycles 1000 " + image("l: j l\n")).code, 68);
  EXPECT_EQ(sim("run --quiet --uart none " + image("wfi\n")).code, 69);
}

TEST_F(Cli, EbreakIsBreakpoint) {
  EXPECT_EQ(sim("run --quiet --uart none " + image("nop\nebreak\n")).code, 70);
}

TEST_F(Cli, ConfigRoundTripsThroughFile) {
  const Outcome a = sim("config --set sim.quantum=333 --set clock.preset=peak");
  ASSERT_EQ(a.code, 0);
  const std::string cfg = write("eff.cfg", a.out);
  const Outcome b = sim("config --config " + cfg);
  EXPECT_EQ(b.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(b.out.find("sim.quantum = 333"), std::string::npos);
  EXPECT_NE(b.out.find("clock.freq_hz = 102000000"), std::string::npos);
}

TEST_F(Cli, AsmDisasmRoundTrip) {
  const auto img = image("addi a0, a0, 1\nc.addi a1, 3\nfmadd.d f1, f2, f3, f4\n");
  const Outcome d = sim("disasm " + img);
  ASSERT_EQ(d.code, 0);
  const std::string again = write("again.s", d.out);
  ASSERT_EQ(sim("asm " + again + " -o " + path("again.bin")).code, 0);
  std::ifstream x(img, std::ios::binary), y(path("again.bin"), std::ios::binary);
  const std::string bx((std::istreambuf_iterator<char>(x)), {}), by((std::istreambuf_iterator<char>(y)), {});
  EXPECT_EQ(bx, by);
}

TEST_F(Cli, AssemblyErrorIsUsageFailure) {
  EXPECT_EQ(sim("asm " + write("bad.s", "frobnicate x1\n") + " -o " + path("x.bin")).code, 1);
}

TEST_F(Cli, PeekShowsPokedBytesAndDumpWritesFile) {
  const auto img = image("nop\n");
  const Outcome o = sim("peek --uart none --halt --poke 0x80001000:deadbeef --addr 0x80001000 --len 4 " + img);
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("0000000080001000: de ad be ef"), std::string::npos) << o.out;
  const auto prog = image("li t0, 0x80002000\nli t1, 0x55\nsb t1, 0(t0)\nli t0, 0x0300f000\nli t1, 1\nsw t1, 0(t0)\nh: j h\n");
  ASSERT_EQ(sim("run --quiet --uart none --dump 0x80002000:1:" + path("d.bin") + " " + prog).code, 0);
  std::ifstream d(path("d.bin"), std::ios::binary);
  EXPECT_EQ(d.get(), 0x55);
}

}  // namespace
