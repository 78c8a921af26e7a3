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

// basilisk-sim: command-line front end.
//
// Exit codes: the program's sim-exit code on a clean exit; 64 load error,
// 65 config error, 66 link error, 67 unhandled trap, 68 cycle limit,
// 69 idle (nothing left to wake the hart), 70 breakpoint, 1 usage or
// assembly error.

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "basilisk/config.hpp"
#include "basilisk/loader.hpp"
#include "basilisk/mini_asm.hpp"
#include "basilisk/system.hpp"

namespace {

using namespace basilisk;

constexpr int kExitLoad = 64;
constexpr int kExitConfig = 65;
constexpr int kExitLink = 66;

int exit_code_for(const RunResult& r) {
  switch (r.reason) {
    case StopReason::exit: return r.exit_code;
    case StopReason::trap: return 67;
    case StopReason::max_cycles: return 68;
    case StopReason::idle: return 69;
    case StopReason::breakpoint: return 70;
  }
  return 1;
}

std::uint64_t parse_number(const std::string& s) {
  std::size_t used = 0;
  const std::uint64_t v = std::stoull(s, &used, 0);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

std::vector<std::uint8_t> parse_hex_bytes(const std::string& s) {
  if (s.size() % 2 != 0) throw ConfigError(fmt::format("odd number of hex digits in '{}'", s));
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < s.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoul(s.substr(i, 2), nullptr, 16)));
  }
  return out;
}

struct ImageOptions {
  std::string image;
  bool elf = false;
  bool bin = false;
  std::string base = "0x80000000";
  std::string config_file;
  std::vector<std::string> sets;
  std::string preset;
  bool l1_writethrough = false;
  std::string trace;
  std::string trace_file;
  std::string uart;
  std::string c2c;
  std::string dump_frames;
  std::string pc;
};

void add_image_options(CLI::App* app, ImageOptions& o) {
  app->add_option("image", o.image, "Program image (ELF64 or raw binary)")->required();
  app->add_flag("--elf", o.elf, "Treat the image as ELF64 (default when the file has an ELF header)");
  app->add_flag("--bin", o.bin, "Treat the image as a raw binary loaded at --base");
  app->add_option("--base", o.base, "Load address of a raw image");
  app->add_option("--config", o.config_file, "Configuration file (section.key = value)");
  app->add_option("--set", o.sets, "Override one key: section.key=value")->take_all();
  app->add_option("--preset", o.preset, "Operating point: efficient, nominal or peak");
  app->add_flag("--l1-writethrough", o.l1_writethrough, "Make L1D write-through");
  app->add_option("--trace", o.trace, "Trace subsystems: core,llc,dram,dma,c2c,irq,uart,vga,sim,all");
  app->add_option("--trace-file", o.trace_file, "Trace destination (default stderr)");
  app->add_option("--uart", o.uart, "UART endpoint: stdio, tcp:<port> or none");
  app->add_option("--c2c", o.c2c, "C2C endpoint: listen:<port> or connect:<host>:<port>");
  app->add_option("--dump-frames", o.dump_frames, "Write every VGA frame as PPM into this directory");
  app->add_option("--pc", o.pc, "Override the entry point");
}

SimConfig build_config(const ImageOptions& o) {
  SimConfig cfg;
  if (!o.config_file.empty()) cfg = load_config_file(o.config_file);
  if (!o.preset.empty()) set_config_value(cfg, "clock.preset", o.preset);
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.l1_writethrough) cfg.l1d.write_through = true;
  if (!o.trace.empty()) cfg.trace = o.trace;
  if (!o.uart.empty()) cfg.uart_endpoint = o.uart;
  if (!o.c2c.empty()) cfg.c2c_endpoint = o.c2c;
  if (!o.dump_frames.empty()) cfg.frame_dump_dir = o.dump_frames;
  cfg.validate();
  return cfg;
}

Addr load_image(System& sys, const ImageOptions& o) {
  const auto bytes = read_file(o.image);
  const bool looks_elf = bytes.size() >= 4 && bytes[0] == 0x7f && bytes[1] == 'E' &&
                         bytes[2] == 'L' && bytes[3] == 'F';
  Addr entry = 0;
  if (o.elf || (!o.bin && looks_elf)) {
    entry = load_elf(sys, parse_elf(bytes));
  } else {
    entry = parse_number(o.base);
    sys.load(entry, bytes);
  }
  return o.pc.empty() ? entry : parse_number(o.pc);
}

// Owns the host-side endpoints for the duration of a run.
struct Session {
  SimConfig cfg;
  std::unique_ptr<System> sys;
  std::unique_ptr<UartBridge> uart;
  std::ofstream trace_out;

  explicit Session(const ImageOptions& o) : cfg(build_config(o)) {
    sys = std::make_unique<System>(cfg);
    if (!o.trace_file.empty()) {
      trace_out.open(o.trace_file);
      if (!trace_out) throw ConfigError(fmt::format("cannot open trace file '{}'", o.trace_file));
      sys->kernel().tracer().set_sink(&trace_out);
    } else {
      sys->kernel().tracer().set_sink(&std::cerr);
    }
    sys->reset_core(load_image(*sys, o));
  }

  void connect() {
    const std::string& u = cfg.uart_endpoint;
    if (u == "stdio") {
      uart = std::make_unique<StdioUartBridge>(::isatty(STDIN_FILENO) == 0);
    } else if (u.rfind("tcp:", 0) == 0) {
      auto tcp = std::make_unique<TcpUartBridge>(static_cast<std::uint16_t>(parse_number(u.substr(4))));
      std::cerr << fmt::format("uart: listening on 127.0.0.1:{}\n", tcp->port());
      uart = std::move(tcp);
    } else if (u != "none") {
      throw ConfigError(fmt::format("uart.endpoint: unknown endpoint '{}'", u));
    }
    if (uart) uart->attach(sys->kernel(), sys->uart());

    const std::string& c = cfg.c2c_endpoint;
    if (c.empty()) return;
    if (c.rfind("listen:", 0) == 0) {
      sys->c2c().attach(c2c::tcp_listen(static_cast<std::uint16_t>(parse_number(c.substr(7)))));
    } else if (c.rfind("connect:", 0) == 0) {
      const std::string rest = c.substr(8);
      const auto colon = rest.rfind(':');
      if (colon == std::string::npos) throw ConfigError("c2c.endpoint: expected connect:<host>:<port>");
      sys->c2c().attach(c2c::tcp_connect(rest.substr(0, colon),
                                         static_cast<std::uint16_t>(parse_number(rest.substr(colon + 1)))));
    } else {
      throw ConfigError(fmt::format("c2c.endpoint: unknown endpoint '{}'", c));
    }
  }
};

int cmd_run(const ImageOptions& o, std::uint64_t max_cycles, bool quiet, bool emit,
            const std::vector<std::string>& dumps) {
  Session s(o);
  if (emit) std::cout << emit_config(s.cfg) << '\n';
  s.connect();
  const RunResult r = s.sys->run(max_cycles);
  s.sys->c2c().detach();
  std::cout.flush();
  for (const std::string& d : dumps) {
    // addr:len:file
    const auto c1 = d.find(':');
    const auto c2 = d.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ConfigError(fmt::format("--dump expects addr:len:file, got '{}'", d));
    }
    std::vector<std::uint8_t> buf(parse_number(d.substr(c1 + 1, c2 - c1 - 1)));
    if (s.sys->debug_read(parse_number(d.substr(0, c1)), buf) != Resp::okay) {
      throw ConfigError(fmt::format("--dump: range '{}' is not readable", d));
    }
    std::ofstream(d.substr(c2 + 1), std::ios::binary)
        .write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!quiet) {
    std::cout << fmt::format("\nstop.reason        = {}\nstop.code          = {}\nstop.pc            = 0x{:x}\n",
                             to_string(r.reason), r.exit_code, r.pc);
    if (r.reason == StopReason::trap) {
      std::cout << fmt::format("stop.cause         = 0x{:x}\nstop.tval          = 0x{:x}\n", r.trap_cause,
                               r.trap_tval);
    }
    std::cout << report(r.counters, s.sys->kernel().clock()).to_text();
  }
  return exit_code_for(r);
}

int cmd_peek(const ImageOptions& o, std::uint64_t max_cycles, const std::string& addr,
             std::uint64_t len, const std::vector<std::string>& pokes, bool halt) {
  Session s(o);
  for (const std::string& p : pokes) {
    const auto colon = p.find(':');
    if (colon == std::string::npos) throw ConfigError(fmt::format("--poke expects addr:hexbytes, got '{}'", p));
    const auto bytes = parse_hex_bytes(p.substr(colon + 1));
    if (s.sys->debug_write(parse_number(p.substr(0, colon)), bytes) != Resp::okay) {
      std::cerr << fmt::format("poke {}: access error\n", p);
      return 1;
    }
  }
  if (halt) s.sys->halt();
  if (max_cycles > 0) {
    s.connect();
    s.sys->run(max_cycles);
    s.sys->c2c().detach();
  }
  const Addr a = parse_number(addr);
  std::vector<std::uint8_t> buf(len);
  if (s.sys->debug_read(a, buf) != Resp::okay) {
    std::cerr << fmt::format("peek 0x{:x}+{}: access error\n", a, len);
    return 1;
  }
  for (std::size_t i = 0; i < buf.size(); i += 16) {
    std::string line = fmt::format("{:016x}:", a + i);
    for (std::size_t j = i; j < std::min(buf.size(), i + 16); ++j) line += fmt::format(" {:02x}", buf[j]);
    std::cout << line << '\n';
  }
  return 0;
}

std::string sym_path(const std::string& out) {
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + ".sym";
  return out.substr(0, dot) + ".sym";
}

int cmd_asm(const std::string& in, const std::string& out, const std::string& base) {
  std::ifstream f(in);
  if (!f) {
    std::cerr << fmt::format("{}: cannot open\n", in);
    return 1;
  }
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    const masm::AsmResult r = masm::assemble(ss.str(), parse_number(base));
    std::ofstream(out, std::ios::binary)
        .write(reinterpret_cast<const char*>(r.image.data()), static_cast<std::streamsize>(r.image.size()));
    std::ofstream(sym_path(out)) << masm::symbol_file(r.symbols);
  } catch (const masm::AsmError& e) {
    std::cerr << fmt::format("{}: {}\n", in, e.what());
    return 1;
  }
  return 0;
}

int cmd_disasm(const std::string& in, const std::string& base, bool addresses) {
  const auto bytes = read_file(in);
  std::cout << masm::disassemble(bytes, parse_number(base), {addresses});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Basilisk SoC simulator"};
  app.require_subcommand(1);

  ImageOptions run_opts;
  std::uint64_t max_cycles = 1'000'000'000;
  bool quiet = false;
  bool emit = false;
  std::vector<std::string> dumps;
  auto* run = app.add_subcommand("run", "Run a program");
  add_image_options(run, run_opts);
  run->add_option("--max-cycles", max_cycles, "Cycle budget");
  run->add_flag("--quiet", quiet, "Do not print the stop reason and performance report");
  run->add_flag("--emit-config", emit, "Print the effective configuration before running");
  run->add_option("--dump", dumps, "After the run, write memory addr:len to a file (addr:len:file)");

  ImageOptions peek_opts;
  std::uint64_t peek_cycles = 0;
  std::string peek_addr;
  std::uint64_t peek_len = 8;
  std::vector<std::string> pokes;
  bool peek_halt = false;
  auto* peek = app.add_subcommand("peek", "Debug memory access: poke, optionally run, then peek");
  add_image_options(peek, peek_opts);
  peek->add_option("--addr", peek_addr, "Address to read")->required();
  peek->add_option("--len", peek_len, "Bytes to read");
  peek->add_option("--poke", pokes, "Write before running: addr:hexbytes");
  peek->add_option("--max-cycles", peek_cycles, "Cycles to run between poke and peek");
  peek->add_flag("--halt", peek_halt, "Keep the core halted while running");

  std::string asm_in, asm_out = "a.bin", asm_base = "0x80000000";
  auto* as = app.add_subcommand("asm", "Assemble a source file into a raw image and symbol sidecar");
  as->add_option("input", asm_in, "Assembly source")->required();
  as->add_option("-o,--output", asm_out, "Output image");
  as->add_option("--base", asm_base, "Load address");

  std::string dis_in, dis_base = "0x80000000";
  bool dis_addr = false;
  auto* dis = app.add_subcommand("disasm", "Disassemble a raw image");
  dis->add_option("input", dis_in, "Raw image")->required();
  dis->add_option("--base", dis_base, "Load address");
  dis->add_flag("--addresses", dis_addr, "Annotate each line with its address");

  std::string cfg_file;
  std::vector<std::string> cfg_sets;
  auto* config = app.add_subcommand("config", "Print the effective configuration");
  config->add_option("--config", cfg_file, "Configuration file");
  config->add_option("--set", cfg_sets, "Override one key: section.key=value")->take_all();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts, max_cycles, quiet, emit, dumps);
    if (*peek) return cmd_peek(peek_opts, peek_cycles, peek_addr, peek_len, pokes, peek_halt);
    if (*as) return cmd_asm(asm_in, asm_out, asm_base);
    if (*dis) return cmd_disasm(dis_in, dis_base, dis_addr);
    if (*config) {
      SimConfig cfg = cfg_file.empty() ? SimConfig{} : load_config_file(cfg_file);
      for (const std::string& kv : cfg_sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      cfg.validate();
      std::cout << emit_config(cfg);
      return 0;
    }
  } catch (const LoadError& e) {
    std::cerr << "load error: " << e.what() << '\n';
    return kExitLoad;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const LinkError& e) {
    std::cerr << "link error: " << e.what() << '\n';
    return kExitLink;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad number: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
