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

#include "basilisk/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace basilisk {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    base = 16;
    v.remove_prefix(2);
  }
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (ec != std::errc{} || p != v.data() + v.size() || v.empty()) {
    throw ConfigError(fmt::format("{}: expected an unsigned integer", key));
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(v), &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("{}: expected a number", key));
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("{}: expected true or false", key));
}

template <typename T>
T narrow(std::string_view key, std::uint64_t v) {
  if (v > std::numeric_limits<T>::max()) throw ConfigError(fmt::format("{}: value too large", key));
  return static_cast<T>(v);
}

std::string hex(Addr a) { return fmt::format("0x{:x}", a); }

void reshape(std::string_view key, CacheConfig& c, Addr capacity) {
  const Addr per_set = Addr{c.ways} * c.line_bytes;
  if (per_set == 0 || capacity % per_set != 0 || capacity / per_set == 0) {
    throw ConfigError(fmt::format("{}: {} B does not split into {} ways of {} B lines", key,
                                  capacity, c.ways, c.line_bytes));
  }
  c.sets = narrow<unsigned>(key, capacity / per_set);
}

struct Field {
  std::string key;
  std::string note;
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, std::string_view)> set;
};

void add_cache(std::vector<Field>& f, const std::string& sec, CacheConfig SimConfig::*m,
               const std::string& size_note) {
  f.push_back({sec + ".size", size_note,
               [m](const SimConfig& c) { return std::to_string((c.*m).capacity()); },
               [m, sec](SimConfig& c, std::string_view v) {
                 reshape(sec + ".size", c.*m, parse_uint(sec + ".size", v));
               }});
  f.push_back({sec + ".ways", "",
               [m](const SimConfig& c) { return std::to_string((c.*m).ways); },
               [m, sec](SimConfig& c, std::string_view v) {
                 const Addr cap = (c.*m).capacity();
                 (c.*m).ways = narrow<unsigned>(sec, parse_uint(sec + ".ways", v));
                 reshape(sec + ".ways", c.*m, cap);
               }});
  f.push_back({sec + ".line_bytes", "",
               [m](const SimConfig& c) { return std::to_string((c.*m).line_bytes); },
               [m, sec](SimConfig& c, std::string_view v) {
                 const Addr cap = (c.*m).capacity();
                 (c.*m).line_bytes = narrow<unsigned>(sec, parse_uint(sec + ".line_bytes", v));
                 reshape(sec + ".line_bytes", c.*m, cap);
               }});
  f.push_back({sec + ".hit_latency", "",
               [m](const SimConfig& c) { return std::to_string((c.*m).hit_latency); },
               [m, sec](SimConfig& c, std::string_view v) {
                 (c.*m).hit_latency = parse_uint(sec + ".hit_latency", v);
               }});
  f.push_back({sec + ".write_through", "",
               [m](const SimConfig& c) { return (c.*m).write_through ? "true" : "false"; },
               [m, sec](SimConfig& c, std::string_view v) {
                 (c.*m).write_through = parse_bool(sec + ".write_through", v);
               }});
}

void add_region(std::vector<Field>& f, const std::string& name, RegionLayout MapConfig::*m) {
  const std::string k = "map." + name;
  f.push_back({k + ".base", "", [m](const SimConfig& c) { return hex((c.map.*m).base); },
               [m, k](SimConfig& c, std::string_view v) { (c.map.*m).base = parse_uint(k, v); }});
  f.push_back({k + ".size", "", [m](const SimConfig& c) { return hex((c.map.*m).size); },
               [m, k](SimConfig& c, std::string_view v) { (c.map.*m).size = parse_uint(k, v); }});
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"clock.freq_hz", "nominal operating point 62 MHz at 1.2 V",
                 [](const SimConfig& c) { return std::to_string(c.freq_hz); },
                 [](SimConfig& c, std::string_view v) { c.freq_hz = parse_uint("clock.freq_hz", v); }});
    f.push_back({"clock.voltage", "metadata only",
                 [](const SimConfig& c) { return fmt::format("{}", c.voltage); },
                 [](SimConfig& c, std::string_view v) { c.voltage = parse_double("clock.voltage", v); }});
    f.push_back({"sim.quantum", "",
                 [](const SimConfig& c) { return std::to_string(c.quantum); },
                 [](SimConfig& c, std::string_view v) { c.quantum = parse_uint("sim.quantum", v); }});
    f.push_back({"sim.boot_pc", "",
                 [](const SimConfig& c) { return hex(c.boot_pc); },
                 [](SimConfig& c, std::string_view v) { c.boot_pc = parse_uint("sim.boot_pc", v); }});
    f.push_back({"dram.chips", "two HyperRAM chips",
                 [](const SimConfig& c) { return std::to_string(c.dram.chips); },
                 [](SimConfig& c, std::string_view v) {
                   c.dram.chips = narrow<unsigned>("dram.chips", parse_uint("dram.chips", v));
                 }});
    f.push_back({"dram.bytes_per_chip", "",
                 [](const SimConfig& c) { return hex(c.dram.bytes_per_chip); },
                 [](SimConfig& c, std::string_view v) {
                   c.dram.bytes_per_chip = parse_uint("dram.bytes_per_chip", v);
                 }});
    f.push_back({"dram.bytes_per_cycle", "2 B/cycle at 62 MHz = 124 MB/s peak",
                 [](const SimConfig& c) { return std::to_string(c.dram.bytes_per_cycle); },
                 [](SimConfig& c, std::string_view v) {
                   c.dram.bytes_per_cycle =
                       narrow<std::uint32_t>("dram.bytes_per_cycle", parse_uint("dram.bytes_per_cycle", v));
                 }});
    f.push_back({"dram.latency_cycles", "",
                 [](const SimConfig& c) { return std::to_string(c.dram.latency_cycles); },
                 [](SimConfig& c, std::string_view v) {
                   c.dram.latency_cycles = parse_uint("dram.latency_cycles", v);
                 }});
    add_cache(f, "llc", &SimConfig::llc, "64 KiB, 4-way");
    add_cache(f, "l1i", &SimConfig::l1i, "16 KiB, 4-way");
    add_cache(f, "l1d", &SimConfig::l1d, "16 KiB, 4-way");
    f.push_back({"xbar.port_bytes", "8 B/cycle at 62 MHz = 496 MB/s = 473 MiB/s",
                 [](const SimConfig& c) { return std::to_string(c.xbar_port_bytes); },
                 [](SimConfig& c, std::string_view v) {
                   c.xbar_port_bytes = narrow<std::uint32_t>("xbar.port_bytes", parse_uint("xbar.port_bytes", v));
                 }});
    f.push_back({"uart.baud", "",
                 [](const SimConfig& c) { return std::to_string(c.uart_baud); },
                 [](SimConfig& c, std::string_view v) {
                   c.uart_baud = narrow<std::uint32_t>("uart.baud", parse_uint("uart.baud", v));
                 }});
    f.push_back({"uart.endpoint", "none, stdio or tcp:<port>",
                 [](const SimConfig& c) { return c.uart_endpoint; },
                 [](SimConfig& c, std::string_view v) { c.uart_endpoint = std::string(v); }});
    f.push_back({"c2c.bits_per_cycle", "1 bit/cycle at 62 MHz = 62 Mbit/s per direction",
                 [](const SimConfig& c) { return std::to_string(c.c2c_bits_per_cycle); },
                 [](SimConfig& c, std::string_view v) {
                   c.c2c_bits_per_cycle =
                       narrow<std::uint32_t>("c2c.bits_per_cycle", parse_uint("c2c.bits_per_cycle", v));
                 }});
    f.push_back({"c2c.peer_base", "",
                 [](const SimConfig& c) { return hex(c.c2c_peer_base); },
                 [](SimConfig& c, std::string_view v) { c.c2c_peer_base = parse_uint("c2c.peer_base", v); }});
    f.push_back({"c2c.endpoint", "empty, listen:<port> or connect:<host>:<port>",
                 [](const SimConfig& c) { return c.c2c_endpoint; },
                 [](SimConfig& c, std::string_view v) { c.c2c_endpoint = std::string(v); }});
    f.push_back({"vga.dump_dir", "",
                 [](const SimConfig& c) { return c.frame_dump_dir; },
                 [](SimConfig& c, std::string_view v) { c.frame_dump_dir = std::string(v); }});
    f.push_back({"trace.filter", "core, llc, dram, dma, c2c, irq, uart, vga, sim or all",
                 [](const SimConfig& c) { return c.trace; },
                 [](SimConfig& c, std::string_view v) { c.trace = std::string(v); }});
    add_region(f, "bootrom", &MapConfig::bootrom);
    add_region(f, "dma", &MapConfig::dma);
    add_region(f, "clint", &MapConfig::clint);
    add_region(f, "llc_cfg", &MapConfig::llc_cfg);
    add_region(f, "uart", &MapConfig::uart);
    add_region(f, "i2c", &MapConfig::i2c);
    add_region(f, "qspi", &MapConfig::qspi);
    add_region(f, "gpio", &MapConfig::gpio);
    add_region(f, "vga", &MapConfig::vga);
    add_region(f, "c2c_cfg", &MapConfig::c2c_cfg);
    add_region(f, "usb", &MapConfig::usb);
    add_region(f, "sim_exit", &MapConfig::sim_exit);
    add_region(f, "plic", &MapConfig::plic);
    add_region(f, "c2c_window", &MapConfig::c2c_window);
    f.push_back({"map.spm.base", "size follows the LLC capacity",
                 [](const SimConfig& c) { return hex(c.map.spm_base); },
                 [](SimConfig& c, std::string_view v) { c.map.spm_base = parse_uint("map.spm.base", v); }});
    f.push_back({"map.dram.base", "size follows the DRAM geometry",
                 [](const SimConfig& c) { return hex(c.map.dram_base); },
                 [](SimConfig& c, std::string_view v) { c.map.dram_base = parse_uint("map.dram.base", v); }});
    return f;
  }();
  return table;
}

}  // namespace

void set_config_value(SimConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "clock.preset") {
    const auto op = find_operating_point(std::string(value));
    if (!op) throw ConfigError(fmt::format("clock.preset: unknown operating point '{}'", value));
    cfg.freq_hz = op->freq_hz;
    cfg.voltage = op->voltage;
    return;
  }
  for (const Field& f : fields()) {
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

SimConfig parse_config(std::string_view text, SimConfig base) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'section.key = value'", line_no));
    }
    try {
      set_config_value(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return base;
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string emit_config(const SimConfig& cfg) {
  std::string out = "# basilisk-sim effective configuration\n";
  std::string section;
  for (const Field& f : fields()) {
    const std::string sec = f.key.substr(0, f.key.find('.'));
    if (sec != section) {
      out += '\n';
      section = sec;
    }
    std::string line = fmt::format("{} = {}", f.key, f.get(cfg));
    if (!f.note.empty()) line = fmt::format("{:<36} # {}", line, f.note);
    out += line;
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

void SimConfig::validate() const {
  if (freq_hz == 0) throw ConfigError("clock.freq_hz must be non-zero");
  if (quantum == 0) throw ConfigError("sim.quantum must be non-zero");
  if (dram.chips == 0 || dram.bytes_per_chip == 0) throw ConfigError("dram geometry is empty");
  if (dram.bytes_per_cycle == 0) throw ConfigError("dram.bytes_per_cycle must be non-zero");
  if (xbar_port_bytes == 0) throw ConfigError("xbar.port_bytes must be non-zero");
  if (uart_baud == 0) throw ConfigError("uart.baud must be non-zero");
  if (c2c_bits_per_cycle == 0) throw ConfigError("c2c.bits_per_cycle must be non-zero");
  if (llc.ways > 32) throw ConfigError("llc.ways must be at most 32");
  llc.validate();
  l1i.validate();
  l1d.validate();
  (void)address_map();
}

AddressMap SimConfig::address_map() const {
  AddressMap m;
  auto xbar = [&](const char* name, RegionLayout r, int id) {
    m.add(Region{name, r.base, r.size, id, Bus::xbar});
  };
  auto reg = [&](const char* name, RegionLayout r, int id) {
    m.add(Region{name, r.base, r.size, id, Bus::regbus});
  };
  xbar("bootrom", map.bootrom, target::bootrom);
  xbar("dma", map.dma, target::dma);
  xbar("clint", map.clint, target::clint);
  reg("llc_cfg", map.llc_cfg, target::llc_cfg);
  reg("uart", map.uart, target::uart);
  reg("i2c", map.i2c, target::i2c);
  reg("qspi", map.qspi, target::qspi);
  reg("gpio", map.gpio, target::gpio);
  reg("vga", map.vga, target::vga);
  reg("c2c_cfg", map.c2c_cfg, target::c2c_cfg);
  reg("usb", map.usb, target::usb);
  reg("sim_exit", map.sim_exit, target::sim_exit);
  xbar("plic", map.plic, target::plic);
  xbar("c2c_window", map.c2c_window, target::c2c_window);
  xbar("spm", {map.spm_base, llc.capacity()}, target::spm);
  xbar("dram", {map.dram_base, dram.size()}, target::dram);
  return m;
}

}  // namespace basilisk
