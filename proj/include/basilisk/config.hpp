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
#include <string>
#include <string_view>
#include <vector>

#include "basilisk/cache.hpp"
#include "basilisk/hyperram.hpp"
#include "basilisk/interconnect.hpp"
#include "basilisk/sim_kernel.hpp"

namespace basilisk {

struct RegionLayout {
  Addr base = 0;
  Addr size = 0;
  bool operator==(const RegionLayout&) const = default;
};

/// Device placement. DRAM and scratchpad sizes follow from their geometry.
struct MapConfig {
  RegionLayout bootrom{0x0001'0000, 0x1'0000};
  RegionLayout dma{0x0100'0000, 0x1000};
  RegionLayout clint{0x0200'0000, 0x1'0000};
  RegionLayout llc_cfg{0x0300'1000, 0x1000};
  RegionLayout uart{0x0300'2000, 0x1000};
  RegionLayout i2c{0x0300'3000, 0x1000};
  RegionLayout qspi{0x0300'4000, 0x1000};
  RegionLayout gpio{0x0300'5000, 0x1000};
  RegionLayout vga{0x0300'6000, 0x1000};
  RegionLayout c2c_cfg{0x0300'7000, 0x1000};
  RegionLayout usb{0x0300'8000, 0x1000};
  RegionLayout sim_exit{0x0300'f000, 0x1000};
  RegionLayout plic{0x0c00'0000, 0x40'0000};
  RegionLayout c2c_window{0x4000'0000, 0x1000'0000};
  Addr spm_base = 0x7000'0000;
  Addr dram_base = 0x8000'0000;

  bool operator==(const MapConfig&) const = default;
};

/// Crossbar/regbus target ids of the default SoC.
namespace target {
enum : int {
  bootrom, dram, spm, dma, clint, plic, c2c_window,
  llc_cfg, uart, i2c, qspi, gpio, vga, c2c_cfg, usb, sim_exit,
};
}

struct SimConfig {
  std::uint64_t freq_hz = kNominalFreqHz;
  double voltage = 1.2;
  Cycle quantum = kDefaultQuantum;
  Addr boot_pc = 0x8000'0000;

  DramConfig dram;
  CacheConfig llc{4, 256, 64, 2, false};
  CacheConfig l1i{4, 64, 64, 1, false};
  CacheConfig l1d{4, 64, 64, 1, false};
  std::uint32_t xbar_port_bytes = 8;
  std::uint32_t uart_baud = 115200;
  std::uint32_t c2c_bits_per_cycle = 1;
  Addr c2c_peer_base = 0x8000'0000;
  MapConfig map;

  /// Comma-separated trace subsystems, or "all".
  std::string trace;
  /// "none", "stdio" or "tcp:<port>".
  std::string uart_endpoint = "stdio";
  /// Empty, "listen:<port>" or "connect:<host>:<port>".
  std::string c2c_endpoint;
  std::string frame_dump_dir;

  bool operator==(const SimConfig&) const = default;

  /// Throws ConfigError.
  void validate() const;
  AddressMap address_map() const;
};

/// Applies one `section.key = value` assignment. Throws ConfigError.
void set_config_value(SimConfig& cfg, std::string_view key, std::string_view value);

/// Parses the config text on top of `base`. Throws ConfigError naming the line.
SimConfig parse_config(std::string_view text, SimConfig base = {});
SimConfig load_config_file(const std::string& path, SimConfig base = {});

/// Normalized text form; parse_config(emit_config(c)) == c.
std::string emit_config(const SimConfig& cfg);

/// Every recognised key, in emission order.
std::vector<std::string> config_keys();

}  // namespace basilisk
