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
#include <stdexcept>
#include <string>

namespace basilisk {

using Addr = std::uint64_t;
using Cycle = std::uint64_t;

/// Bus response codes, mirroring AXI OKAY/SLVERR/DECERR. `pending` marks an
/// access that cannot complete yet (remote C2C traffic) and must be retried.
enum class Resp : std::uint8_t { okay, slverr, decerr, pending };

const char* to_string(Resp r);

enum class MasterId : std::uint8_t { core, dma, c2c, vga, debug };

const char* to_string(MasterId m);

constexpr Addr kib(Addr n) { return n << 10; }
constexpr Addr mib(Addr n) { return n << 20; }

constexpr bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

/// Thrown for invalid simulator configuration (bad geometry, overlapping map).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a program image cannot be loaded.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the chip-to-chip transport cannot be established.
class LinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for scheduling contract violations in the event kernel.
class ScheduleError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace basilisk
