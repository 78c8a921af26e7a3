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

#include "basilisk/mini_asm.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace basilisk::masm {

using rv64::COp;
using rv64::Fmt;
using rv64::Instruction;
using rv64::Op;

AsmError::AsmError(int line, const std::string& msg)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, msg) : msg), line_(line) {}

namespace {

constexpr std::int64_t sext(std::uint64_t v, unsigned bits) {
  if (bits >= 64) return static_cast<std::int64_t>(v);
  const std::uint64_t m = std::uint64_t{1} << (bits - 1);
  v &= (std::uint64_t{1} << bits) - 1;
  return static_cast<std::int64_t>((v ^ m) - m);
}

bool fits_i32(std::int64_t v) { return v >= INT32_MIN && v <= INT32_MAX; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_sym_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}
bool is_sym_char(char c) {
  return is_sym_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

// Strips a trailing '#' comment that is not inside a string or char literal.
std::string_view strip_comment(std::string_view s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote != 0) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

std::vector<std::string> split_operands(std::string_view s) {
  std::vector<std::string> out;
  s = trim(s);
  if (s.empty()) return out;
  int depth = 0;
  char quote = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote != 0) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
    } else if (c == ',' && depth == 0) {
      out.emplace_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.emplace_back(trim(s.substr(start)));
  return out;
}

enum class Section : std::uint8_t { text, data };

struct Stmt {
  int line = 0;
  Section sec = Section::text;
  std::string label;
  std::string op;
  std::vector<std::string> ops;
  Addr addr = 0;
  std::size_t size = 0;
};

class Assembler {
 public:
  Assembler(std::string_view src, Addr base) : src_(src), base_(base) {}

  AsmResult run() {
    parse();
    layout();
    resolving_ = true;
    return emit();
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw AsmError(line_, msg); }

  // ---- parsing ---------------------------------------------------------

  void parse() {
    std::set<std::string> seen;
    Section sec = Section::text;
    int n = 0;
    std::size_t pos = 0;
    while (pos <= src_.size()) {
      const std::size_t nl = src_.find('\n', pos);
      const std::size_t end = nl == std::string_view::npos ? src_.size() : nl;
      std::string_view line = trim(strip_comment(src_.substr(pos, end - pos)));
      line_ = ++n;
      pos = end + 1;
      while (!line.empty()) {
        std::size_t i = 0;
        while (i < line.size() && is_sym_char(line[i])) ++i;
        if (i == 0 || i >= line.size() || line[i] != ':') break;
        std::string name(line.substr(0, i));
        if (!seen.insert(name).second || equs_.count(name) != 0) {
          fail(fmt::format("duplicate label '{}'", name));
        }
        Stmt st;
        st.line = n;
        st.sec = sec;
        st.label = std::move(name);
        stmts_.push_back(std::move(st));
        line = trim(line.substr(i + 1));
      }
      if (line.empty()) continue;
      std::size_t sp = 0;
      while (sp < line.size() && !std::isspace(static_cast<unsigned char>(line[sp]))) ++sp;
      std::string op = lower(line.substr(0, sp));
      std::vector<std::string> ops = split_operands(line.substr(sp));
      if (op == ".text") {
        sec = Section::text;
        continue;
      }
      if (op == ".data" || op == ".rodata" || op == ".bss" || op == ".sdata") {
        sec = Section::data;
        continue;
      }
      if (op == ".section") {
        if (ops.empty()) fail(".section needs a name");
        sec = ops[0].rfind(".text", 0) == 0 ? Section::text : Section::data;
        continue;
      }
      if (op == ".equ" || op == ".set") {
        if (ops.size() != 2 || ops[0].empty() || !is_sym_start(ops[0][0])) {
          fail(fmt::format("{} expects a name and a value", op));
        }
        if (seen.count(ops[0]) != 0) fail(fmt::format("duplicate label '{}'", ops[0]));
        equs_[ops[0]] = eval_const(ops[1]);
        continue;
      }
      if (op == ".globl" || op == ".global" || op == ".local" || op == ".type" ||
          op == ".size" || op == ".option" || op == ".file" || op == ".ident" ||
          op == ".attribute") {
        continue;
      }
      Stmt st;
      st.line = n;
      st.sec = sec;
      st.op = std::move(op);
      st.ops = std::move(ops);
      stmts_.push_back(std::move(st));
    }
  }

  // ---- expressions -----------------------------------------------------

  struct Lexer {
    std::string_view s;
    std::size_t i = 0;
    void skip() {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(std::string_view t) {
      skip();
      if (s.substr(i, t.size()) == t) {
        i += t.size();
        return true;
      }
      return false;
    }
    bool done() {
      skip();
      return i >= s.size();
    }
  };

  std::int64_t eval(std::string_view text) {
    Lexer lx{trim(text)};
    if (lx.done()) fail("missing expression");
    const std::int64_t v = parse_or(lx);
    if (!lx.done()) fail(fmt::format("bad expression '{}'", text));
    return v;
  }

  std::int64_t eval_const(std::string_view text) {
    const bool saved = const_only_;
    const_only_ = true;
    const std::int64_t v = eval(text);
    const_only_ = saved;
    return v;
  }

  std::int64_t parse_or(Lexer& lx) {
    std::int64_t v = parse_and(lx);
    while (lx.eat("|")) v |= parse_and(lx);
    return v;
  }
  std::int64_t parse_and(Lexer& lx) {
    std::int64_t v = parse_shift(lx);
    while (lx.eat("&")) v &= parse_shift(lx);
    return v;
  }
  std::int64_t parse_shift(Lexer& lx) {
    std::int64_t v = parse_add(lx);
    for (;;) {
      if (lx.eat("<<")) {
        v = static_cast<std::int64_t>(static_cast<std::uint64_t>(v) << (parse_add(lx) & 63));
      } else if (lx.eat(">>")) {
        v >>= parse_add(lx) & 63;
      } else {
        return v;
      }
    }
  }
  std::int64_t parse_add(Lexer& lx) {
    std::uint64_t v = static_cast<std::uint64_t>(parse_mul(lx));
    for (;;) {
      if (lx.eat("+")) {
        v += static_cast<std::uint64_t>(parse_mul(lx));
      } else if (lx.eat("-")) {
        v -= static_cast<std::uint64_t>(parse_mul(lx));
      } else {
        return static_cast<std::int64_t>(v);
      }
    }
  }
  std::int64_t parse_mul(Lexer& lx) {
    std::int64_t v = parse_unary(lx);
    for (;;) {
      if (lx.eat("*")) {
        v = static_cast<std::int64_t>(static_cast<std::uint64_t>(v) *
                                      static_cast<std::uint64_t>(parse_unary(lx)));
      } else if (lx.eat("/")) {
        const std::int64_t d = parse_unary(lx);
        if (d == 0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }
  std::int64_t parse_unary(Lexer& lx) {
    if (lx.eat("-")) return static_cast<std::int64_t>(0 - static_cast<std::uint64_t>(parse_unary(lx)));
    if (lx.eat("+")) return parse_unary(lx);
    if (lx.eat("~")) return ~parse_unary(lx);
    return parse_primary(lx);
  }
  std::int64_t parse_primary(Lexer& lx) {
    lx.skip();
    if (lx.eat("(")) {
      const std::int64_t v = parse_or(lx);
      if (!lx.eat(")")) fail("missing ')'");
      return v;
    }
    if (lx.eat("%hi(")) {
      const std::int64_t v = parse_or(lx);
      if (!lx.eat(")")) fail("missing ')'");
      return static_cast<std::int64_t>(((static_cast<std::uint64_t>(v) + 0x800) >> 12) & 0xfffff);
    }
    if (lx.eat("%lo(")) {
      const std::int64_t v = parse_or(lx);
      if (!lx.eat(")")) fail("missing ')'");
      return sext(static_cast<std::uint64_t>(v), 12);
    }
    const std::string_view s = lx.s;
    std::size_t& i = lx.i;
    if (i >= s.size()) fail("missing operand");
    if (s[i] == '\'') {
      if (i + 2 < s.size() && s[i + 1] == '\\' && i + 3 < s.size() && s[i + 3] == '\'') {
        const char c = unescape(s[i + 2]);
        i += 4;
        return static_cast<unsigned char>(c);
      }
      if (i + 2 < s.size() && s[i + 2] == '\'') {
        const char c = s[i + 1];
        i += 3;
        return static_cast<unsigned char>(c);
      }
      fail("bad character literal");
    }
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      int radix = 10;
      std::size_t j = i;
      if (s[j] == '0' && j + 1 < s.size() && (s[j + 1] == 'x' || s[j + 1] == 'X')) {
        radix = 16;
        j += 2;
      } else if (s[j] == '0' && j + 1 < s.size() && (s[j + 1] == 'b' || s[j + 1] == 'B')) {
        radix = 2;
        j += 2;
      }
      std::uint64_t v = 0;
      const std::size_t digits_start = j;
      for (; j < s.size(); ++j) {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[j])));
        int d;
        if (c >= '0' && c <= '9') {
          d = c - '0';
        } else if (c >= 'a' && c <= 'f') {
          d = c - 'a' + 10;
        } else if (c == '_') {
          continue;
        } else {
          break;
        }
        if (d >= radix) fail(fmt::format("bad digit in '{}'", s));
        const unsigned __int128 next = static_cast<unsigned __int128>(v) * radix + d;
        if (next > UINT64_MAX) fail(fmt::format("number out of range in '{}'", s));
        v = static_cast<std::uint64_t>(next);
      }
      if (j == digits_start) fail(fmt::format("bad number '{}'", s));
      if (j < s.size() && is_sym_char(s[j])) fail(fmt::format("bad number '{}'", s));
      i = j;
      return static_cast<std::int64_t>(v);
    }
    if (is_sym_start(s[i])) {
      std::size_t j = i;
      while (j < s.size() && is_sym_char(s[j])) ++j;
      const std::string name(s.substr(i, j - i));
      i = j;
      return symbol_value(name);
    }
    fail(fmt::format("bad expression '{}'", s));
  }

  std::int64_t symbol_value(const std::string& name) {
    if (auto it = equs_.find(name); it != equs_.end()) return it->second;
    if (const_only_) fail(fmt::format("'{}' is not a constant", name));
    if (auto it = symbols_.find(name); it != symbols_.end()) {
      return static_cast<std::int64_t>(it->second);
    }
    if (resolving_) fail(fmt::format("undefined symbol '{}'", name));
    return 0;
  }

  static char unescape(char c) {
    switch (c) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case '0': return '\0';
      default: return c;
    }
  }

  std::string parse_string(std::string_view s) {
    s = trim(s);
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') fail("expected a string literal");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] != '\\') {
        out += s[i];
        continue;
      }
      if (++i + 1 >= s.size()) fail("bad escape");
      if (s[i] == 'x') {
        unsigned v = 0;
        int n = 0;
        while (n < 2 && i + 1 < s.size() - 1 && std::isxdigit(static_cast<unsigned char>(s[i + 1]))) {
          v = v * 16 + static_cast<unsigned>(std::stoi(std::string(1, s[++i]), nullptr, 16));
          ++n;
        }
        if (n == 0) fail("bad \\x escape");
        out += static_cast<char>(v);
      } else {
        out += unescape(s[i]);
      }
    }
    return out;
  }

  // ---- operands --------------------------------------------------------

  unsigned xreg(std::string_view s) {
    if (auto r = rv64::parse_xreg(trim(s))) return *r;
    fail(fmt::format("expected an integer register, got '{}'", s));
  }
  unsigned freg(std::string_view s) {
    if (auto r = rv64::parse_freg(trim(s))) return *r;
    fail(fmt::format("expected a float register, got '{}'", s));
  }

  struct Mem {
    std::int64_t off = 0;
    unsigned base = 0;
  };

  std::optional<Mem> try_mem(std::string_view s) {
    s = trim(s);
    if (s.empty() || s.back() != ')') return std::nullopt;
    const std::size_t open = s.rfind('(');
    if (open == std::string_view::npos) return std::nullopt;
    const auto reg = rv64::parse_xreg(trim(s.substr(open + 1, s.size() - open - 2)));
    if (!reg) return std::nullopt;
    Mem m;
    m.base = *reg;
    const std::string_view off = trim(s.substr(0, open));
    m.off = off.empty() ? 0 : eval(off);
    return m;
  }

  Mem mem(std::string_view s) {
    if (auto m = try_mem(s)) return *m;
    fail(fmt::format("expected offset(register), got '{}'", s));
  }

  std::int64_t target(std::string_view s, Addr pc) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(eval(s)) - pc);
  }

  unsigned csr(std::string_view s) {
    s = trim(s);
    if (auto c = rv64::parse_csr(s)) return *c;
    const std::int64_t v = eval(s);
    if (v < 0 || v > 0xfff) fail(fmt::format("csr number out of range: '{}'", s));
    return static_cast<unsigned>(v);
  }

  unsigned fence_set(std::string_view s) {
    s = trim(s);
    if (s == "0") return 0;
    unsigned v = 0;
    for (char c : s) {
      switch (c) {
        case 'i': v |= 8; break;
        case 'o': v |= 4; break;
        case 'r': v |= 2; break;
        case 'w': v |= 1; break;
        default: fail(fmt::format("bad fence set '{}'", s));
      }
    }
    return v;
  }

  std::uint8_t rounding(const std::vector<std::string>& ops, std::size_t n) {
    if (ops.size() == n) return rv64::kRmDyn;
    if (ops.size() != n + 1) fail("wrong number of operands");
    const auto rm = rv64::parse_rm(trim(ops[n]));
    if (!rm) fail(fmt::format("bad rounding mode '{}'", ops[n]));
    return static_cast<std::uint8_t>(*rm);
  }

  void arity(const std::vector<std::string>& ops, std::size_t n) {
    if (ops.size() != n) {
      fail(fmt::format("expected {} operand{}, got {}", n, n == 1 ? "" : "s", ops.size()));
    }
  }

  // ---- instructions ----------------------------------------------------

  static Instruction make(Op op, unsigned rd, unsigned rs1, unsigned rs2, std::int64_t imm) {
    Instruction in;
    in.op = op;
    in.rd = static_cast<std::uint8_t>(rd);
    in.rs1 = static_cast<std::uint8_t>(rs1);
    in.rs2 = static_cast<std::uint8_t>(rs2);
    in.imm = imm;
    return in;
  }

  Instruction base_insn(Op op, const std::vector<std::string>& ops, Addr pc, std::uint8_t aqrl) {
    const rv64::OpInfo& info = rv64::op_info(op);
    Instruction in;
    in.op = op;
    auto set = [&](unsigned rd, unsigned rs1, unsigned rs2, std::int64_t imm) {
      in.rd = static_cast<std::uint8_t>(rd);
      in.rs1 = static_cast<std::uint8_t>(rs1);
      in.rs2 = static_cast<std::uint8_t>(rs2);
      in.imm = imm;
    };
    switch (info.fmt) {
      case Fmt::U: {
        arity(ops, 2);
        const std::int64_t v = eval(ops[1]);
        if (v < -(1 << 19) || v > 0xfffff) fail("immediate out of range");
        set(xreg(ops[0]), 0, 0, sext(static_cast<std::uint64_t>(v) << 12, 32));
        break;
      }
      case Fmt::J:
        if (ops.size() == 1) {
          set(1, 0, 0, target(ops[0], pc));
        } else {
          arity(ops, 2);
          set(xreg(ops[0]), 0, 0, target(ops[1], pc));
        }
        break;
      case Fmt::JALR:
        if (ops.size() == 1) {
          if (auto m = try_mem(ops[0])) {
            set(1, m->base, 0, m->off);
          } else {
            set(1, xreg(ops[0]), 0, 0);
          }
        } else if (ops.size() == 2) {
          if (auto m = try_mem(ops[1])) {
            set(xreg(ops[0]), m->base, 0, m->off);
          } else {
            set(xreg(ops[0]), xreg(ops[1]), 0, 0);
          }
        } else {
          arity(ops, 3);
          set(xreg(ops[0]), xreg(ops[1]), 0, eval(ops[2]));
        }
        break;
      case Fmt::B:
        arity(ops, 3);
        set(0, xreg(ops[0]), xreg(ops[1]), target(ops[2], pc));
        break;
      case Fmt::LOAD: {
        arity(ops, 2);
        const Mem m = mem(ops[1]);
        set(xreg(ops[0]), m.base, 0, m.off);
        break;
      }
      case Fmt::STORE: {
        arity(ops, 2);
        const Mem m = mem(ops[1]);
        set(0, m.base, xreg(ops[0]), m.off);
        break;
      }
      case Fmt::FLOAD: {
        arity(ops, 2);
        const Mem m = mem(ops[1]);
        set(freg(ops[0]), m.base, 0, m.off);
        break;
      }
      case Fmt::FSTORE: {
        arity(ops, 2);
        const Mem m = mem(ops[1]);
        set(0, m.base, freg(ops[0]), m.off);
        break;
      }
      case Fmt::I:
      case Fmt::SHIFT:
      case Fmt::SHIFTW:
        arity(ops, 3);
        set(xreg(ops[0]), xreg(ops[1]), 0, eval(ops[2]));
        break;
      case Fmt::R:
        arity(ops, 3);
        set(xreg(ops[0]), xreg(ops[1]), xreg(ops[2]), 0);
        break;
      case Fmt::FENCE:
        if (ops.empty()) {
          in.imm = 0xff;
        } else {
          arity(ops, 2);
          in.imm = (fence_set(ops[0]) << 4) | fence_set(ops[1]);
        }
        break;
      case Fmt::NONE: arity(ops, 0); break;
      case Fmt::SFENCE:
        if (ops.size() > 2) fail("sfence.vma takes at most two operands");
        set(0, ops.size() > 0 ? xreg(ops[0]) : 0, ops.size() > 1 ? xreg(ops[1]) : 0, 0);
        break;
      case Fmt::CSR:
        arity(ops, 3);
        set(xreg(ops[0]), xreg(ops[2]), 0, csr(ops[1]));
        break;
      case Fmt::CSRI: {
        arity(ops, 3);
        const std::int64_t v = eval(ops[2]);
        if (v < 0 || v > 31) fail("csr immediate out of range");
        set(xreg(ops[0]), static_cast<unsigned>(v), 0, csr(ops[1]));
        break;
      }
      case Fmt::AMO: {
        arity(ops, 3);
        const Mem m = mem(ops[2]);
        if (m.off != 0) fail("atomic address offset must be zero");
        set(xreg(ops[0]), m.base, xreg(ops[1]), 0);
        in.rm = aqrl;
        break;
      }
      case Fmt::LR: {
        arity(ops, 2);
        const Mem m = mem(ops[1]);
        if (m.off != 0) fail("atomic address offset must be zero");
        set(xreg(ops[0]), m.base, 0, 0);
        in.rm = aqrl;
        break;
      }
      case Fmt::R4:
        in.rm = rounding(ops, 4);
        set(freg(ops[0]), freg(ops[1]), freg(ops[2]), 0);
        in.rs3 = static_cast<std::uint8_t>(freg(ops[3]));
        break;
      case Fmt::FR_RM:
        in.rm = rounding(ops, 3);
        set(freg(ops[0]), freg(ops[1]), freg(ops[2]), 0);
        break;
      case Fmt::FR:
        arity(ops, 3);
        set(freg(ops[0]), freg(ops[1]), freg(ops[2]), 0);
        break;
      case Fmt::FR1_RM:
        in.rm = rounding(ops, 2);
        set(freg(ops[0]), freg(ops[1]), 0, 0);
        break;
      case Fmt::FCMP:
        arity(ops, 3);
        set(xreg(ops[0]), freg(ops[1]), freg(ops[2]), 0);
        break;
      case Fmt::F2X:
        arity(ops, 2);
        set(xreg(ops[0]), freg(ops[1]), 0, 0);
        break;
      case Fmt::F2X_RM:
        in.rm = rounding(ops, 2);
        set(xreg(ops[0]), freg(ops[1]), 0, 0);
        break;
      case Fmt::X2F:
        arity(ops, 2);
        set(freg(ops[0]), xreg(ops[1]), 0, 0);
        break;
      case Fmt::X2F_RM:
        in.rm = rounding(ops, 2);
        set(freg(ops[0]), xreg(ops[1]), 0, 0);
        break;
    }
    return in;
  }

  Instruction compressed(COp c, const std::vector<std::string>& ops, Addr pc) {
    Instruction in;
    in.cop = c;
    in.size = 2;
    auto set = [&](Op op, unsigned rd, unsigned rs1, unsigned rs2, std::int64_t imm) {
      in.op = op;
      in.rd = static_cast<std::uint8_t>(rd);
      in.rs1 = static_cast<std::uint8_t>(rs1);
      in.rs2 = static_cast<std::uint8_t>(rs2);
      in.imm = imm;
    };
    auto sp_mem = [&](std::string_view s) {
      const Mem m = mem(s);
      if (m.base != 2) fail("base register must be sp");
      return m.off;
    };
    switch (c) {
      case COp::c_addi4spn:
        arity(ops, 3);
        if (xreg(ops[1]) != 2) fail("c.addi4spn source must be sp");
        set(Op::addi, xreg(ops[0]), 2, 0, eval(ops[2]));
        break;
      case COp::c_fld:
      case COp::c_lw:
      case COp::c_ld: {
        arity(ops, 2);
        const Mem m = mem(ops[1]);
        const Op op = c == COp::c_fld ? Op::fld : c == COp::c_lw ? Op::lw : Op::ld;
        set(op, c == COp::c_fld ? freg(ops[0]) : xreg(ops[0]), m.base, 0, m.off);
        break;
      }
      case COp::c_fsd:
      case COp::c_sw:
      case COp::c_sd: {
        arity(ops, 2);
        const Mem m = mem(ops[1]);
        const Op op = c == COp::c_fsd ? Op::fsd : c == COp::c_sw ? Op::sw : Op::sd;
        set(op, 0, m.base, c == COp::c_fsd ? freg(ops[0]) : xreg(ops[0]), m.off);
        break;
      }
      case COp::c_nop:
        arity(ops, 0);
        set(Op::addi, 0, 0, 0, 0);
        break;
      case COp::c_ebreak:
        arity(ops, 0);
        set(Op::ebreak, 0, 0, 0, 0);
        break;
      case COp::c_addi:
      case COp::c_addiw:
      case COp::c_andi:
      case COp::c_slli:
      case COp::c_srli:
      case COp::c_srai: {
        arity(ops, 2);
        static constexpr std::pair<COp, Op> kMap[] = {
            {COp::c_addi, Op::addi}, {COp::c_addiw, Op::addiw}, {COp::c_andi, Op::andi},
            {COp::c_slli, Op::slli}, {COp::c_srli, Op::srli},   {COp::c_srai, Op::srai}};
        const Op op = std::find_if(std::begin(kMap), std::end(kMap),
                                   [&](const auto& p) { return p.first == c; })
                          ->second;
        const unsigned rd = xreg(ops[0]);
        set(op, rd, rd, 0, eval(ops[1]));
        break;
      }
      case COp::c_li:
        arity(ops, 2);
        set(Op::addi, xreg(ops[0]), 0, 0, eval(ops[1]));
        break;
      case COp::c_addi16sp:
        if (ops.size() == 2) {
          if (xreg(ops[0]) != 2) fail("c.addi16sp destination must be sp");
          set(Op::addi, 2, 2, 0, eval(ops[1]));
        } else {
          arity(ops, 1);
          set(Op::addi, 2, 2, 0, eval(ops[0]));
        }
        break;
      case COp::c_lui: {
        arity(ops, 2);
        const std::int64_t v = eval(ops[1]);
        if (v < -(1 << 19) || v > 0xfffff) fail("immediate out of range");
        set(Op::lui, xreg(ops[0]), 0, 0, sext(static_cast<std::uint64_t>(v), 20) * 4096);
        break;
      }
      case COp::c_sub:
      case COp::c_xor:
      case COp::c_or:
      case COp::c_and:
      case COp::c_subw:
      case COp::c_addw:
      case COp::c_add: {
        arity(ops, 2);
        static constexpr std::pair<COp, Op> kMap[] = {
            {COp::c_sub, Op::sub},   {COp::c_xor, Op::xor_},  {COp::c_or, Op::or_},
            {COp::c_and, Op::and_},  {COp::c_subw, Op::subw}, {COp::c_addw, Op::addw},
            {COp::c_add, Op::add}};
        const Op op = std::find_if(std::begin(kMap), std::end(kMap),
                                   [&](const auto& p) { return p.first == c; })
                          ->second;
        const unsigned rd = xreg(ops[0]);
        set(op, rd, rd, xreg(ops[1]), 0);
        break;
      }
      case COp::c_mv:
        arity(ops, 2);
        set(Op::add, xreg(ops[0]), 0, xreg(ops[1]), 0);
        break;
      case COp::c_j:
        arity(ops, 1);
        set(Op::jal, 0, 0, 0, target(ops[0], pc));
        break;
      case COp::c_beqz:
      case COp::c_bnez:
        arity(ops, 2);
        set(c == COp::c_beqz ? Op::beq : Op::bne, 0, xreg(ops[0]), 0, target(ops[1], pc));
        break;
      case COp::c_fldsp:
        arity(ops, 2);
        set(Op::fld, freg(ops[0]), 2, 0, sp_mem(ops[1]));
        break;
      case COp::c_lwsp:
      case COp::c_ldsp:
        arity(ops, 2);
        set(c == COp::c_lwsp ? Op::lw : Op::ld, xreg(ops[0]), 2, 0, sp_mem(ops[1]));
        break;
      case COp::c_fsdsp:
        arity(ops, 2);
        set(Op::fsd, 0, 2, freg(ops[0]), sp_mem(ops[1]));
        break;
      case COp::c_swsp:
      case COp::c_sdsp:
        arity(ops, 2);
        set(c == COp::c_swsp ? Op::sw : Op::sd, 0, 2, xreg(ops[0]), sp_mem(ops[1]));
        break;
      case COp::c_jr:
        arity(ops, 1);
        set(Op::jalr, 0, xreg(ops[0]), 0, 0);
        break;
      case COp::c_jalr:
        arity(ops, 1);
        set(Op::jalr, 1, xreg(ops[0]), 0, 0);
        break;
      case COp::none: fail("not a compressed mnemonic");
    }
    return in;
  }

  // auipc+addi/jalr pair reaching `sym` from `pc`.
  std::pair<std::int64_t, std::int64_t> pcrel(std::string_view sym, Addr pc) {
    const std::int64_t off = target(sym, pc);
    const std::int64_t hi = static_cast<std::int64_t>(static_cast<std::uint64_t>(off) + 0x800) >> 12;
    const std::int64_t lo = off - hi * 4096;
    if (resolving_ && !fits_i32(off)) fail("pc-relative target out of range");
    return {sext(static_cast<std::uint64_t>(hi) << 12, 32), lo};
  }

  std::optional<std::vector<Instruction>> pseudo(const std::string& m,
                                                 const std::vector<std::string>& ops, Addr pc) {
    using V = std::vector<Instruction>;
    auto one = [](Instruction in) { return V{in}; };
    auto xr = [&](std::size_t i) { return xreg(ops[i]); };
    auto fr = [&](std::size_t i) { return freg(ops[i]); };
    auto branch = [&](Op op, bool swap) {
      arity(ops, 3);
      return swap ? one(make(op, 0, xr(1), xr(0), target(ops[2], pc)))
                  : one(make(op, 0, xr(0), xr(1), target(ops[2], pc)));
    };
    auto branch_zero = [&](Op op, bool zero_first) {
      arity(ops, 2);
      return zero_first ? one(make(op, 0, 0, xr(0), target(ops[1], pc)))
                        : one(make(op, 0, xr(0), 0, target(ops[1], pc)));
    };
    auto csr_op = [&](Op op, unsigned rd, std::string_view c, unsigned rs1) {
      return one(make(op, rd, rs1, 0, csr(c)));
    };
    auto csr_imm = [&](Op op, std::string_view c, std::string_view v) {
      const std::int64_t u = eval(v);
      if (u < 0 || u > 31) fail("csr immediate out of range");
      return one(make(op, 0, static_cast<unsigned>(u), 0, csr(c)));
    };
    auto fp2 = [&](Op op) {
      arity(ops, 2);
      return one(make(op, fr(0), fr(1), fr(1), 0));
    };

    if (m == "nop") return arity(ops, 0), one(make(Op::addi, 0, 0, 0, 0));
    if (m == "li") {
      arity(ops, 2);
      return materialize(xr(0), eval_const(ops[1]));
    }
    if (m == "la" || m == "lla") {
      arity(ops, 2);
      const unsigned rd = xr(0);
      const auto [hi, lo] = pcrel(ops[1], pc);
      return V{make(Op::auipc, rd, 0, 0, hi), make(Op::addi, rd, rd, 0, lo)};
    }
    if (m == "call" || m == "tail") {
      arity(ops, 1);
      const unsigned link = m == "call" ? 1 : 6;
      const auto [hi, lo] = pcrel(ops[0], pc);
      return V{make(Op::auipc, link, 0, 0, hi), make(Op::jalr, m == "call" ? 1 : 0, link, 0, lo)};
    }
    if (m == "mv") return arity(ops, 2), one(make(Op::addi, xr(0), xr(1), 0, 0));
    if (m == "not") return arity(ops, 2), one(make(Op::xori, xr(0), xr(1), 0, -1));
    if (m == "neg") return arity(ops, 2), one(make(Op::sub, xr(0), 0, xr(1), 0));
    if (m == "negw") return arity(ops, 2), one(make(Op::subw, xr(0), 0, xr(1), 0));
    if (m == "sext.w") return arity(ops, 2), one(make(Op::addiw, xr(0), xr(1), 0, 0));
    if (m == "seqz") return arity(ops, 2), one(make(Op::sltiu, xr(0), xr(1), 0, 1));
    if (m == "snez") return arity(ops, 2), one(make(Op::sltu, xr(0), 0, xr(1), 0));
    if (m == "sltz") return arity(ops, 2), one(make(Op::slt, xr(0), xr(1), 0, 0));
    if (m == "sgtz") return arity(ops, 2), one(make(Op::slt, xr(0), 0, xr(1), 0));
    if (m == "beqz") return branch_zero(Op::beq, false);
    if (m == "bnez") return branch_zero(Op::bne, false);
    if (m == "bltz") return branch_zero(Op::blt, false);
    if (m == "bgez") return branch_zero(Op::bge, false);
    if (m == "blez") return branch_zero(Op::bge, true);
    if (m == "bgtz") return branch_zero(Op::blt, true);
    if (m == "bgt") return branch(Op::blt, true);
    if (m == "ble") return branch(Op::bge, true);
    if (m == "bgtu") return branch(Op::bltu, true);
    if (m == "bleu") return branch(Op::bgeu, true);
    if (m == "j") return arity(ops, 1), one(make(Op::jal, 0, 0, 0, target(ops[0], pc)));
    if (m == "jr") {
      arity(ops, 1);
      if (auto mm = try_mem(ops[0])) return one(make(Op::jalr, 0, mm->base, 0, mm->off));
      return one(make(Op::jalr, 0, xr(0), 0, 0));
    }
    if (m == "ret") return arity(ops, 0), one(make(Op::jalr, 0, 1, 0, 0));
    if (m == "csrr") return arity(ops, 2), csr_op(Op::csrrs, xr(0), ops[1], 0);
    if (m == "csrw") return arity(ops, 2), csr_op(Op::csrrw, 0, ops[0], xr(1));
    if (m == "csrs") return arity(ops, 2), csr_op(Op::csrrs, 0, ops[0], xr(1));
    if (m == "csrc") return arity(ops, 2), csr_op(Op::csrrc, 0, ops[0], xr(1));
    if (m == "csrwi") return arity(ops, 2), csr_imm(Op::csrrwi, ops[0], ops[1]);
    if (m == "csrsi") return arity(ops, 2), csr_imm(Op::csrrsi, ops[0], ops[1]);
    if (m == "csrci") return arity(ops, 2), csr_imm(Op::csrrci, ops[0], ops[1]);
    if (m == "rdcycle") return arity(ops, 1), csr_op(Op::csrrs, xr(0), "cycle", 0);
    if (m == "rdtime") return arity(ops, 1), csr_op(Op::csrrs, xr(0), "time", 0);
    if (m == "rdinstret") return arity(ops, 1), csr_op(Op::csrrs, xr(0), "instret", 0);
    if (m == "frcsr") return arity(ops, 1), csr_op(Op::csrrs, xr(0), "fcsr", 0);
    if (m == "frrm") return arity(ops, 1), csr_op(Op::csrrs, xr(0), "frm", 0);
    if (m == "frflags") return arity(ops, 1), csr_op(Op::csrrs, xr(0), "fflags", 0);
    for (const auto& [name, c] : {std::pair{"fscsr", "fcsr"}, std::pair{"fsrm", "frm"},
                                  std::pair{"fsflags", "fflags"}}) {
      if (m != name) continue;
      if (ops.size() == 1) return csr_op(Op::csrrw, 0, c, xr(0));
      arity(ops, 2);
      return csr_op(Op::csrrw, xr(0), c, xr(1));
    }
    if (m == "fmv.s") return fp2(Op::fsgnj_s);
    if (m == "fabs.s") return fp2(Op::fsgnjx_s);
    if (m == "fneg.s") return fp2(Op::fsgnjn_s);
    if (m == "fmv.d") return fp2(Op::fsgnj_d);
    if (m == "fabs.d") return fp2(Op::fsgnjx_d);
    if (m == "fneg.d") return fp2(Op::fsgnjn_d);
    if (m == "fmv.x.s") return arity(ops, 2), one(make(Op::fmv_x_w, xr(0), fr(1), 0, 0));
    if (m == "fmv.s.x") return arity(ops, 2), one(make(Op::fmv_w_x, fr(0), xr(1), 0, 0));
    return std::nullopt;
  }

  std::vector<Instruction> expand(const Stmt& st, Addr pc) {
    const std::string& m = st.op;
    if (auto op = rv64::find_op(m)) return {base_insn(*op, st.ops, pc, 0)};
    if (auto c = rv64::find_cop(m)) return {compressed(*c, st.ops, pc)};
    static constexpr std::pair<std::string_view, std::uint8_t> kSuffix[] = {
        {".aqrl", 3}, {".aq", 2}, {".rl", 1}};
    for (const auto& [suffix, bits] : kSuffix) {
      if (m.size() > suffix.size() && m.ends_with(suffix)) {
        const auto op = rv64::find_op(std::string_view(m).substr(0, m.size() - suffix.size()));
        if (op && (rv64::op_info(*op).fmt == Fmt::AMO || rv64::op_info(*op).fmt == Fmt::LR)) {
          return {base_insn(*op, st.ops, pc, bits)};
        }
      }
    }
    if (auto seq = pseudo(m, st.ops, pc)) return *seq;
    fail(fmt::format("unknown mnemonic '{}'", m));
  }

  // ---- directives ------------------------------------------------------

  static unsigned data_width(const std::string& d) {
    if (d == ".byte") return 1;
    if (d == ".half" || d == ".short" || d == ".2byte") return 2;
    if (d == ".word" || d == ".long" || d == ".4byte" || d == ".float") return 4;
    if (d == ".dword" || d == ".quad" || d == ".8byte" || d == ".double") return 8;
    return 0;
  }

  static Addr align_up(Addr a, Addr n) { return (a + n - 1) / n * n; }

  // Size in bytes of the statement placed at `at`, given the section base.
  std::size_t size_of(const Stmt& st, Addr at, Addr sec_base) {
    const std::string& d = st.op;
    if (d.empty()) return 0;
    if (d[0] != '.') {
      std::size_t n = 0;
      for (const Instruction& in : expand(st, at)) n += in.size;
      return n;
    }
    if (const unsigned w = data_width(d)) return w * st.ops.size();
    if (d == ".ascii" || d == ".asciz" || d == ".string") {
      std::size_t n = 0;
      for (const auto& s : st.ops) n += parse_string(s).size() + (d == ".ascii" ? 0 : 1);
      return n;
    }
    if (d == ".zero" || d == ".space" || d == ".skip") {
      if (st.ops.empty() || st.ops.size() > 2) fail(fmt::format("{} expects a size", d));
      const std::int64_t n = eval_const(st.ops[0]);
      if (n < 0) fail("negative size");
      return static_cast<std::size_t>(n);
    }
    if (d == ".align" || d == ".p2align" || d == ".balign") {
      if (st.ops.empty()) fail(fmt::format("{} expects an alignment", d));
      const std::int64_t v = eval_const(st.ops[0]);
      Addr n;
      if (d == ".balign") {
        if (v <= 0 || !std::has_single_bit(static_cast<std::uint64_t>(v))) {
          fail("alignment must be a power of two");
        }
        n = static_cast<Addr>(v);
      } else {
        if (v < 0 || v > 30) fail("alignment out of range");
        n = Addr{1} << v;
      }
      return static_cast<std::size_t>(align_up(at, n) - at);
    }
    if (d == ".org") {
      arity(st.ops, 1);
      const std::int64_t v = eval_const(st.ops[0]);
      const Addr target = sec_base + static_cast<Addr>(v);
      if (v < 0 || target < at) fail(".org moves backwards");
      return static_cast<std::size_t>(target - at);
    }
    fail(fmt::format("unknown directive '{}'", d));
  }

  void layout() {
    Addr text_end = base_;
    for (Section sec : {Section::text, Section::data}) {
      const Addr sec_base = sec == Section::text ? base_ : align_up(text_end, 16);
      if (sec == Section::data) data_base_ = sec_base;
      Addr at = sec_base;
      for (Stmt& st : stmts_) {
        if (st.sec != sec) continue;
        line_ = st.line;
        st.addr = at;
        if (!st.label.empty()) {
          symbols_[st.label] = at;
          continue;
        }
        st.size = size_of(st, at, sec_base);
        at += st.size;
      }
      if (sec == Section::text) text_end = at;
      end_ = at;
    }
    if (end_ == data_base_) end_ = text_end;
  }

  AsmResult emit() {
    AsmResult out;
    out.base = base_;
    out.data_base = data_base_;
    out.image.assign(static_cast<std::size_t>(end_ - base_), 0);
    for (const Stmt& st : stmts_) {
      if (st.op.empty()) continue;
      line_ = st.line;
      std::uint8_t* p = out.image.data() + (st.addr - base_);
      const std::string& d = st.op;
      if (d[0] != '.') {
        Addr pc = st.addr;
        std::size_t n = 0;
        for (const Instruction& in : expand(st, st.addr)) {
          std::uint32_t w;
          try {
            w = rv64::encode(in);
          } catch (const std::invalid_argument& e) {
            fail(e.what());
          }
          for (unsigned b = 0; b < in.size; ++b) p[n + b] = static_cast<std::uint8_t>(w >> (8 * b));
          n += in.size;
          pc += in.size;
        }
        if (n != st.size) fail("internal: instruction size changed between passes");
        continue;
      }
      if (const unsigned w = data_width(d)) {
        for (std::size_t k = 0; k < st.ops.size(); ++k) {
          std::uint64_t v;
          if (d == ".double") {
            v = std::bit_cast<std::uint64_t>(parse_float<double>(st.ops[k]));
          } else if (d == ".float") {
            v = std::bit_cast<std::uint32_t>(parse_float<float>(st.ops[k]));
          } else {
            const std::int64_t s = eval(st.ops[k]);
            if (w < 8) {
              const std::int64_t lo = -(std::int64_t{1} << (8 * w - 1));
              const std::int64_t hi = (std::int64_t{1} << (8 * w)) - 1;
              if (s < lo || s > hi) fail(fmt::format("value {} does not fit in {} bytes", s, w));
            }
            v = static_cast<std::uint64_t>(s);
          }
          for (unsigned b = 0; b < w; ++b) p[k * w + b] = static_cast<std::uint8_t>(v >> (8 * b));
        }
        continue;
      }
      if (d == ".ascii" || d == ".asciz" || d == ".string") {
        std::size_t n = 0;
        for (const auto& s : st.ops) {
          const std::string str = parse_string(s);
          std::memcpy(p + n, str.data(), str.size());
          n += str.size() + (d == ".ascii" ? 0 : 1);
        }
        continue;
      }
      if ((d == ".zero" || d == ".space" || d == ".skip") && st.ops.size() == 2) {
        std::memset(p, static_cast<int>(eval_const(st.ops[1]) & 0xff), st.size);
      }
    }
    out.symbols = symbols_;
    return out;
  }

  template <typename T>
  T parse_float(const std::string& s) {
    const std::string t(trim(s));
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) fail(fmt::format("bad floating-point value '{}'", s));
    return static_cast<T>(v);
  }

  std::string_view src_;
  Addr base_;
  Addr data_base_ = 0;
  Addr end_ = 0;
  int line_ = 0;
  bool resolving_ = false;
  bool const_only_ = false;
  std::vector<Stmt> stmts_;
  std::map<std::string, Addr> symbols_;
  std::map<std::string, std::int64_t> equs_;
};

}  // namespace

AsmResult assemble(std::string_view source, Addr base) { return Assembler(source, base).run(); }

namespace {

void materialize_into(unsigned rd, std::int64_t val, std::vector<Instruction>& out) {
  auto push = [&](Op op, unsigned rs1, std::int64_t imm) {
    Instruction in;
    in.op = op;
    in.rd = static_cast<std::uint8_t>(rd);
    in.rs1 = static_cast<std::uint8_t>(rs1);
    in.imm = imm;
    out.push_back(in);
  };
  if (fits_i32(val)) {
    const std::int64_t hi20 = ((val + 0x800) >> 12) & 0xfffff;
    const std::int64_t lo12 = sext(static_cast<std::uint64_t>(val), 12);
    if (hi20 != 0) push(Op::lui, 0, sext(static_cast<std::uint64_t>(hi20) << 12, 32));
    if (lo12 != 0 || hi20 == 0) push(hi20 != 0 ? Op::addiw : Op::addi, hi20 != 0 ? rd : 0, lo12);
    return;
  }
  const std::int64_t lo12 = sext(static_cast<std::uint64_t>(val), 12);
  std::uint64_t hi52 = (static_cast<std::uint64_t>(val) + 0x800) >> 12;
  const unsigned shift = 12 + static_cast<unsigned>(std::countr_zero(hi52));
  const std::int64_t upper = sext(hi52 >> (shift - 12), 64 - shift);
  materialize_into(rd, upper, out);
  push(Op::slli, rd, shift);
  if (lo12 != 0) push(Op::addi, rd, lo12);
}

}  // namespace

std::vector<Instruction> materialize(unsigned rd, std::int64_t value) {
  std::vector<Instruction> out;
  materialize_into(rd, value, out);
  return out;
}

std::string disassemble(std::span<const std::uint8_t> bytes, Addr base, DisasmOptions opts) {
  std::string out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const Addr pc = base + pos;
    std::string text;
    const std::size_t left = bytes.size() - pos;
    if (left == 1) {
      text = fmt::format(".byte 0x{:02x}", bytes[pos]);
      pos += 1;
    } else {
      const std::uint16_t lo = static_cast<std::uint16_t>(bytes[pos] | (bytes[pos + 1] << 8));
      if (rv64::is_compressed_parcel(lo)) {
        text = rv64::format_instruction(rv64::decode16(lo), pc);
        pos += 2;
      } else if (left < 4) {
        text = fmt::format(".half 0x{:04x}", lo);
        pos += 2;
      } else {
        std::uint32_t w = 0;
        for (unsigned b = 0; b < 4; ++b) w |= std::uint32_t{bytes[pos + b]} << (8 * b);
        text = rv64::format_instruction(rv64::decode32(w), pc);
        pos += 4;
      }
    }
    if (opts.addresses) text = fmt::format("{:<40}# 0x{:x}", text, pc);
    out += text;
    out += '\n';
  }
  return out;
}

std::string symbol_file(const std::map<std::string, Addr>& symbols) {
  std::string out;
  for (const auto& [name, addr] : symbols) out += fmt::format("{} {:016x}\n", name, addr);
  return out;
}

std::map<std::string, Addr> parse_symbol_file(std::string_view text) {
  std::map<std::string, Addr> out;
  std::istringstream in{std::string(text)};
  std::string name, addr;
  while (in >> name >> addr) out[name] = std::stoull(addr, nullptr, 16);
  return out;
}

}  // namespace basilisk::masm
