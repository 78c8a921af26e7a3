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

// Host IEEE-754 arithmetic under an explicit rounding mode. This unit is
// built with -frounding-math -ffp-contract=off so that every operation is
// evaluated at run time in the mode installed by run_op().

#include "basilisk/rv64/fpu.hpp"

#include <bit>
#include <cfenv>
#include <cmath>
#include <limits>

namespace basilisk::rv64::fpu {

namespace {

template <typename T>
struct Traits;

template <>
struct Traits<double> {
  using Bits = std::uint64_t;
  using Wide = long double;
  static constexpr Bits kCanonical = kCanonicalNanD;
  static constexpr Bits kQuietBit = 0x0008000000000000ull;
  static constexpr int kMaxExp = 1024;
};

template <>
struct Traits<float> {
  using Bits = std::uint32_t;
  using Wide = double;
  static constexpr Bits kCanonical = kCanonicalNanS;
  static constexpr Bits kQuietBit = 0x00400000u;
  static constexpr int kMaxExp = 128;
};

int host_mode(Rm rm) {
  switch (rm) {
    case rtz: return FE_TOWARDZERO;
    case rdn: return FE_DOWNWARD;
    case rup: return FE_UPWARD;
    default: return FE_TONEAREST;
  }
}

std::uint8_t host_flags(int ex) {
  std::uint8_t f = 0;
  if (ex & FE_INEXACT) f |= NX;
  if (ex & FE_UNDERFLOW) f |= UF;
  if (ex & FE_OVERFLOW) f |= OF;
  if (ex & FE_DIVBYZERO) f |= DZ;
  if (ex & FE_INVALID) f |= NV;
  return f;
}

template <typename T, typename F>
T run_op(Rm rm, std::uint8_t& flags, F&& f) {
  const int old = std::fegetround();
  std::fesetround(host_mode(rm));
  std::feclearexcept(FE_ALL_EXCEPT);
  const T r = f();
  flags = host_flags(std::fetestexcept(FE_ALL_EXCEPT));
  std::fesetround(old);
  return r;
}

/// Round-to-nearest-max-magnitude from a round-to-nearest-even result: the
/// two differ only on exact ties, detected by recomputing the operation in a
/// wider format.
template <typename T, typename WideOp>
T rmm_fix(T r, std::uint8_t& flags, WideOp&& wide) {
  using W = typename Traits<T>::Wide;
  if ((flags & NX) == 0 || std::isnan(r) || std::isinf(r)) return r;
  std::uint8_t wflags = 0;
  const W w = run_op<W>(rne, wflags, wide);
  if (wflags & NX) return r;
  const W rw = r;
  const T other = rw > w ? std::nextafter(r, -std::numeric_limits<T>::infinity())
                         : std::nextafter(r, std::numeric_limits<T>::infinity());
  const W ow = std::isinf(other) ? std::copysign(std::ldexp(W{1}, Traits<T>::kMaxExp), W{other})
                                 : W{other};
  if (w != (rw + ow) / 2) return r;
  if (std::fabs(ow) > std::fabs(rw)) {
    if (std::isinf(other)) flags |= OF;
    return other;
  }
  return r;
}

template <typename T>
T from_bits(typename Traits<T>::Bits b) {
  return std::bit_cast<T>(b);
}

template <typename T>
typename Traits<T>::Bits to_bits(T v) {
  if (std::isnan(v)) return Traits<T>::kCanonical;
  return std::bit_cast<typename Traits<T>::Bits>(v);
}

template <typename T>
bool is_snan(typename Traits<T>::Bits b) {
  return std::isnan(from_bits<T>(b)) && (b & Traits<T>::kQuietBit) == 0;
}

template <typename T, typename Op, typename WideOp>
Result arith(Rm rm, Op&& op, WideOp&& wide) {
  Result res;
  T r = run_op<T>(rm, res.flags, op);
  if (rm == rmm) r = rmm_fix<T>(r, res.flags, wide);
  res.bits = to_bits<T>(r);
  return res;
}

template <typename T>
Result add(typename Traits<T>::Bits a, typename Traits<T>::Bits b, Rm rm, bool negate_b) {
  using W = typename Traits<T>::Wide;
  volatile T x = from_bits<T>(a);
  volatile T y = negate_b ? -from_bits<T>(b) : from_bits<T>(b);
  return arith<T>(rm, [&] { return T(x + y); }, [&] { return W(W(x) + W(y)); });
}

template <typename T>
Result mul(typename Traits<T>::Bits a, typename Traits<T>::Bits b, Rm rm) {
  using W = typename Traits<T>::Wide;
  volatile T x = from_bits<T>(a);
  volatile T y = from_bits<T>(b);
  return arith<T>(rm, [&] { return T(x * y); }, [&] { return W(W(x) * W(y)); });
}

template <typename T>
Result div(typename Traits<T>::Bits a, typename Traits<T>::Bits b, Rm rm) {
  using W = typename Traits<T>::Wide;
  volatile T x = from_bits<T>(a);
  volatile T y = from_bits<T>(b);
  return arith<T>(rm, [&] { return T(x / y); }, [&] { return W(W(x) / W(y)); });
}

template <typename T>
Result sqrt(typename Traits<T>::Bits a, Rm rm) {
  using W = typename Traits<T>::Wide;
  volatile T x = from_bits<T>(a);
  return arith<T>(rm, [&] { return T(std::sqrt(T(x))); }, [&] { return W(std::sqrt(W(x))); });
}

template <typename T>
Result fma(typename Traits<T>::Bits a, typename Traits<T>::Bits b, typename Traits<T>::Bits c,
           bool neg_prod, bool neg_add, Rm rm) {
  using W = typename Traits<T>::Wide;
  volatile T x = neg_prod ? -from_bits<T>(a) : from_bits<T>(a);
  volatile T y = from_bits<T>(b);
  volatile T z = neg_add ? -from_bits<T>(c) : from_bits<T>(c);
  return arith<T>(
      rm, [&] { return T(std::fma(T(x), T(y), T(z))); },
      [&] { return W(std::fma(W(x), W(y), W(z))); });
}

template <typename T>
Result minmax(typename Traits<T>::Bits a, typename Traits<T>::Bits b, bool want_max) {
  Result res;
  if (is_snan<T>(a) || is_snan<T>(b)) res.flags |= NV;
  const T x = from_bits<T>(a);
  const T y = from_bits<T>(b);
  if (std::isnan(x) && std::isnan(y)) {
    res.bits = Traits<T>::kCanonical;
  } else if (std::isnan(x)) {
    res.bits = b;
  } else if (std::isnan(y)) {
    res.bits = a;
  } else if (x == y) {
    // Equal values differ only for signed zeros: -0 < +0 here.
    const bool a_neg = std::signbit(x);
    res.bits = (want_max ? !a_neg : a_neg) ? a : b;
  } else {
    res.bits = ((x < y) != want_max) ? a : b;
  }
  return res;
}

template <typename T>
Result compare(typename Traits<T>::Bits a, typename Traits<T>::Bits b, int kind) {
  Result res;
  const T x = from_bits<T>(a);
  const T y = from_bits<T>(b);
  const bool any_nan = std::isnan(x) || std::isnan(y);
  if (kind == 0) {
    if (is_snan<T>(a) || is_snan<T>(b)) res.flags |= NV;
    res.bits = (!any_nan && x == y) ? 1 : 0;
  } else {
    if (any_nan) res.flags |= NV;
    res.bits = (!any_nan && (kind == 1 ? x < y : x <= y)) ? 1 : 0;
  }
  return res;
}

template <typename T>
std::uint64_t classify(typename Traits<T>::Bits a) {
  const T x = from_bits<T>(a);
  const bool neg = std::signbit(x);
  switch (std::fpclassify(x)) {
    case FP_INFINITE: return neg ? 1u << 0 : 1u << 7;
    case FP_NORMAL: return neg ? 1u << 1 : 1u << 6;
    case FP_SUBNORMAL: return neg ? 1u << 2 : 1u << 5;
    case FP_ZERO: return neg ? 1u << 3 : 1u << 4;
    default: return is_snan<T>(a) ? 1u << 8 : 1u << 9;
  }
}

Result to_int(double x, bool is_nan, bool is_signed, unsigned width, Rm rm) {
  Result res;
  const long double lo =
      is_signed ? -std::ldexp(1.0L, static_cast<int>(width) - 1) : 0.0L;
  const long double hi = is_signed ? std::ldexp(1.0L, static_cast<int>(width) - 1) - 1
                                   : std::ldexp(1.0L, static_cast<int>(width)) - 1;
  auto saturate = [&](bool high) {
    std::uint64_t v;
    if (is_signed) {
      v = high ? (width == 32 ? 0x7fffffffull : 0x7fffffffffffffffull)
               : (width == 32 ? 0xffffffff80000000ull : 0x8000000000000000ull);
    } else {
      v = high ? ~std::uint64_t{0} : 0;
    }
    return v;
  };
  if (is_nan) {
    res.bits = saturate(true);
    res.flags = NV;
    return res;
  }
  double r;
  switch (rm) {
    case rtz: r = std::trunc(x); break;
    case rdn: r = std::floor(x); break;
    case rup: r = std::ceil(x); break;
    case rmm: r = std::round(x); break;
    default: {
      std::uint8_t ignored = 0;
      volatile double v = x;
      r = run_op<double>(rne, ignored, [&] { return std::nearbyint(double(v)); });
      break;
    }
  }
  const long double rl = r;
  if (rl < lo || rl > hi) {
    res.bits = saturate(rl > 0);
    res.flags = NV;
    return res;
  }
  std::uint64_t v;
  if (is_signed) {
    v = static_cast<std::uint64_t>(static_cast<std::int64_t>(r));
  } else {
    v = static_cast<std::uint64_t>(r);
  }
  if (width == 32) v = static_cast<std::uint64_t>(static_cast<std::int64_t>(static_cast<std::int32_t>(v)));
  res.bits = v;
  if (r != x) res.flags = NX;
  return res;
}

template <typename T>
Result from_int(std::uint64_t v, bool is_signed, unsigned width, Rm rm) {
  using W = typename Traits<T>::Wide;
  if (width == 32) {
    v = is_signed ? static_cast<std::uint64_t>(static_cast<std::int64_t>(static_cast<std::int32_t>(v)))
                  : (v & 0xffffffffull);
  }
  if (is_signed) {
    volatile std::int64_t s = static_cast<std::int64_t>(v);
    return arith<T>(rm, [&] { return T(s); }, [&] { return W(s); });
  }
  volatile std::uint64_t u = v;
  return arith<T>(rm, [&] { return T(u); }, [&] { return W(u); });
}

}  // namespace

Result add_d(std::uint64_t a, std::uint64_t b, Rm rm) { return add<double>(a, b, rm, false); }
Result sub_d(std::uint64_t a, std::uint64_t b, Rm rm) { return add<double>(a, b, rm, true); }
Result mul_d(std::uint64_t a, std::uint64_t b, Rm rm) { return mul<double>(a, b, rm); }
Result div_d(std::uint64_t a, std::uint64_t b, Rm rm) { return div<double>(a, b, rm); }
Result sqrt_d(std::uint64_t a, Rm rm) { return sqrt<double>(a, rm); }
Result fma_d(std::uint64_t a, std::uint64_t b, std::uint64_t c, bool neg_prod, bool neg_add,
             Rm rm) {
  return fma<double>(a, b, c, neg_prod, neg_add, rm);
}

Result add_s(std::uint32_t a, std::uint32_t b, Rm rm) { return add<float>(a, b, rm, false); }
Result sub_s(std::uint32_t a, std::uint32_t b, Rm rm) { return add<float>(a, b, rm, true); }
Result mul_s(std::uint32_t a, std::uint32_t b, Rm rm) { return mul<float>(a, b, rm); }
Result div_s(std::uint32_t a, std::uint32_t b, Rm rm) { return div<float>(a, b, rm); }
Result sqrt_s(std::uint32_t a, Rm rm) { return sqrt<float>(a, rm); }
Result fma_s(std::uint32_t a, std::uint32_t b, std::uint32_t c, bool neg_prod, bool neg_add,
             Rm rm) {
  return fma<float>(a, b, c, neg_prod, neg_add, rm);
}

Result min_d(std::uint64_t a, std::uint64_t b) { return minmax<double>(a, b, false); }
Result max_d(std::uint64_t a, std::uint64_t b) { return minmax<double>(a, b, true); }
Result min_s(std::uint32_t a, std::uint32_t b) { return minmax<float>(a, b, false); }
Result max_s(std::uint32_t a, std::uint32_t b) { return minmax<float>(a, b, true); }

Result eq_d(std::uint64_t a, std::uint64_t b) { return compare<double>(a, b, 0); }
Result lt_d(std::uint64_t a, std::uint64_t b) { return compare<double>(a, b, 1); }
Result le_d(std::uint64_t a, std::uint64_t b) { return compare<double>(a, b, 2); }
Result eq_s(std::uint32_t a, std::uint32_t b) { return compare<float>(a, b, 0); }
Result lt_s(std::uint32_t a, std::uint32_t b) { return compare<float>(a, b, 1); }
Result le_s(std::uint32_t a, std::uint32_t b) { return compare<float>(a, b, 2); }

std::uint64_t classify_d(std::uint64_t a) { return classify<double>(a); }
std::uint64_t classify_s(std::uint32_t a) { return classify<float>(a); }

Result cvt_s_d(std::uint64_t a, Rm rm) {
  volatile double x = from_bits<double>(a);
  return arith<float>(rm, [&] { return float(x); }, [&] { return double(x); });
}

Result cvt_d_s(std::uint32_t a) {
  Result res;
  volatile float x = from_bits<float>(a);
  const double r = run_op<double>(rne, res.flags, [&] { return double(x); });
  res.bits = to_bits<double>(r);
  return res;
}

Result d_to_int(std::uint64_t a, bool is_signed, unsigned width, Rm rm) {
  const double x = from_bits<double>(a);
  return to_int(x, std::isnan(x), is_signed, width, rm);
}

Result s_to_int(std::uint32_t a, bool is_signed, unsigned width, Rm rm) {
  const float x = from_bits<float>(a);
  return to_int(std::isnan(x) ? 0.0 : double(x), std::isnan(x), is_signed, width, rm);
}

Result int_to_d(std::uint64_t v, bool is_signed, unsigned width, Rm rm) {
  return from_int<double>(v, is_signed, width, rm);
}

Result int_to_s(std::uint64_t v, bool is_signed, unsigned width, Rm rm) {
  return from_int<float>(v, is_signed, width, rm);
}

bool is_snan_d(std::uint64_t a) { return is_snan<double>(a); }
bool is_snan_s(std::uint32_t a) { return is_snan<float>(a); }

}  // namespace basilisk::rv64::fpu
