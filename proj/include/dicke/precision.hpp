// Copyright 2026 The dicke-trajectories Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DICKE__PRECISION_HPP_
#define DICKE__PRECISION_HPP_

#include <charconv>
#include <cmath>
#include <ios>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include <boost/multiprecision/mpfr.hpp>

#include "dicke/errors.hpp"

namespace dicke
{

namespace mp = boost::multiprecision;

/// MPFR float with at least `Bits` mantissa bits, fixed at compile time so
/// every value carries its own precision and is safe to share between threads.
template<unsigned Bits>
using binary_float = mp::number<
  mp::mpfr_float_backend<(Bits * 30103u + 99999u) / 100000u>, mp::et_off>;

using real128 = binary_float<128>;
using real256 = binary_float<256>;
using real512 = binary_float<512>;
using real1024 = binary_float<1024>;
using real2048 = binary_float<2048>;
using real4096 = binary_float<4096>;

template<class Real>
inline constexpr int precision_bits_v = std::numeric_limits<Real>::digits;

/// Nominal precisions the command-line tool can dispatch to at run time.
inline constexpr int kSupportedPrecisionBits[] = {53, 128, 256, 512, 1024, 2048, 4096};

/// Starting working precision for closed-form cascades of `n_emitters`.
///
/// Partial-fraction coefficients of an N-level cascade outgrow the
/// populations by about 23 decimal digits at N = 20, 55 at N = 40, 93 at
/// N = 60, 154 at N = 90 and 290 at N = 150, so the mantissa has to grow
/// with N. Callers escalate with `next_precision_bits` on PrecisionError.
inline int default_precision_bits(unsigned n_emitters)
{
  if (n_emitters <= 20) {return 128;}
  if (n_emitters <= 40) {return 256;}
  if (n_emitters <= 75) {return 512;}
  if (n_emitters <= 160) {return 1024;}
  if (n_emitters <= 280) {return 2048;}
  return 4096;
}

/// Next supported precision above `bits`, or 0 at the top.
inline int next_precision_bits(int bits)
{
  for (int b : kSupportedPrecisionBits) {
    if (b > bits) {return b;}
  }
  return 0;
}

/// Calls `fn.template operator()<Real>()` with the floating type of `bits`.
template<class Fn>
decltype(auto) dispatch_precision(int bits, Fn && fn)
{
  switch (bits) {
    case 53:
      return std::forward<Fn>(fn).template operator()<double>();
    case 128:
      return std::forward<Fn>(fn).template operator()<real128>();
    case 256:
      return std::forward<Fn>(fn).template operator()<real256>();
    case 512:
      return std::forward<Fn>(fn).template operator()<real512>();
    case 1024:
      return std::forward<Fn>(fn).template operator()<real1024>();
    case 2048:
      return std::forward<Fn>(fn).template operator()<real2048>();
    case 4096:
      return std::forward<Fn>(fn).template operator()<real4096>();
    default:
      throw ValidationError(
              "unsupported precision " + std::to_string(bits) +
              " bits (choose 53, 128, 256, 512, 1024, 2048 or 4096)");
  }
}

/// Runs `fn` at `start_bits`, moving up one precision tier after each
/// PrecisionError until `fn` succeeds or the top tier also fails.
/// `on_escalate(from, to)` is called before each retry.
template<class Fn, class OnEscalate>
decltype(auto) with_escalating_precision(int start_bits, Fn && fn, OnEscalate && on_escalate)
{
  int bits = start_bits;
  while (true) {
    try {
      return dispatch_precision(bits, fn);
    } catch (const PrecisionError &) {
      const int next = next_precision_bits(bits);
      if (next == 0) {
        throw;
      }
      on_escalate(bits, next);
      bits = next;
    }
  }
}

/// Round-trippable decimal text for `value`.
template<class Real>
std::string to_decimal_string(const Real & value)
{
  if constexpr (std::is_floating_point_v<Real>) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
  } else {
    return value.str(std::numeric_limits<Real>::max_digits10, std::ios_base::scientific);
  }
}

template<class Real>
Real from_decimal_string(std::string_view text)
{
  if constexpr (std::is_floating_point_v<Real>) {
    Real out{};
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw ValidationError("malformed decimal '" + std::string(text) + "'");
    }
    return out;
  } else {
    try {
      return Real(std::string(text));
    } catch (const std::runtime_error &) {
      throw ValidationError("malformed decimal '" + std::string(text) + "'");
    }
  }
}

template<class Real>
double to_double(const Real & value)
{
  if constexpr (std::is_floating_point_v<Real>) {
    return static_cast<double>(value);
  } else {
    return value.template convert_to<double>();
  }
}

/// n! in the working precision (exact while it fits the mantissa).
template<class Real>
Real factorial(unsigned n)
{
  Real out = 1;
  for (unsigned i = 2; i <= n; ++i) {
    out *= i;
  }
  return out;
}

template<class Real>
Real binomial(unsigned n, unsigned k)
{
  if (k > n) {return Real(0);}
  k = std::min(k, n - k);
  Real out = 1;
  for (unsigned i = 1; i <= k; ++i) {
    out *= n - k + i;
    out /= i;
  }
  return out;
}

}  // namespace dicke

#endif  // DICKE__PRECISION_HPP_
