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

#ifndef DICKE__RATE_VALUE_HPP_
#define DICKE__RATE_VALUE_HPP_

#include <charconv>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>

#include "dicke/errors.hpp"

namespace dicke
{

/// Exact rational multiple of the global rate unit Gamma.
///
/// Every decay rate in the cascade is an integer combination of the channel
/// rates, so keeping them as reduced fractions makes degeneracy detection an
/// exact comparison. Arithmetic is carried out in 128-bit intermediates and
/// throws on overflow of the 64-bit storage.
class RateValue
{
public:
  constexpr RateValue() = default;

  constexpr RateValue(std::int64_t numerator)  // NOLINT(runtime/explicit)
  : num_(numerator), den_(1) {}

  RateValue(std::int64_t numerator, std::int64_t denominator)
  {
    if (denominator == 0) {
      throw ValidationError("RateValue: zero denominator");
    }
    assign(static_cast<__int128>(numerator), static_cast<__int128>(denominator));
  }

  /// Parses "3", "-0.25", "1/8", "2.5e-3" exactly.
  static RateValue from_decimal(std::string_view text)
  {
    auto fail = [&]() -> RateValue {
        throw ValidationError("cannot parse rate '" + std::string(text) + "'");
      };
    if (text.empty()) {
      return fail();
    }
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      auto num = from_decimal(text.substr(0, slash));
      auto den = from_decimal(text.substr(slash + 1));
      if (den.is_zero()) {
        return fail();
      }
      return num / den;
    }

    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
      negative = text[pos] == '-';
      ++pos;
    }
    __int128 mantissa = 0;
    int scale = 0;
    bool any_digit = false;
    bool after_point = false;
    constexpr __int128 kMantissaLimit = static_cast<__int128>(1) << 100;
    for (; pos < text.size(); ++pos) {
      char c = text[pos];
      if (c == '.') {
        if (after_point) {
          return fail();
        }
        after_point = true;
        continue;
      }
      if (c < '0' || c > '9') {
        break;
      }
      any_digit = true;
      mantissa = mantissa * 10 + (c - '0');
      if (mantissa > kMantissaLimit) {
        throw ValidationError("rate '" + std::string(text) + "' has too many digits");
      }
      if (after_point) {
        --scale;
      }
    }
    if (!any_digit) {
      return fail();
    }
    if (pos < text.size()) {
      if (text[pos] != 'e' && text[pos] != 'E') {
        return fail();
      }
      ++pos;
      if (pos < text.size() && text[pos] == '+') {
        ++pos;
      }
      int exponent = 0;
      auto rest = text.substr(pos);
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), exponent);
      if (ec != std::errc() || ptr != rest.data() + rest.size()) {
        return fail();
      }
      scale += exponent;
    }

    __int128 num = negative ? -mantissa : mantissa;
    __int128 den = 1;
    for (; scale > 0; --scale) {
      num = checked_mul(num, 10);
    }
    for (; scale < 0; ++scale) {
      den = checked_mul(den, 10);
    }
    RateValue out;
    out.assign(num, den);
    return out;
  }

  /// Exact rational of the shortest decimal that round-trips `value`, so
  /// that 0.2 becomes 1/5 rather than a dyadic fraction.
  static RateValue from_double(double value)
  {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
      throw ValidationError("cannot convert rate to decimal");
    }
    return from_decimal(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
  }

  constexpr std::int64_t numerator() const noexcept {return num_;}
  constexpr std::int64_t denominator() const noexcept {return den_;}
  constexpr bool is_zero() const noexcept {return num_ == 0;}
  constexpr bool is_positive() const noexcept {return num_ > 0;}
  constexpr bool is_negative() const noexcept {return num_ < 0;}

  template<class Real>
  Real to() const
  {
    return Real(num_) / Real(den_);
  }

  double to_double() const noexcept
  {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  std::string str() const
  {
    return den_ == 1 ? std::to_string(num_) :
           std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend RateValue operator+(const RateValue & a, const RateValue & b)
  {
    RateValue out;
    out.assign(
      checked_add(checked_mul(a.num_, b.den_), checked_mul(b.num_, a.den_)),
      checked_mul(a.den_, b.den_));
    return out;
  }

  friend RateValue operator-(const RateValue & a, const RateValue & b)
  {
    return a + (-b);
  }

  friend RateValue operator*(const RateValue & a, const RateValue & b)
  {
    RateValue out;
    out.assign(checked_mul(a.num_, b.num_), checked_mul(a.den_, b.den_));
    return out;
  }

  friend RateValue operator/(const RateValue & a, const RateValue & b)
  {
    if (b.is_zero()) {
      throw ValidationError("RateValue: division by zero");
    }
    RateValue out;
    out.assign(checked_mul(a.num_, b.den_), checked_mul(a.den_, b.num_));
    return out;
  }

  RateValue operator-() const
  {
    RateValue out;
    out.assign(-static_cast<__int128>(num_), den_);
    return out;
  }

  RateValue & operator+=(const RateValue & o) {return *this = *this + o;}
  RateValue & operator*=(const RateValue & o) {return *this = *this * o;}

  friend constexpr bool operator==(const RateValue &, const RateValue &) = default;

  friend std::strong_ordering operator<=>(const RateValue & a, const RateValue & b)
  {
    __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    return lhs <=> rhs;
  }

  friend std::ostream & operator<<(std::ostream & os, const RateValue & r)
  {
    return os << r.str();
  }

private:
  static __int128 checked_mul(__int128 a, __int128 b)
  {
    __int128 out;
    if (__builtin_mul_overflow(a, b, &out)) {
      throw ValidationError("RateValue: arithmetic overflow");
    }
    return out;
  }

  static __int128 checked_add(__int128 a, __int128 b)
  {
    __int128 out;
    if (__builtin_add_overflow(a, b, &out)) {
      throw ValidationError("RateValue: arithmetic overflow");
    }
    return out;
  }

  static __int128 gcd128(__int128 a, __int128 b)
  {
    if (a < 0) {a = -a;}
    if (b < 0) {b = -b;}
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  void assign(__int128 num, __int128 den)
  {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    if (num == 0) {
      num_ = 0;
      den_ = 1;
      return;
    }
    __int128 g = gcd128(num, den);
    num /= g;
    den /= g;
    constexpr __int128 kMax = std::numeric_limits<std::int64_t>::max();
    if (num > kMax || num < -kMax || den > kMax) {
      throw ValidationError("RateValue: value does not fit in 64-bit fraction");
    }
    num_ = static_cast<std::int64_t>(num);
    den_ = static_cast<std::int64_t>(den);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace dicke

#endif  // DICKE__RATE_VALUE_HPP_
