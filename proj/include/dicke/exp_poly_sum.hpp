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

#ifndef DICKE__EXP_POLY_SUM_HPP_
#define DICKE__EXP_POLY_SUM_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "dicke/errors.hpp"
#include "dicke/precision.hpp"
#include "dicke/rate_value.hpp"

namespace dicke
{

/// One basis function coeff * t^power * exp(-rate * t).
///
/// `magnitude` is the running sum of absolute values of every contribution
/// merged into `coeff`; it bounds the rounding noise carried by the
/// coefficient (noise <= eps * magnitude to first order).
template<class Real>
struct ExpTerm
{
  Real coeff{0};
  unsigned power = 0;
  RateValue rate;
  Real magnitude{0};
};

/// Finite sum of polynomial-times-exponential terms.
///
/// Terms are kept sorted by (rate, power) with no duplicate keys. All rates
/// are non-negative. The value is immutable under the free-function algebra
/// below; the in-place operators exist for accumulation loops.
template<class Real>
class ExpPolySum
{
public:
  using term_type = ExpTerm<Real>;

  ExpPolySum() = default;

  static ExpPolySum exponential(const RateValue & rate, const Real & coeff = Real(1),
    unsigned power = 0)
  {
    ExpPolySum out;
    out.add_term(coeff, power, rate);
    return out;
  }

  static ExpPolySum constant(const Real & value)
  {
    return exponential(RateValue(0), value);
  }

  static constexpr int precision_bits() {return precision_bits_v<Real>;}

  static Real epsilon() {return std::numeric_limits<Real>::epsilon();}

  const std::vector<term_type> & terms() const noexcept {return terms_;}
  std::size_t size() const noexcept {return terms_.size();}
  bool empty() const noexcept {return terms_.empty();}

  /// Sup-norm bound of everything pruned so far.
  double dropped_budget() const noexcept {return dropped_;}

  /// L1 bound of everything pruned so far.
  double dropped_l1() const noexcept {return dropped_l1_;}

  /// Adds coeff * t^power * exp(-rate t), merging with an existing term.
  void add_term(const Real & coeff, unsigned power, const RateValue & rate)
  {
    using std::abs;
    add_term(coeff, power, rate, abs(coeff));
  }

  void add_term(const Real & coeff, unsigned power, const RateValue & rate,
    const Real & magnitude)
  {
    if (rate.is_negative()) {
      throw ValidationError("ExpPolySum: negative rate " + rate.str());
    }
    auto key = std::make_pair(rate, power);
    auto it = std::lower_bound(
      terms_.begin(), terms_.end(), key,
      [](const term_type & t, const std::pair<RateValue, unsigned> & k) {
        return std::tie(t.rate, t.power) < std::tie(k.first, k.second);
      });
    if (it != terms_.end() && it->rate == rate && it->power == power) {
      it->coeff += coeff;
      it->magnitude += magnitude;
    } else {
      terms_.insert(it, term_type{coeff, power, rate, magnitude});
    }
  }

  ExpPolySum & operator+=(const ExpPolySum & other)
  {
    if (terms_.empty()) {
      terms_ = other.terms_;
    } else {
      std::vector<term_type> merged;
      merged.reserve(terms_.size() + other.terms_.size());
      auto a = terms_.begin();
      auto b = other.terms_.begin();
      auto less = [](const term_type & x, const term_type & y) {
          return std::tie(x.rate, x.power) < std::tie(y.rate, y.power);
        };
      while (a != terms_.end() || b != other.terms_.end()) {
        if (b == other.terms_.end() || (a != terms_.end() && less(*a, *b))) {
          merged.push_back(std::move(*a++));
        } else if (a == terms_.end() || less(*b, *a)) {
          merged.push_back(*b++);
        } else {
          term_type t = std::move(*a++);
          t.coeff += b->coeff;
          t.magnitude += b->magnitude;
          ++b;
          merged.push_back(std::move(t));
        }
      }
      terms_ = std::move(merged);
    }
    dropped_ += other.dropped_;
    dropped_l1_ += other.dropped_l1_;
    prune();
    return *this;
  }

  ExpPolySum & operator*=(const Real & factor)
  {
    using std::abs;
    Real mag = abs(factor);
    for (auto & t : terms_) {
      t.coeff *= factor;
      t.magnitude *= mag;
    }
    dropped_ *= to_double(mag);
    dropped_l1_ *= to_double(mag);
    return *this;
  }

  friend ExpPolySum operator+(ExpPolySum a, const ExpPolySum & b) {return a += b;}
  friend ExpPolySum operator-(ExpPolySum a, const ExpPolySum & b)
  {
    ExpPolySum neg = b;
    neg *= Real(-1);
    return a += neg;
  }
  friend ExpPolySum operator*(ExpPolySum a, const Real & f) {return a *= f;}
  friend ExpPolySum operator*(const Real & f, ExpPolySum a) {return a *= f;}

  /// Coefficient of the (power 0, rate 0) term: the t -> infinity limit of a
  /// sum whose other terms all decay.
  Real constant_term() const
  {
    for (const auto & t : terms_) {
      if (t.rate.is_zero() && t.power == 0) {
        return t.coeff;
      }
    }
    return Real(0);
  }

  Real coefficient(const RateValue & rate, unsigned power) const
  {
    for (const auto & t : terms_) {
      if (t.rate == rate && t.power == power) {
        return t.coeff;
      }
    }
    return Real(0);
  }

  /// Largest power attached to any rate (multiplicity of the worst pole - 1).
  unsigned max_power() const noexcept
  {
    unsigned out = 0;
    for (const auto & t : terms_) {
      out = std::max(out, t.power);
    }
    return out;
  }

  /// Sup over [0, t_max] of the first-order rounding noise of the sum.
  double rounding_bound(double t_max = std::numeric_limits<double>::infinity()) const
  {
    // accumulated in working precision: eps underflows double above ~1000 bits
    Real total = 0;
    for (const auto & t : terms_) {
      if (t.magnitude == 0) {
        continue;
      }
      total += t.magnitude * Real(basis_sup(t.power, t.rate.to_double(), t_max));
    }
    return to_double(Real(kRoundingSafety * epsilon() * total));
  }

  /// Rounding noise plus pruned mass: a sup-norm accuracy estimate.
  double error_bound(double t_max = std::numeric_limits<double>::infinity()) const
  {
    return rounding_bound(t_max) + dropped_;
  }

  /// L1 norm bound over [0, infinity) (infinite if a constant term is present).
  double l1_bound() const
  {
    double total = 0.0;
    for (const auto & t : terms_) {
      double c = std::abs(to_double(t.coeff));
      if (c == 0.0) {
        continue;
      }
      if (t.rate.is_zero()) {
        return std::numeric_limits<double>::infinity();
      }
      double lambda = t.rate.to_double();
      total += c * std::tgamma(t.power + 1.0) / std::pow(lambda, t.power + 1.0);
    }
    return total;
  }

  /// Sup-norm bound over [0, infinity) (infinite for a growing term).
  double sup_bound() const
  {
    double total = 0.0;
    for (const auto & t : terms_) {
      double c = std::abs(to_double(t.coeff));
      if (c != 0.0) {
        total += c * basis_sup(t.power, t.rate.to_double(),
            std::numeric_limits<double>::infinity());
      }
    }
    return total;
  }

  void add_dropped(double sup, double l1)
  {
    dropped_ += sup;
    dropped_l1_ += l1;
  }

  /// max over t >= 0 (or t <= t_max) of t^k exp(-lambda t).
  static double basis_sup(unsigned power, double lambda, double t_max)
  {
    if (power == 0) {
      return 1.0;
    }
    double t_star = lambda > 0.0 ? power / lambda : std::numeric_limits<double>::infinity();
    double t = std::min(t_star, t_max);
    if (!std::isfinite(t)) {
      return std::numeric_limits<double>::infinity();
    }
    return std::exp(power * std::log(t) - lambda * t);
  }

private:
  // Heuristic multiplier on the first-order estimate for the handful of
  // chained operations each coefficient goes through.
  static constexpr double kRoundingSafety = 4.0;

  // Terms whose coefficient is below their own rounding noise carry no
  // information; they are removed and their sup-norm charged to dropped_.
  void prune()
  {
    const Real eps = epsilon();
    auto keep = std::remove_if(
      terms_.begin(), terms_.end(), [&](const term_type & t) {
        using std::abs;
        if (abs(t.coeff) > eps * t.magnitude) {
          return false;
        }
        if (t.coeff != 0) {
          double c = to_double(abs(t.coeff));
          dropped_ += c *
          basis_sup(t.power, t.rate.to_double(), std::numeric_limits<double>::infinity());
          dropped_l1_ += t.rate.is_zero() ? std::numeric_limits<double>::infinity() :
          c * std::tgamma(t.power + 1.0) / std::pow(t.rate.to_double(), t.power + 1.0);
        }
        return true;
      });
    terms_.erase(keep, terms_.end());
  }

  template<class R>
  friend ExpPolySum<R> convolve(const ExpPolySum<R> &, const ExpPolySum<R> &);

  std::vector<term_type> terms_;
  double dropped_ = 0.0;
  double dropped_l1_ = 0.0;
};

namespace detail
{

// (c1 t^k e^{-F t}) * (c2 t^j e^{-K t}) via partial fractions of
// k! j! / ((s+F)^{k+1} (s+K)^{j+1}); handles any multiplicity.
template<class Real>
void convolve_terms(const ExpTerm<Real> & x, const ExpTerm<Real> & y, ExpPolySum<Real> & out)
{
  using std::abs;
  const unsigned k = x.power;
  const unsigned j = y.power;
  const Real kj = factorial<Real>(k) * factorial<Real>(j);
  const Real c = x.coeff * y.coeff * kj;
  const Real mag = x.magnitude * y.magnitude * kj;

  if (x.rate == y.rate) {
    Real f = Real(1) / factorial<Real>(k + j + 1);
    out.add_term(c * f, k + j + 1, x.rate, mag * f);
    return;
  }

  const unsigned a = k + 1;
  const unsigned b = j + 1;
  const Real delta = (y.rate - x.rate).template to<Real>();
  const Real inv_delta = Real(1) / delta;

  // inv_pow[n] = delta^{-n}
  std::vector<Real> inv_pow(a + b);
  inv_pow[0] = 1;
  for (unsigned n = 1; n < a + b; ++n) {
    inv_pow[n] = inv_pow[n - 1] * inv_delta;
  }

  for (unsigned i = 1; i <= a; ++i) {
    // coefficient of (s+F)^{-i}: (-1)^{a-i} C(a+b-i-1, a-i) / delta^{a+b-i}
    Real coef = binomial<Real>(a + b - i - 1, a - i) * inv_pow[a + b - i] /
      factorial<Real>(i - 1);
    if ((a - i) % 2 == 1) {
      coef = -coef;
    }
    out.add_term(c * coef, i - 1, x.rate, mag * abs(coef));
  }
  for (unsigned i = 1; i <= b; ++i) {
    // coefficient of (s+K)^{-i}: (-1)^{b-i} C(a+b-i-1, b-i) / (-delta)^{a+b-i}
    Real coef = binomial<Real>(a + b - i - 1, b - i) * inv_pow[a + b - i] /
      factorial<Real>(i - 1);
    if (((b - i) + (a + b - i)) % 2 == 1) {
      coef = -coef;
    }
    out.add_term(c * coef, i - 1, y.rate, mag * abs(coef));
  }
}

}  // namespace detail

/// Exact convolution (a * b)(t) = int_0^t a(t - tau) b(tau) dtau.
template<class Real>
ExpPolySum<Real> convolve(const ExpPolySum<Real> & a, const ExpPolySum<Real> & b)
{
  ExpPolySum<Real> out;
  for (const auto & x : a.terms()) {
    for (const auto & y : b.terms()) {
      detail::convolve_terms(x, y, out);
    }
  }
  // Young's inequality on each pruned remainder: sup <= min(sup*L1, L1*sup),
  // L1 <= L1*L1.
  auto remainder = [&](const ExpPolySum<Real> & pruned, const ExpPolySum<Real> & other) {
      if (pruned.dropped_budget() == 0.0 && pruned.dropped_l1() == 0.0) {
        return;
      }
      double other_l1 = other.l1_bound();
      double other_sup = other.sup_bound();
      double sup = std::min(pruned.dropped_budget() * other_l1, pruned.dropped_l1() * other_sup);
      out.add_dropped(sup, pruned.dropped_l1() * other_l1);
    };
  remainder(a, b);
  remainder(b, a);
  out.prune();
  return out;
}

/// As `convolve`, but throws PrecisionError when the result's accuracy
/// estimate exceeds `abs_tol`.
template<class Real>
ExpPolySum<Real> convolve(const ExpPolySum<Real> & a, const ExpPolySum<Real> & b,
  double abs_tol)
{
  auto out = convolve(a, b);
  double bound = out.error_bound();
  if (!(bound <= abs_tol)) {
    throw PrecisionError(
            "convolution accuracy " + std::to_string(bound) + " exceeds tolerance " +
            std::to_string(abs_tol) + " at " +
            std::to_string(ExpPolySum<Real>::precision_bits()) + " bits",
            bound, ExpPolySum<Real>::precision_bits());
  }
  return out;
}

/// Sum of c t^k e^{-lambda t}, accumulated smallest-magnitude first with
/// Neumaier compensation.
template<class Real>
Real evaluate(const ExpPolySum<Real> & s, const Real & t)
{
  using std::abs;
  using std::exp;
  using std::pow;
  if (t < 0) {
    throw ValidationError("evaluate: negative time");
  }
  std::vector<Real> values;
  values.reserve(s.size());
  for (const auto & term : s.terms()) {
    Real basis = term.rate.is_zero() ? Real(1) : Real(exp(-term.rate.template to<Real>() * t));
    if (term.power > 0) {
      basis *= pow(t, term.power);
    }
    values.push_back(term.coeff * basis);
  }
  std::sort(
    values.begin(), values.end(), [](const Real & x, const Real & y) {
      return abs(x) < abs(y);
    });
  Real sum = 0;
  Real comp = 0;
  for (const auto & v : values) {
    Real next = sum + v;
    if (abs(sum) >= abs(v)) {
      comp += (sum - next) + v;
    } else {
      comp += (v - next) + sum;
    }
    sum = next;
  }
  return sum + comp;
}

template<class Real>
requires (!std::is_same_v<Real, double>)
Real evaluate(const ExpPolySum<Real> & s, double t)
{
  return evaluate(s, Real(t));
}

/// Term-wise d/dt.
template<class Real>
ExpPolySum<Real> derivative(const ExpPolySum<Real> & s)
{
  using std::abs;
  ExpPolySum<Real> out;
  for (const auto & term : s.terms()) {
    if (term.power > 0) {
      out.add_term(term.coeff * term.power, term.power - 1, term.rate,
        term.magnitude * term.power);
    }
    if (!term.rate.is_zero()) {
      Real lambda = term.rate.template to<Real>();
      out.add_term(-term.coeff * lambda, term.power, term.rate, term.magnitude * lambda);
    }
  }
  // the derivative of a pruned remainder is not controlled by its sup norm
  if (s.dropped_budget() > 0.0) {
    out.add_dropped(std::numeric_limits<double>::infinity(), s.dropped_l1());
  }
  return out;
}

/// int_0^infinity s(t) dt = sum c k! / lambda^{k+1}.
template<class Real>
Real integral_to_infinity(const ExpPolySum<Real> & s)
{
  Real total = 0;
  for (const auto & term : s.terms()) {
    if (term.coeff == 0) {
      continue;
    }
    if (term.rate.is_zero()) {
      throw DivergenceError("integral_to_infinity: non-decaying term with power " +
              std::to_string(term.power));
    }
    Real lambda = term.rate.template to<Real>();
    Real denom = lambda;
    for (unsigned i = 0; i < term.power; ++i) {
      denom *= lambda;
    }
    total += term.coeff * factorial<Real>(term.power) / denom;
  }
  return total;
}

/// JSON array of {coeff, power, rate_num, rate_den}; coeff is a decimal
/// string carrying the full working precision.
template<class Real>
nlohmann::json to_json(const ExpPolySum<Real> & s)
{
  nlohmann::json out = nlohmann::json::array();
  for (const auto & t : s.terms()) {
    out.push_back(
      {
        {"coeff", to_decimal_string(t.coeff)},
        {"power", t.power},
        {"rate_num", t.rate.numerator()},
        {"rate_den", t.rate.denominator()},
      });
  }
  return out;
}

template<class Real>
ExpPolySum<Real> exp_poly_sum_from_json(const nlohmann::json & doc)
{
  if (!doc.is_array()) {
    throw ValidationError("ExpPolySum JSON must be an array");
  }
  ExpPolySum<Real> out;
  try {
    for (const auto & item : doc) {
      out.add_term(
        from_decimal_string<Real>(item.at("coeff").get<std::string>()),
        item.at("power").get<unsigned>(),
        RateValue(item.at("rate_num").get<std::int64_t>(),
        item.at("rate_den").get<std::int64_t>()));
    }
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError(std::string("malformed ExpPolySum JSON: ") + e.what());
  }
  return out;
}

}  // namespace dicke

#endif  // DICKE__EXP_POLY_SUM_HPP_
