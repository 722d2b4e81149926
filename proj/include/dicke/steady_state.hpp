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

#ifndef DICKE__STEADY_STATE_HPP_
#define DICKE__STEADY_STATE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/precision.hpp"
#include "dicke/rate_value.hpp"
#include "dicke/system.hpp"
#include "dicke/trajectory_solver.hpp"

namespace dicke
{

/// Probabilities of the ground configurations sum(n) = N reached at t -> inf.
///
/// `states[i]` lists the occupations (n_1, ..., n_d). For two channels the
/// order is x = n_2 = 0, 1, ..., N.
struct SteadyStateDistribution
{
  SystemSpec system;
  std::vector<std::vector<unsigned>> states;
  std::vector<double> probabilities;

  double total() const
  {
    double s = 0.0;
    for (double p : probabilities) {
      s += p;
    }
    return s;
  }
};

struct OrderParameterPoint
{
  unsigned n_emitters;
  double ratio;
  double n_bar_2;
  double susceptibility;
};

namespace detail
{

/// log(exp(a) + exp(b)) without overflow.
template<class Real>
Real log_add(const Real & a, const Real & b)
{
  using std::exp;
  using std::isinf;
  using std::log1p;
  if (isinf(a) && a < 0) {return b;}
  if (isinf(b) && b < 0) {return a;}
  return a > b ? a + log1p(exp(b - a)) : b + log1p(exp(a - b));
}

/// p_{N-x,x} for x = 0..N with Gamma_2 / Gamma_1 = r.
///
/// The nested sum over 1 <= L_1 < ... < L_x <= N is the last row of the
/// recursion S_j(L) = f_j(L) sum_{L' < L} S_{j-1}(L'), with
/// f_j(L) = G(L + (j+1) r - (j-1)) / G(L + j r - (j-2)). Rows span far more
/// than the exponent range at large N, so they are kept as logarithms and
/// the prefix sums use log-add; every term is positive.
template<class Real>
std::vector<Real> two_channel_steady_state(unsigned n, const Real & r)
{
  using std::exp;
  using std::lgamma;
  using std::log;
  using std::log1p;
  if (n < 1) {
    throw ValidationError("steady state: need at least one emitter");
  }
  if (!(r > 0)) {
    throw ValidationError("steady state: rate ratio must be positive");
  }
  const Real minus_inf = -std::numeric_limits<Real>::infinity();

  std::vector<Real> out(n + 1);
  // x = 0: N! G(1 + r) / G(N + 1 + r)
  const Real lg_base = lgamma(Real(1) + r);
  out[0] = exp(lgamma(Real(n + 1)) + lg_base - lgamma(Real(n) + 1 + r));

  // row[L] = log S_j(L); row 0 is S_0 = 1 at L = 0.
  std::vector<Real> row(n + 1, minus_inf);
  std::vector<Real> next(n + 1, minus_inf);
  row[0] = 0;
  for (unsigned j = 1; j <= n; ++j) {
    const Real a = Real(j + 1) * r - Real(j) + 1;
    const Real b = Real(j) * r - Real(j) + 2;
    // log f_j(L+1) - log f_j(L) = log(1 + (a - b) / (L + b))
    Real log_f = lgamma(Real(j) + a) - lgamma(Real(j) + b);
    Real prefix = minus_inf;
    Real z = minus_inf;
    std::fill(next.begin(), next.end(), minus_inf);
    for (unsigned l = j; l <= n; ++l) {
      prefix = log_add(prefix, row[l - 1]);
      if (l > j) {
        log_f += log1p((a - b) / (Real(l - 1) + b));
      }
      next[l] = log_f + prefix;
      z = log_add(z, next[l]);
    }
    std::swap(row, next);

    const unsigned x = j;
    const Real log_pref =
      lgamma(Real(n - x + 1)) + lgamma(Real(x + 1)) + Real(x) * log(r) + lg_base -
      lgamma(Real(n - x + 1) + Real(x + 1) * r);
    out[x] = exp(log_pref + z);
  }
  return out;
}

template<class Real>
Real mean_fraction(const std::vector<Real> & p)
{
  const unsigned n = static_cast<unsigned>(p.size() - 1);
  Real s = 0;
  for (unsigned x = 1; x <= n; ++x) {
    s += Real(x) * p[x];
  }
  return s / Real(n);
}

inline void require_normalized(double total, const std::string & what)
{
  if (!(std::fabs(total - 1.0) <= 1e-9)) {
    throw NumericalError(what + ": probabilities sum to " + std::to_string(total));
  }
}

}  // namespace detail

/// Closed-form two-channel steady state for Gamma_2 / Gamma_1 = r.
template<class Real = long double>
SteadyStateDistribution steady_state_two_channel(unsigned n_emitters, const RateValue & ratio)
{
  auto spec = SystemSpec::two_channel(n_emitters, ratio);
  auto p = detail::two_channel_steady_state<Real>(n_emitters, ratio.template to<Real>());
  SteadyStateDistribution out{spec, {}, {}};
  for (unsigned x = 0; x <= n_emitters; ++x) {
    out.states.push_back({n_emitters - x, x});
    out.probabilities.push_back(to_double(p[x]));
  }
  detail::require_normalized(out.total(), "steady_state_two_channel");
  return out;
}

/// p_{N-1,1} = (N-1)! G(1+r) / G(N+2r) [G(N+1+2r)/G(N+1+r) - G(1+2r)/G(1+r)],
/// the telescoped x = 1 row of the nested sum.
template<class Real = long double>
Real first_excited_steady_state(unsigned n_emitters, const RateValue & ratio)
{
  using std::exp;
  using std::lgamma;
  if (n_emitters < 1) {
    throw ValidationError("steady state: need at least one emitter");
  }
  const Real r = ratio.template to<Real>();
  const Real n = n_emitters;
  const Real pref = exp(lgamma(n) + lgamma(1 + r) - lgamma(n + 2 * r));
  return pref * (exp(lgamma(n + 1 + 2 * r) - lgamma(n + 1 + r)) -
         exp(lgamma(1 + 2 * r) - lgamma(1 + r)));
}

/// Steady state of any channel set as the constant term of each ground-state
/// population of the closed-form solution.
template<class Real>
SteadyStateDistribution steady_state_general(const SystemSpec & spec, const SolverOptions & opts = {})
{
  auto table = solve<Real>(spec, opts);
  SteadyStateDistribution out{spec, {}, {}};
  const unsigned n = spec.n_emitters();
  const std::size_t d = spec.n_channels();
  if (table.is_level_uniform()) {
    Lattice lattice(spec, opts.lattice_cap);
    auto [begin, end] = lattice.level(n);
    const Real share = table.level_population(0).constant_term() /
      binomial<Real>(n + static_cast<unsigned>(d) - 1, static_cast<unsigned>(d) - 1);
    for (std::size_t i = begin; i < end; ++i) {
      auto s = lattice.state(i);
      out.states.emplace_back(s.begin(), s.end());
      out.probabilities.push_back(to_double(share));
    }
  } else {
    const auto & lattice = table.lattice();
    auto [begin, end] = lattice.level(n);
    for (std::size_t i = begin; i < end; ++i) {
      auto s = lattice.state(i);
      out.states.emplace_back(s.begin(), s.end());
      out.probabilities.push_back(to_double(table.entry(i).constant_term()));
    }
  }
  detail::require_normalized(out.total(), "steady_state_general");
  return out;
}

/// Order parameter n_bar_2 = (1/N) sum_x x p_{N-x,x} and its slope in r by a
/// central difference with step `rel_step * r`.
template<class Real = long double>
OrderParameterPoint order_parameter(
  unsigned n_emitters, const RateValue & ratio, double rel_step = 1e-4)
{
  if (!(rel_step > 0.0 && rel_step < 1.0)) {
    throw ValidationError("order_parameter: relative step must lie in (0, 1)");
  }
  const Real r = ratio.template to<Real>();
  const Real h = Real(rel_step) * r;
  auto nbar = [&](const Real & rr) {
      return detail::mean_fraction(detail::two_channel_steady_state<Real>(n_emitters, rr));
    };
  const Real centre = nbar(r);
  const Real slope = (nbar(r + h) - nbar(r - h)) / (2 * h);
  return OrderParameterPoint{n_emitters, to_double(r), to_double(centre), to_double(slope)};
}

/// n_bar_2 for N emitters decaying independently: r / (1 + r).
inline double independent_order_parameter(double ratio)
{
  return ratio / (1.0 + ratio);
}

}  // namespace dicke

#endif  // DICKE__STEADY_STATE_HPP_
