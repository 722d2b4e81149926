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

#ifndef DICKE__MEANFIELD_HPP_
#define DICKE__MEANFIELD_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/rate_value.hpp"
#include "dicke/steady_state.hpp"
#include "dicke/system.hpp"

namespace dicke
{

/// Mean-field operational time at which both Yule processes together hold
/// all N emitters: e^{Gamma_1 tau} + e^{Gamma_2 tau} = N + 2.
struct StoppingTime
{
  double tau_star;
  unsigned n_emitters;
  double gamma_1;
  double gamma_2;
  /// |e^{G1 tau} + e^{G2 tau} - (N + 2)| / (N + 2)
  double relative_residual;
};

inline StoppingTime solve_stopping_time(unsigned n_emitters, double gamma_1, double gamma_2)
{
  if (!(gamma_1 > 0.0 && gamma_2 > 0.0) || !std::isfinite(gamma_1) || !std::isfinite(gamma_2)) {
    throw ValidationError("solve_stopping_time: rates must be positive and finite");
  }
  const double target = static_cast<double>(n_emitters) + 2.0;
  auto residual = [&](double tau) {
      return std::exp(gamma_1 * tau) + std::exp(gamma_2 * tau) - target;
    };
  if (n_emitters == 0) {
    return StoppingTime{0.0, 0, gamma_1, gamma_2, 0.0};
  }

  // The residual is convex and increasing, and tau_0 lies right of the root,
  // so Newton decreases monotonically onto it.
  double tau = std::log(target) / std::max(gamma_1, gamma_2);
  for (int it = 0; it < 200; ++it) {
    const double f = residual(tau);
    const double fp = gamma_1 * std::exp(gamma_1 * tau) + gamma_2 * std::exp(gamma_2 * tau);
    const double step = f / fp;
    tau -= step;
    if (std::fabs(step) <= 1e-15 * std::max(tau, 1e-300)) {
      const double rel = std::fabs(residual(tau)) / target;
      if (rel < 1e-12) {
        return StoppingTime{tau, n_emitters, gamma_1, gamma_2, rel};
      }
    }
  }
  const double rel = std::fabs(residual(tau)) / target;
  if (rel < 1e-12) {
    return StoppingTime{tau, n_emitters, gamma_1, gamma_2, rel};
  }
  throw NumericalError("solve_stopping_time: Newton iteration did not converge (residual " +
          std::to_string(rel) + ")");
}

/// Mean occupation of a Yule process with rate Gamma after operational time tau.
inline double yule_mean(double tau, double gamma)
{
  if (tau < 0.0) {
    throw ValidationError("yule_mean: operational time must be non-negative");
  }
  return std::expm1(gamma * tau);
}

/// Geometric approximation of the two-channel steady state,
///   p_{n_1,n_2} ~ (1 - e^{-Gamma_1 tau*})^{n_1 - 1} (1 - e^{-Gamma_2 tau*})^{n_2 - 1},
/// with Gamma_1 = 1, Gamma_2 = r.
///
/// The shape is fixed by anchoring p_{N,0} at its exact value; with
/// `renormalize` the vector is then rescaled to unit sum.
inline SteadyStateDistribution asymptotic_distribution(
  unsigned n_emitters, const RateValue & ratio, bool renormalize = true)
{
  if (n_emitters < 2) {
    throw ValidationError("asymptotic_distribution: need N >= 2");
  }
  const double r = ratio.to_double();
  const auto stop = solve_stopping_time(n_emitters, 1.0, r);
  const double log_q1 = std::log(-std::expm1(-stop.tau_star));
  const double log_q2 = std::log(-std::expm1(-r * stop.tau_star));
  const double n = n_emitters;
  const double log_anchor =
    std::lgamma(n + 1.0) + std::lgamma(1.0 + r) - std::lgamma(1.0 + r + n);

  SteadyStateDistribution out{SystemSpec::two_channel(n_emitters, ratio), {}, {}};
  // log p_x - log p_0 = x (log q2 - log q1)
  std::vector<double> logs(n_emitters + 1);
  for (unsigned x = 0; x <= n_emitters; ++x) {
    logs[x] = log_anchor + static_cast<double>(x) * (log_q2 - log_q1);
    out.states.push_back({n_emitters - x, x});
  }
  double shift = 0.0;
  if (renormalize) {
    const double top = *std::max_element(logs.begin(), logs.end());
    double sum = 0.0;
    for (double l : logs) {
      sum += std::exp(l - top);
    }
    shift = -(top + std::log(sum));
  }
  for (double l : logs) {
    out.probabilities.push_back(std::exp(l + shift));
  }
  return out;
}

/// Large-N case formulas for n_bar_2(N, r):
/// N^{r-1} for r < 1, 1/2 at r = 1, 1 - N^{1/r - 1} for r > 1.
inline double order_parameter_asymptotic(unsigned n_emitters, double r)
{
  if (n_emitters < 2 || !(r > 0.0)) {
    throw ValidationError("order_parameter_asymptotic: need N >= 2 and r > 0");
  }
  const double n = n_emitters;
  if (r < 1.0) {
    return std::pow(n, r - 1.0);
  }
  if (r > 1.0) {
    return 1.0 - std::pow(n, 1.0 / r - 1.0);
  }
  return 0.5;
}

/// chi = ln(N) N^{r-1} for r < 1, ln N at r = 1, (ln N / r^2) N^{1/r - 1} for r > 1.
inline double susceptibility_asymptotic(unsigned n_emitters, double r)
{
  if (n_emitters < 2 || !(r > 0.0)) {
    throw ValidationError("susceptibility_asymptotic: need N >= 2 and r > 0");
  }
  const double n = n_emitters;
  const double ln = std::log(n);
  if (r < 1.0) {
    return ln * std::pow(n, r - 1.0);
  }
  if (r > 1.0) {
    return ln / (r * r) * std::pow(n, 1.0 / r - 1.0);
  }
  return ln;
}

/// beta Delta E = ln[(1 - e^{-Gamma_max tau}) / (1 - e^{-Gamma_min tau})]
/// of the geometric law at tau = tau*.
inline double thermal_ratio(unsigned n_emitters, double gamma_1, double gamma_2)
{
  const auto stop = solve_stopping_time(n_emitters, gamma_1, gamma_2);
  const double gmax = std::max(gamma_1, gamma_2);
  const double gmin = std::min(gamma_1, gamma_2);
  return std::log(-std::expm1(-gmax * stop.tau_star)) -
         std::log(-std::expm1(-gmin * stop.tau_star));
}

}  // namespace dicke

#endif  // DICKE__MEANFIELD_HPP_
