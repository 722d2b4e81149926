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

#ifndef DICKE__ODE_HPP_
#define DICKE__ODE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dicke/errors.hpp"

namespace dicke
{

struct OdeOptions
{
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  /// First trial step; 0 picks one from the initial derivative.
  double initial_step = 0.0;
  std::size_t max_steps = 50'000'000;
};

struct OdeStats
{
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  /// Largest normalized local error estimate among accepted steps.
  double max_error_ratio = 0.0;
};

/// Dormand-Prince 5(4) with embedded error control, stepping exactly onto
/// every requested output time.
///
/// `rhs(t, y, dydt)` must fill `dydt`. `observe(k, t, y)` is called for each
/// output time `t_out[k]` (ascending, t_out[0] >= t0).
template<class Vector, class Rhs, class Observer>
OdeStats integrate_dopri5(
  Rhs && rhs, double t0, Vector y, const std::vector<double> & t_out, Observer && observe,
  const OdeOptions & opts = {})
{
  using std::abs;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
    a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
    a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
    b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
    e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!(opts.rel_tol > 0.0) || !(opts.abs_tol >= 0.0)) {
    throw ValidationError("ode: tolerances must be positive");
  }
  for (std::size_t k = 0; k < t_out.size(); ++k) {
    if (t_out[k] < t0 || (k > 0 && t_out[k] < t_out[k - 1])) {
      throw ValidationError("ode: output times must be ascending and not before t0");
    }
  }

  OdeStats stats;
  const auto n = y.size();
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);
  double t = t0;
  rhs(t, y, k1);

  auto error_norm = [&](const Vector & e, const Vector & ya, const Vector & yb) {
      double worst = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double scale = opts.abs_tol + opts.rel_tol * std::max(abs(ya[i]), abs(yb[i]));
        worst = std::max(worst, static_cast<double>(abs(e[i])) / scale);
      }
      return worst;
    };

  double h = opts.initial_step;
  if (!(h > 0.0)) {
    double dnorm = 0.0;
    double ynorm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      dnorm = std::max(dnorm, static_cast<double>(abs(k1[i])));
      ynorm = std::max(ynorm, static_cast<double>(abs(y[i])));
    }
    h = dnorm > 0.0 ? 0.01 * std::max(ynorm, 1e-6) / dnorm : 1e-3;
    if (!t_out.empty() && t_out.back() > t0) {
      h = std::min(h, t_out.back() - t0);
    }
  }

  std::size_t next = 0;
  while (next < t_out.size() && t_out[next] <= t) {
    observe(next, t_out[next], y);
    ++next;
  }

  while (next < t_out.size()) {
    const double target = t_out[next];
    const double h_natural = h;
    bool last = false;
    if (t + h >= target) {
      h = target - t;
      last = true;
    }
    if (stats.accepted + stats.rejected >= opts.max_steps) {
      throw IntegratorError("ode: step budget exhausted at t = " + std::to_string(t),
              stats.max_error_ratio);
    }

    tmp = y + h * (a21 * k1);
    rhs(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, tmp, k6);
    y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, y_new, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double ratio = error_norm(err, y, y_new);
    if (!std::isfinite(ratio)) {
      throw IntegratorError("ode: non-finite state at t = " + std::to_string(t), ratio);
    }
    if (ratio <= 1.0) {
      t = last ? target : t + h;
      y.swap(y_new);
      k1.swap(k7);
      ++stats.accepted;
      stats.max_error_ratio = std::max(stats.max_error_ratio, ratio);
      while (next < t_out.size() && t_out[next] <= t) {
        observe(next, t_out[next], y);
        ++next;
      }
    } else {
      ++stats.rejected;
    }
    const double factor = ratio == 0.0 ? 5.0 :
      std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
    if (last && ratio <= 1.0) {
      // a step clipped onto an output time says little about the natural size
      h = std::max(h * factor, h_natural);
    } else {
      h *= factor;
    }
    const double floor = 1e-14 * std::max(std::fabs(t), 1e-300);
    if (h < floor) {
      throw IntegratorError("ode: step size underflow at t = " + std::to_string(t), ratio);
    }
  }
  return stats;
}

}  // namespace dicke

#endif  // DICKE__ODE_HPP_
