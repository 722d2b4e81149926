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

#ifndef DICKE__CHECK__VERIFY_SUITE_HPP_
#define DICKE__CHECK__VERIFY_SUITE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "dicke/cavity.hpp"
#include "dicke/check/path_enumeration.hpp"
#include "dicke/errors.hpp"
#include "dicke/meanfield.hpp"
#include "dicke/precision.hpp"
#include "dicke/rate_equations.hpp"
#include "dicke/steady_state.hpp"
#include "dicke/stochastic.hpp"
#include "dicke/system.hpp"
#include "dicke/trajectory_solver.hpp"

namespace dicke::check
{

struct CheckResult
{
  std::string name;
  std::string metric;
  double value;
  /// "<=" or ">=".
  std::string relation;
  double threshold;

  bool passed() const
  {
    if (std::isnan(value)) {
      return false;
    }
    return relation == "<=" ? value <= threshold : value >= threshold;
  }
};

struct VerifyOptions
{
  /// Only cross-checks at N <= 10.
  bool quick = true;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Called after every check, in order.
  std::function<void(const CheckResult &)> on_result;
};

/// Rate sets used by the dynamics cross-checks for d = 1, 2, 3.
inline std::vector<std::pair<std::string, SystemSpec>> dynamics_cases(unsigned n)
{
  return {
    {"d1", SystemSpec(n, {RateValue(1)})},
    {"d2-balanced", SystemSpec::balanced(n, 2)},
    {"d2-r2", SystemSpec(n, {RateValue(1), RateValue(2)})},
    {"d3-balanced", SystemSpec::balanced(n, 3)},
    {"d3-r125", SystemSpec(n, {RateValue(1), RateValue(2), RateValue(5)})},
  };
}

/// 100-point grid on [0, 6 ln(N + 1) / (N Gamma_min)], long enough for the
/// cascade to finish.
inline std::vector<double> dynamics_grid(const SystemSpec & spec, std::size_t points = 100)
{
  const double n = spec.n_emitters();
  const double t_max = 6.0 * std::log(n + 1.0) / (n * spec.min_rate().to_double());
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = t_max * double(i) / double(points - 1);
  }
  return grid;
}

/// max over grid and states of |closed form - rate-equation integration|.
template<class Real>
double closed_form_vs_ode(const SystemSpec & spec, const std::vector<double> & grid)
{
  auto table = solve<Real>(spec);
  RateEquationSystem system(spec);
  auto ode = integrate(system, grid);
  const auto & lattice = system.lattice();
  double worst = 0.0;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    auto s = lattice.state(i);
    auto p = table.population(OccupationState(spec, {s.begin(), s.end()}));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double exact = to_double(evaluate(p, grid[k]));
      worst = std::max(worst, std::fabs(exact - ode(static_cast<Eigen::Index>(k),
        static_cast<Eigen::Index>(i))));
    }
  }
  return worst;
}

/// |integral of I_tot - N| / N.
template<class Real>
double photon_budget_error(const SystemSpec & spec)
{
  auto table = solve<Real>(spec);
  const Real total = integral_to_infinity(intensity(table));
  const double n = spec.n_emitters();
  return std::fabs(to_double(total) - n) / n;
}

/// max over every lattice state with at most `max_paths` orderings and
/// over `grid` of |lattice program - explicit path sum|.
template<class Real>
double lattice_vs_path_sum(
  const SystemSpec & spec, const std::vector<double> & grid, std::uint64_t max_paths = 10'000)
{
  auto table = spec.n_channels() == 1 ? solve_single_channel<Real>(spec) :
    solve_multichannel<Real>(spec);
  const auto & lattice = table.lattice();
  double worst = 0.0;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    auto s = lattice.state(i);
    std::vector<unsigned> target(s.begin(), s.end());
    if (path_count(target) > max_paths) {
      continue;
    }
    auto reference = path_sum_population<Real>(spec, target, max_paths);
    for (double t : grid) {
      worst = std::max(
        worst, std::fabs(to_double(evaluate(table.entry(i), t) - evaluate(reference, t))));
    }
  }
  return worst;
}

/// max_x |closed-form steady state - long-time rate-equation limit|.
inline double steady_state_vs_ode(unsigned n, const RateValue & ratio)
{
  auto exact = steady_state_two_channel(n, ratio);
  auto limit = steady_state_by_integration(SystemSpec::two_channel(n, ratio));
  double worst = 0.0;
  for (std::size_t j = 0; j < limit.states.size(); ++j) {
    const unsigned x = limit.states[j][1];
    worst = std::max(worst, std::fabs(limit.probabilities[j] - exact.probabilities[x]));
  }
  return worst;
}

/// Chi-square p-value of the final configurations of `batch` against the
/// exact two-channel steady state (cells with expectation below 5 pooled).
inline double final_state_p_value(const TrajectoryBatch & batch, const RateValue & ratio)
{
  const unsigned n = batch.spec.n_emitters();
  auto exact = steady_state_two_channel(n, ratio);
  const double m = static_cast<double>(batch.n_trajectories);
  double stat = 0.0;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  int cells = 0;
  for (unsigned x = 0; x <= n; ++x) {
    auto it = batch.final_histogram.find({n - x, x});
    const double observed = it == batch.final_histogram.end() ? 0.0 : double(it->second);
    const double expected = m * exact.probabilities[x];
    if (expected < 5.0) {
      pooled_obs += observed;
      pooled_exp += expected;
      continue;
    }
    stat += (observed - expected) * (observed - expected) / expected;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  if (cells < 2) {
    return 1.0;
  }
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Coefficient of determination of the least-squares line y(x).
inline double r_squared(const std::vector<double> & x, const std::vector<double> & y)
{
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
}

/// The cross-validation matrix. Every value is a deterministic function of
/// the options, so two runs with the same seed give identical results.
inline std::vector<CheckResult> run_verify(const VerifyOptions & opts)
{
  std::vector<CheckResult> out;
  auto record = [&](std::string name, std::string metric, double value, std::string relation,
      double threshold) {
      out.push_back(CheckResult{std::move(name), std::move(metric), value, std::move(relation),
          threshold});
      if (opts.on_result) {
        opts.on_result(out.back());
      }
    };

  // closed form against the rate equations, and photon conservation
  for (unsigned n : {2u, 5u, 10u}) {
    for (const auto & [label, spec] : dynamics_cases(n)) {
      const std::string tag = "N" + std::to_string(n) + "-" + label;
      record("dynamics-vs-ode/" + tag, "max_abs", closed_form_vs_ode<real128>(
          spec, dynamics_grid(spec)), "<=", 1e-6);
      record("photon-count/" + tag, "rel_err", photon_budget_error<real128>(spec), "<=", 1e-6);
    }
  }

  // lattice program against literal path enumeration
  {
    std::vector<std::pair<std::string, SystemSpec>> cases = {
      {"N4-d2-r2", SystemSpec(4, {RateValue(1), RateValue(2)})},
      {"N5-d3-r125", SystemSpec(5, {RateValue(1), RateValue(2), RateValue(5)})},
      {"N4-d3-balanced", SystemSpec::balanced(4, 3)},
    };
    if (!opts.quick) {
      cases.emplace_back("N8-d2-r3", SystemSpec(8, {RateValue(1), RateValue(3)}));
      cases.emplace_back("N6-d4-r1235",
        SystemSpec(6, {RateValue(1), RateValue(2), RateValue(3), RateValue(5)}));
    }
    for (const auto & [label, spec] : cases) {
      record("lattice-vs-paths/" + label, "max_abs",
        lattice_vs_path_sum<real128>(spec, dynamics_grid(spec, 25)), "<=", 1e-10);
    }
  }

  // steady state
  {
    const unsigned n = opts.quick ? 10 : 20;
    for (const char * r : {"1/2", "1", "2"}) {
      record("steady-vs-ode/N" + std::to_string(n) + "-r" + r, "max_abs",
        steady_state_vs_ode(n, RateValue::from_decimal(r)), "<=", 1e-8);
    }
    auto flat = steady_state_two_channel(n, RateValue(1));
    double dev = 0.0;
    for (double p : flat.probabilities) {
      dev = std::max(dev, std::fabs(p - 1.0 / (n + 1.0)));
    }
    record("steady-flat/N" + std::to_string(n), "max_abs", dev, "<=", 1e-9);

    auto general = steady_state_general<real128>(SystemSpec::two_channel(n, RateValue(3)));
    auto closed = steady_state_two_channel(n, RateValue(3));
    double diff = 0.0;
    for (std::size_t j = 0; j < general.states.size(); ++j) {
      diff = std::max(diff, std::fabs(general.probabilities[j] -
        closed.probabilities[general.states[j][1]]));
    }
    record("steady-general-vs-closed/N" + std::to_string(n) + "-r3", "max_abs", diff, "<=", 1e-9);
  }

  // Monte Carlo final states
  {
    auto spec = SystemSpec::two_channel(3, RateValue(2));
    BatchOptions b;
    b.n_trajectories = opts.quick ? 100'000 : 1'000'000;
    b.seed = opts.seed;
    b.threads = opts.threads;
    b.bins = TimeBins::default_for(spec, 20);
    auto batch = simulate_batch(spec, b);
    record("mc-final-states/N3-r2", "chi2_p_value", final_state_p_value(batch, RateValue(2)),
      ">=", 1e-3);

    auto spec10 = SystemSpec::two_channel(10, RateValue(2));
    b.n_trajectories = 20'000;
    b.seed = mix_seed(opts.seed);
    b.bins = TimeBins::default_for(spec10, 20);
    auto batch10 = simulate_batch(spec10, b);
    auto [mean, se] = batch10.mean_fraction(1);
    const double exact = order_parameter(10, RateValue(2)).n_bar_2;
    record("mc-order-parameter/N10-r2", "z_score", std::fabs(mean - exact) / se, "<=", 3.0);
  }

  // mean field
  {
    auto st = solve_stopping_time(1000, 1.0, 4.0);
    record("stopping-time-residual/N1000-r4", "rel_residual", st.relative_residual, "<=", 1e-12);
    auto eq = solve_stopping_time(1000, 1.0, 1.0);
    record("stopping-time-balanced/N1000", "abs_err",
      std::fabs(eq.tau_star - std::log(1002.0 / 2.0)), "<=", 1e-12);
    if (!opts.quick) {
      const double exact = order_parameter(500, RateValue::from_decimal("1.5")).n_bar_2;
      record("order-parameter-asymptotic/N500-r1.5", "abs_diff",
        std::fabs(exact - order_parameter_asymptotic(500, 1.5)), "<=", 0.05);
    }
  }

  // cavity elimination
  {
    CavityModel model;
    model.n_emitters = opts.quick ? 2 : 5;
    model.fock_cutoff = opts.quick ? 6 : 10;
    model.g = 1.0;
    if (opts.quick) {
      model.kappa = 100.0;
      auto cmp = compare_with_dicke(model, 3.0, 101);
      record("cavity-vs-dicke/N2-kappa100", "rel_linf", cmp.relative_deviation, "<=", 0.05);
      record("cavity-trace/N2-kappa100", "max_abs", cmp.max_trace_error, "<=", 1e-8);
    } else {
      auto sweep = convergence_sweep(model, {1.0, 3.0, 10.0, 30.0, 100.0});
      double worst_step = -1e300;
      for (std::size_t i = 1; i < sweep.size(); ++i) {
        worst_step = std::max(worst_step, sweep[i].linf_deviation - sweep[i - 1].linf_deviation);
      }
      record("cavity-monotone/N5", "max_increase", worst_step, "<=", 0.0);
      record("cavity-vs-dicke/N5-kappa100", "rel_linf", sweep.back().relative_deviation, "<=",
        0.05);
    }
  }

  if (!opts.quick) {
    for (unsigned d : {1u, 2u, 4u, 8u}) {
      auto spec = SystemSpec::balanced(150, d);
      auto peak = with_escalating_precision(
        default_precision_bits(150), [&]<class Real>() {
          return find_peak(intensity(solve<Real>(spec)), spec);
        }, [](int, int) {});
      // per-channel rate 1/d, so Gamma = 1 in the prediction's units
      auto pred = balanced_scaling_prediction(150, d);
      const std::string tag = "N150-d" + std::to_string(d);
      record("scaling-peak-intensity/" + tag, "rel_err",
        std::fabs(peak.value - pred.peak_intensity) / pred.peak_intensity, "<=", 0.10);
      record("scaling-peak-time/" + tag, "rel_err",
        std::fabs(peak.time - pred.peak_time) / pred.peak_time, "<=", 0.10);
    }
    std::vector<double> logs, chis;
    for (unsigned n : {50u, 100u, 200u, 400u, 800u}) {
      logs.push_back(std::log(double(n)));
      chis.push_back(order_parameter(n, RateValue(1)).susceptibility);
    }
    record("susceptibility-log-growth", "r_squared", r_squared(logs, chis), ">=", 0.99);
  }
  return out;
}

}  // namespace dicke::check

#endif  // DICKE__CHECK__VERIFY_SUITE_HPP_
