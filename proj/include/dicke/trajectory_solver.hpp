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

#ifndef DICKE__TRAJECTORY_SOLVER_HPP_
#define DICKE__TRAJECTORY_SOLVER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/exp_poly_sum.hpp"
#include "dicke/precision.hpp"
#include "dicke/system.hpp"

namespace dicke
{

struct SolverOptions
{
  /// Refuse lattices with more states than this.
  std::size_t lattice_cap = 2'000'000;
  /// Every population must carry an accuracy estimate below this.
  double abs_tol = 1e-12;
  /// Worker threads for the level-synchronized lattice sweep.
  unsigned threads = 1;
};

/// Selects a single channel or the total in `intensity`.
inline constexpr std::size_t kTotalIntensity = static_cast<std::size_t>(-1);

/// Closed-form populations p_n(t) for every occupation state.
///
/// Two layouts: an explicit table over the occupation lattice, or (for
/// balanced rates) one aggregate level population p_m(t) per excitation
/// number that is shared uniformly by the states of that level.
template<class Real>
class PopulationTable
{
public:
  using signal_type = ExpPolySum<Real>;

  PopulationTable(
    SystemSpec spec, std::shared_ptr<const Lattice> lattice,
    std::vector<signal_type> entries, std::vector<bool> computed)
  : spec_(std::move(spec)), lattice_(std::move(lattice)), entries_(std::move(entries)),
    computed_(std::move(computed)) {}

  /// `levels[m]` is the total population of all states with m excitations.
  static PopulationTable level_uniform(SystemSpec spec, std::vector<signal_type> levels)
  {
    std::vector<bool> computed(levels.size(), true);
    return PopulationTable(std::move(spec), nullptr, std::move(levels), std::move(computed));
  }

  const SystemSpec & spec() const noexcept {return spec_;}
  bool is_level_uniform() const noexcept {return lattice_ == nullptr;}

  bool is_complete() const
  {
    return std::all_of(computed_.begin(), computed_.end(), [](bool b) {return b;});
  }

  /// Number of occupation states represented.
  std::size_t state_count() const
  {
    return lattice_ ? lattice_->size() : lattice_size(spec_.n_emitters(), spec_.n_channels());
  }

  const Lattice & lattice() const
  {
    if (!lattice_) {
      throw ValidationError("PopulationTable: level-uniform table has no explicit lattice");
    }
    return *lattice_;
  }

  /// Entry i of the explicit lattice.
  const signal_type & entry(std::size_t i) const
  {
    const auto & lat = lattice();
    if (i >= lat.size() || !computed_[i]) {
      throw ValidationError("PopulationTable: state " + std::to_string(i) + " not computed");
    }
    return entries_[i];
  }

  bool has_entry(std::size_t i) const
  {
    return lattice_ && i < computed_.size() && computed_[i];
  }

  signal_type population(const OccupationState & state) const
  {
    if (state.n_channels() != spec_.n_channels()) {
      throw ValidationError("PopulationTable: state has wrong channel count");
    }
    if (lattice_) {
      return entry(lattice_->index_of(state.occupations()));
    }
    const unsigned m = state.excitations();
    const unsigned q = spec_.n_emitters() - m;
    auto out = entries_.at(m);
    out *= Real(1) / binomial<Real>(q + static_cast<unsigned>(spec_.n_channels()) - 1,
      static_cast<unsigned>(spec_.n_channels()) - 1);
    return out;
  }

  /// Total population of the states with m excitations.
  signal_type level_population(unsigned m) const
  {
    if (m > spec_.n_emitters()) {
      throw ValidationError("PopulationTable: level above N");
    }
    if (!lattice_) {
      return entries_.at(m);
    }
    signal_type out;
    auto [begin, end] = lattice_->level(spec_.n_emitters() - m);
    for (std::size_t i = begin; i < end; ++i) {
      out += entry(i);
    }
    return out;
  }

  /// Largest accuracy estimate over all stored entries.
  double error_bound() const
  {
    double out = 0.0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (computed_[i]) {
        out = std::max(out, entries_[i].error_bound());
      }
    }
    return out;
  }

private:
  SystemSpec spec_;
  std::shared_ptr<const Lattice> lattice_;
  std::vector<signal_type> entries_;
  std::vector<bool> computed_;
};

namespace detail
{

template<class Real>
void require_accuracy(const ExpPolySum<Real> & s, double abs_tol, const std::string & what)
{
  double bound = s.error_bound();
  if (!(bound <= abs_tol)) {
    throw PrecisionError(
            what + ": accuracy estimate " + std::to_string(bound) + " exceeds " +
            std::to_string(abs_tol) + " at " +
            std::to_string(ExpPolySum<Real>::precision_bits()) +
            " bits; raise the working precision",
            bound, ExpPolySum<Real>::precision_bits());
  }
}

template<class Fn>
void parallel_for(std::size_t begin, std::size_t end, unsigned threads, Fn && fn)
{
  const std::size_t count = end - begin;
  if (threads <= 1 || count < 2) {
    for (std::size_t i = begin; i < end; ++i) {
      fn(i);
    }
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back(
      [&, w]() {
        try {
          for (std::size_t i = begin + w; i < end; i += workers) {
            fn(i);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto & t : pool) {
    t.join();
  }
  for (auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace detail

/// Single-channel cascade: p_N = e^{-Lambda_N t} and
/// p_m = Gamma h_{m+1} (p_{m+1} * e^{-Lambda_m t}) with h_m = m (N + 1 - m).
template<class Real>
PopulationTable<Real> solve_single_channel(const SystemSpec & spec, const SolverOptions & opts = {})
{
  if (spec.n_channels() != 1) {
    throw ValidationError("solve_single_channel: expected one channel, got " +
            std::to_string(spec.n_channels()));
  }
  const unsigned n = spec.n_emitters();
  const RateValue gamma = spec.channel(0);
  auto lattice = std::make_shared<const Lattice>(spec, opts.lattice_cap);

  auto level_rate = [&](unsigned m) {return gamma * RateValue(std::int64_t(m) * (n + 1 - m));};

  // lattice index i holds n_1 = i, i.e. m = N - i
  std::vector<ExpPolySum<Real>> entries(n + 1);
  entries[0] = ExpPolySum<Real>::exponential(level_rate(n));
  for (unsigned m = n; m-- > 0; ) {
    auto gain = level_rate(m + 1).template to<Real>();
    auto p = convolve(entries[n - m - 1], ExpPolySum<Real>::exponential(level_rate(m)));
    p *= gain;
    detail::require_accuracy(p, opts.abs_tol, "solve_single_channel p_" + std::to_string(m));
    entries[n - m] = std::move(p);
  }
  return PopulationTable<Real>(spec, std::move(lattice), std::move(entries),
           std::vector<bool>(n + 1, true));
}

/// Lattice dynamic program over the occupation states,
///   p_n = (sum_alpha Gamma_alpha (m+1) n_alpha p_{n - e_alpha}) * e^{-Lambda(n) t},
/// seeded with p_0 = e^{-Lambda_N t}. With `target`, only the states
/// component-wise below it are computed.
template<class Real>
PopulationTable<Real> solve_multichannel(
  const SystemSpec & spec, const std::optional<OccupationState> & target = std::nullopt,
  const SolverOptions & opts = {})
{
  if (spec.n_channels() < 2) {
    throw ValidationError("solve_multichannel: needs at least two channels");
  }
  auto lattice = std::make_shared<const Lattice>(spec, opts.lattice_cap);
  const std::size_t d = spec.n_channels();
  const unsigned n = spec.n_emitters();

  auto wanted = [&](std::size_t i) {
      if (!target) {
        return true;
      }
      auto s = lattice->state(i);
      for (std::size_t a = 0; a < d; ++a) {
        if (s[a] > (*target)[a]) {
          return false;
        }
      }
      return true;
    };

  std::vector<ExpPolySum<Real>> entries(lattice->size());
  std::vector<bool> computed(lattice->size(), false);
  std::vector<Real> channel_rates;
  for (const auto & g : spec.channels()) {
    channel_rates.push_back(g.template to<Real>());
  }

  auto state_rate = [&](std::size_t i) {
      return decay_rate(spec, OccupationState(spec, std::vector<unsigned>(
               lattice->state(i).begin(), lattice->state(i).end())));
    };

  entries[0] = ExpPolySum<Real>::exponential(state_rate(0));
  computed[0] = true;
  for (unsigned q = 1; q <= n; ++q) {
    auto [begin, end] = lattice->level(q);
    const unsigned m = n - q;
    detail::parallel_for(
      begin, end, opts.threads, [&](std::size_t i) {
        if (!wanted(i)) {
          return;
        }
        auto s = lattice->state(i);
        ExpPolySum<Real> feed;
        for (std::size_t a = 0; a < d; ++a) {
          std::size_t pred = lattice->predecessor(i, a);
          if (pred == Lattice::kNone) {
            continue;
          }
          feed += entries[pred] * (channel_rates[a] * Real(m + 1) * Real(s[a]));
        }
        auto p = convolve(feed, ExpPolySum<Real>::exponential(state_rate(i)));
        detail::require_accuracy(p, opts.abs_tol, "solve_multichannel state " +
        std::to_string(i));
        entries[i] = std::move(p);
      });
    for (std::size_t i = begin; i < end; ++i) {
      computed[i] = wanted(i);
    }
  }
  return PopulationTable<Real>(spec, std::move(lattice), std::move(entries), std::move(computed));
}

/// Balanced rates Gamma_alpha = Gamma/d: one effective cascade with
/// Lambda_k = (Gamma/d) k (N - k + d), shared uniformly within each level.
template<class Real>
PopulationTable<Real> solve_balanced(const SystemSpec & spec, const SolverOptions & opts = {})
{
  if (!spec.is_balanced()) {
    throw ValidationError("solve_balanced: channel rates are not all equal");
  }
  const unsigned n = spec.n_emitters();
  const std::int64_t d = static_cast<std::int64_t>(spec.n_channels());
  const RateValue per_channel = spec.channel(0);
  auto level_rate = [&](unsigned k) {
      return per_channel * RateValue(std::int64_t(k) * (std::int64_t(n) - k + d));
    };

  std::vector<ExpPolySum<Real>> levels(n + 1);
  levels[n] = ExpPolySum<Real>::exponential(level_rate(n));
  for (unsigned m = n; m-- > 0; ) {
    auto p = convolve(levels[m + 1], ExpPolySum<Real>::exponential(level_rate(m)));
    p *= level_rate(m + 1).template to<Real>();
    detail::require_accuracy(p, opts.abs_tol, "solve_balanced level " + std::to_string(m));
    levels[m] = std::move(p);
  }
  return PopulationTable<Real>::level_uniform(spec, std::move(levels));
}

/// Picks the cheapest exact route: single channel, balanced cascade, or the
/// full lattice program.
template<class Real>
PopulationTable<Real> solve(const SystemSpec & spec, const SolverOptions & opts = {})
{
  if (spec.n_channels() == 1) {
    return solve_single_channel<Real>(spec, opts);
  }
  if (spec.is_balanced()) {
    return solve_balanced<Real>(spec, opts);
  }
  return solve_multichannel<Real>(spec, std::nullopt, opts);
}

/// Emitted intensity I_alpha(t) = Gamma_alpha sum_n m (n_alpha + 1) p_n(t)
/// (photons per unit time), or the total over channels for kTotalIntensity.
template<class Real>
ExpPolySum<Real> intensity(const PopulationTable<Real> & table, std::size_t channel = kTotalIntensity)
{
  const auto & spec = table.spec();
  const std::size_t d = spec.n_channels();
  const unsigned n = spec.n_emitters();
  if (channel != kTotalIntensity && channel >= d) {
    throw ValidationError("intensity: channel index out of range");
  }
  if (!table.is_complete()) {
    throw ValidationError("intensity: population table is incomplete");
  }

  ExpPolySum<Real> out;
  if (table.is_level_uniform()) {
    // I_alpha = (Gamma/d) sum_m m (N - m + d) / d p_m; the total is d times that.
    const Real per_channel = spec.channel(0).template to<Real>();
    for (unsigned m = 1; m <= n; ++m) {
      Real w = per_channel * Real(m) * Real(n - m + d);
      if (channel != kTotalIntensity) {
        w /= Real(d);
      }
      out += table.level_population(m) * w;
    }
    return out;
  }

  const auto & lattice = table.lattice();
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const unsigned m = lattice.excitations(i);
    if (m == 0) {
      continue;
    }
    auto s = lattice.state(i);
    Real w = 0;
    for (std::size_t a = 0; a < d; ++a) {
      if (channel == kTotalIntensity || channel == a) {
        w += spec.channel(a).template to<Real>() * Real(s[a] + 1);
      }
    }
    out += table.entry(i) * (w * Real(m));
  }
  return out;
}

struct PeakSearch
{
  double t_lo;
  double t_hi;
  std::size_t points = 200;
  double rel_tol = 1e-10;
};

struct Peak
{
  double time;
  double value;
};

/// Scan window [1e-3, 1e2] / (N Gamma_max).
inline PeakSearch default_peak_search(const SystemSpec & spec)
{
  const double scale = spec.n_emitters() * spec.max_rate().to_double();
  return PeakSearch{1e-3 / scale, 1e2 / scale};
}

/// Global maximum of a non-negative decaying signal: log-spaced scan, then
/// bisection on the sign of the derivative. Returns t = 0 when the signal
/// only decays.
template<class Real>
Peak find_peak(const ExpPolySum<Real> & signal, const PeakSearch & search)
{
  if (!(search.t_lo > 0.0 && search.t_hi > search.t_lo && search.points >= 3)) {
    throw ValidationError("find_peak: invalid scan window");
  }
  const auto slope = derivative(signal);
  std::vector<double> grid(search.points);
  const double ratio = std::log(search.t_hi / search.t_lo);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = search.t_lo * std::exp(ratio * double(i) / double(grid.size() - 1));
  }

  std::size_t best = 0;
  Real best_value = evaluate(signal, grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    Real v = evaluate(signal, grid[i]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }

  double lo = best == 0 ? 0.0 : grid[best - 1];
  double hi = best + 1 < grid.size() ? grid[best + 1] : grid[best];
  Peak out{grid[best], to_double(best_value)};
  if (evaluate(slope, lo) > 0 && evaluate(slope, hi) < 0) {
    while (hi - lo > search.rel_tol * hi) {
      double mid = 0.5 * (lo + hi);
      if (evaluate(slope, mid) > 0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    double t = 0.5 * (lo + hi);
    out = Peak{t, to_double(evaluate(signal, t))};
  }

  Real at_zero = evaluate(signal, 0.0);
  if (at_zero >= Real(out.value)) {
    return Peak{0.0, to_double(at_zero)};
  }
  return out;
}

template<class Real>
Peak find_peak(const ExpPolySum<Real> & signal, const SystemSpec & spec)
{
  return find_peak(signal, default_peak_search(spec));
}

/// Channel alpha shows a superradiant burst iff N - 1 > Gamma_0 / Gamma_alpha.
inline bool burst_predicate(const SystemSpec & spec, std::size_t channel)
{
  if (channel >= spec.n_channels()) {
    throw ValidationError("burst_predicate: channel index out of range");
  }
  return RateValue(std::int64_t(spec.n_emitters()) - 1) * spec.channel(channel) >
         spec.total_rate();
}

/// Closed-form peak predictions for balanced channels:
/// I_max / Gamma ~ (N + d - 1)^2 / (4d + 1), Gamma t_peak ~ d ln(N/d) / (N + d - 1).
struct ScalingPrediction
{
  double peak_intensity;
  double peak_time;
};

inline ScalingPrediction balanced_scaling_prediction(unsigned n_emitters, unsigned d)
{
  const double n = n_emitters;
  return ScalingPrediction{
    (n + d - 1) * (n + d - 1) / (4.0 * d + 1.0),
    std::log(n / d) * d / (n + d - 1)};
}

}  // namespace dicke

#endif  // DICKE__TRAJECTORY_SOLVER_HPP_
