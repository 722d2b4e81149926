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

#ifndef DICKE__STOCHASTIC_HPP_
#define DICKE__STOCHASTIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <initializer_list>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/philox.hpp"
#include "dicke/system.hpp"

namespace dicke
{

/// Name of the random-number scheme, echoed into every output.
inline constexpr const char * kRngScheme = "philox4x32-10/seed:trajectory";

/// One jump trajectory from the fully inverted state to the ground manifold.
struct TrajectoryRecord
{
  std::vector<double> jump_times;
  std::vector<std::uint32_t> jump_channels;
  /// I_k = Lambda(t_k^-), the total decay rate just before jump k.
  std::vector<double> intensities;
  std::vector<unsigned> final_occupations;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

namespace detail
{

/// Walks one trajectory, calling `on_jump(t, channel, lambda)` per jump.
/// One Philox block (two uniforms) per jump.
template<class OnJump>
void walk_trajectory(
  const SystemSpec & spec, const std::vector<double> & gammas, std::uint64_t seed,
  std::uint64_t index, std::vector<unsigned> & n, OnJump && on_jump)
{
  const std::size_t d = gammas.size();
  PhiloxStream rng(seed, index);
  std::fill(n.begin(), n.end(), 0u);
  std::vector<double> w(d);
  double total_weight = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    w[a] = gammas[a];
    total_weight += w[a];
  }
  double t = 0.0;
  for (unsigned m = spec.n_emitters(); m > 0; --m) {
    const double lambda = m * total_weight;
    t += -std::log(rng.uniform_pos()) / lambda;
    const double u = rng.uniform() * total_weight;
    std::size_t chosen = d - 1;
    double acc = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      acc += w[a];
      if (u < acc) {
        chosen = a;
        break;
      }
    }
    on_jump(t, chosen, lambda);
    ++n[chosen];
    w[chosen] += gammas[chosen];
    // recompute the sum exactly every step so rounding does not drift
    total_weight = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      total_weight += w[a];
    }
  }
}

inline std::vector<double> channel_rates(const SystemSpec & spec)
{
  std::vector<double> out;
  for (const auto & g : spec.channels()) {
    out.push_back(g.to_double());
  }
  return out;
}

}  // namespace detail

/// Trajectory `index` of the batch keyed by `seed`: the waiting time out of
/// a state with m excitations is Exponential(m W), W = sum_a Gamma_a (n_a + 1),
/// and the jump goes to channel a with probability Gamma_a (n_a + 1) / W.
inline TrajectoryRecord simulate_trajectory(
  const SystemSpec & spec, std::uint64_t seed, std::uint64_t index = 0)
{
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.index = index;
  rec.jump_times.reserve(spec.n_emitters());
  rec.jump_channels.reserve(spec.n_emitters());
  rec.intensities.reserve(spec.n_emitters());
  std::vector<unsigned> n(spec.n_channels(), 0u);
  detail::walk_trajectory(
    spec, detail::channel_rates(spec), seed, index, n,
    [&](double t, std::size_t a, double lambda) {
      rec.jump_times.push_back(t);
      rec.jump_channels.push_back(static_cast<std::uint32_t>(a));
      rec.intensities.push_back(lambda);
    });
  rec.final_occupations = n;
  return rec;
}

struct TimeBins
{
  /// Ascending bin edges; jumps outside [front, back) are counted as overflow.
  std::vector<double> edges;

  static TimeBins logarithmic(double t_lo, double t_hi, std::size_t count)
  {
    if (!(t_lo > 0.0 && t_hi > t_lo && count >= 1)) {
      throw ValidationError("TimeBins: need 0 < t_lo < t_hi and at least one bin");
    }
    TimeBins out;
    const double ratio = std::log(t_hi / t_lo);
    for (std::size_t i = 0; i <= count; ++i) {
      out.edges.push_back(t_lo * std::exp(ratio * double(i) / double(count)));
    }
    return out;
  }

  static TimeBins linear(double t_lo, double t_hi, std::size_t count)
  {
    if (!(t_hi > t_lo && count >= 1)) {
      throw ValidationError("TimeBins: need t_lo < t_hi and at least one bin");
    }
    TimeBins out;
    for (std::size_t i = 0; i <= count; ++i) {
      out.edges.push_back(t_lo + (t_hi - t_lo) * double(i) / double(count));
    }
    return out;
  }

  /// Log bins over [1e-3, 1e2] / (N Gamma_max).
  static TimeBins default_for(const SystemSpec & spec, std::size_t count = 200)
  {
    const double scale = spec.n_emitters() * spec.max_rate().to_double();
    return logarithmic(1e-3 / scale, 1e2 / scale, count);
  }

  std::size_t size() const noexcept {return edges.empty() ? 0 : edges.size() - 1;}

  /// Bin of t, or size() when outside.
  std::size_t locate(double t) const
  {
    if (edges.size() < 2 || t < edges.front() || t >= edges.back()) {
      return size();
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), t);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
  }
};

struct BatchOptions
{
  std::uint64_t n_trajectories = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  TimeBins bins;
  /// Keep full per-jump records only for N up to this size.
  unsigned record_threshold = 100'000;
  bool keep_records = false;
  /// Keep the histogram of final configurations only for N up to this size.
  unsigned histogram_threshold = 100'000;
  /// Called with the number of finished trajectories (from worker threads,
  /// serialized by a mutex).
  std::function<void(std::uint64_t)> progress;
};

/// Integer aggregates of a batch; merging is exact, so results do not
/// depend on how trajectories were split across threads.
struct TrajectoryBatch
{
  SystemSpec spec;
  std::string rng_scheme = kRngScheme;
  std::uint64_t seed = 0;
  std::uint64_t n_trajectories = 0;
  TimeBins bins;
  /// counts[a][b]: jumps into channel a within bin b, summed over
  /// trajectories; row d holds all channels together.
  std::vector<std::vector<std::uint64_t>> counts;
  /// Sum over trajectories of the squared per-trajectory count, same layout.
  std::vector<std::vector<std::uint64_t>> counts_sq;
  std::vector<std::uint64_t> overflow;
  /// Per channel: sum of final n_a and of n_a^2.
  std::vector<std::uint64_t> final_sum;
  std::vector<unsigned __int128> final_sum_sq;
  /// Final configuration -> number of trajectories (small N only).
  std::map<std::vector<unsigned>, std::uint64_t> final_histogram;
  bool has_histogram = false;
  std::vector<TrajectoryRecord> records;

  TrajectoryBatch(const SystemSpec & s, const TimeBins & b)
  : spec(s), bins(b)
  {
    const std::size_t d = spec.n_channels();
    counts.assign(d + 1, std::vector<std::uint64_t>(bins.size(), 0));
    counts_sq = counts;
    overflow.assign(d, 0);
    final_sum.assign(d, 0);
    final_sum_sq.assign(d, 0);
  }

  void merge(const TrajectoryBatch & o)
  {
    const std::size_t d = spec.n_channels();
    for (std::size_t a = 0; a <= d; ++a) {
      for (std::size_t b = 0; b < bins.size(); ++b) {
        counts[a][b] += o.counts[a][b];
        counts_sq[a][b] += o.counts_sq[a][b];
      }
    }
    for (std::size_t a = 0; a < d; ++a) {
      overflow[a] += o.overflow[a];
      final_sum[a] += o.final_sum[a];
      final_sum_sq[a] += o.final_sum_sq[a];
    }
    for (const auto & [k, v] : o.final_histogram) {
      final_histogram[k] += v;
    }
    n_trajectories += o.n_trajectories;
  }

  /// Mean final fraction n_a / N with its standard error.
  std::pair<double, double> mean_fraction(std::size_t channel) const
  {
    if (n_trajectories == 0) {
      throw ValidationError("TrajectoryBatch: empty batch");
    }
    const double m = static_cast<double>(n_trajectories);
    const double n = spec.n_emitters();
    const double mean = static_cast<double>(final_sum.at(channel)) / m;
    const double second = static_cast<double>(final_sum_sq.at(channel)) / m;
    const double var = n_trajectories > 1 ?
      std::max(0.0, (second - mean * mean) * m / (m - 1.0)) : 0.0;
    return {mean / n, std::sqrt(var / m) / n};
  }
};

/// Runs trajectories 0 .. n_trajectories-1 of the stream keyed by `seed`.
inline TrajectoryBatch simulate_batch(const SystemSpec & spec, BatchOptions opts)
{
  if (opts.n_trajectories == 0) {
    throw ValidationError("simulate_batch: need at least one trajectory");
  }
  if (opts.bins.edges.empty()) {
    opts.bins = TimeBins::default_for(spec);
  }
  if (opts.keep_records && spec.n_emitters() > opts.record_threshold) {
    throw ResourceError("simulate_batch: full records are limited to N <= " +
            std::to_string(opts.record_threshold) + "; use streamed aggregates");
  }
  const std::size_t d = spec.n_channels();
  const auto gammas = detail::channel_rates(spec);
  const bool histogram = spec.n_emitters() <= opts.histogram_threshold;
  const unsigned workers = static_cast<unsigned>(
    std::max<std::uint64_t>(1, std::min<std::uint64_t>(opts.threads, opts.n_trajectories)));

  std::vector<TrajectoryBatch> partial(workers, TrajectoryBatch(spec, opts.bins));
  std::vector<std::vector<TrajectoryRecord>> partial_records(workers);
  std::mutex progress_mutex;
  std::uint64_t finished = 0;

  auto work = [&](unsigned w) {
      auto & agg = partial[w];
      std::vector<unsigned> n(d, 0u);
      std::vector<std::uint64_t> local((d + 1) * opts.bins.size(), 0);
      std::vector<std::size_t> touched;
      for (std::uint64_t k = w; k < opts.n_trajectories; k += workers) {
        TrajectoryRecord rec;
        if (opts.keep_records) {
          rec.seed = opts.seed;
          rec.index = k;
        }
        detail::walk_trajectory(
          spec, gammas, opts.seed, k, n, [&](double t, std::size_t a, double lambda) {
            const std::size_t b = opts.bins.locate(t);
            if (b == opts.bins.size()) {
              ++agg.overflow[a];
            } else {
              for (std::size_t slot : {a * opts.bins.size() + b, d * opts.bins.size() + b}) {
                if (local[slot]++ == 0) {
                  touched.push_back(slot);
                }
              }
            }
            if (opts.keep_records) {
              rec.jump_times.push_back(t);
              rec.jump_channels.push_back(static_cast<std::uint32_t>(a));
              rec.intensities.push_back(lambda);
            }
          });
        for (std::size_t slot : touched) {
          const std::uint64_t c = local[slot];
          agg.counts[slot / opts.bins.size()][slot % opts.bins.size()] += c;
          agg.counts_sq[slot / opts.bins.size()][slot % opts.bins.size()] += c * c;
          local[slot] = 0;
        }
        touched.clear();
        for (std::size_t a = 0; a < d; ++a) {
          agg.final_sum[a] += n[a];
          agg.final_sum_sq[a] += static_cast<unsigned __int128>(n[a]) * n[a];
        }
        if (histogram) {
          ++agg.final_histogram[n];
        }
        ++agg.n_trajectories;
        if (opts.keep_records) {
          rec.final_occupations = n;
          partial_records[w].push_back(std::move(rec));
        }
        if (opts.progress) {
          std::lock_guard<std::mutex> lock(progress_mutex);
          opts.progress(++finished);
        }
      }
    };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
          try {
            work(w);
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

  TrajectoryBatch out(spec, opts.bins);
  out.seed = opts.seed;
  out.has_histogram = histogram;
  for (const auto & p : partial) {
    out.merge(p);
  }
  if (opts.keep_records) {
    out.records.resize(opts.n_trajectories);
    for (auto & recs : partial_records) {
      for (auto & r : recs) {
        const auto k = r.index;
        out.records[k] = std::move(r);
      }
    }
  }
  return out;
}

/// Binned jump-rate estimate of the emitted intensity (photons per unit
/// time per trajectory) with standard errors.
struct IntensityEstimate
{
  std::vector<double> edges;
  /// rate[a][b] for channel a; the last row is the total.
  std::vector<std::vector<double>> rate;
  /// Poisson error sqrt(count) / (M width).
  std::vector<std::vector<double>> poisson_error;
  /// Sample standard error over trajectories.
  std::vector<std::vector<double>> standard_error;
  /// Bins without any jump: the relative error is unbounded there.
  std::vector<std::vector<bool>> empty;

  std::size_t total_row() const noexcept {return rate.size() - 1;}
};

inline IntensityEstimate estimate_intensity(const TrajectoryBatch & batch)
{
  if (batch.n_trajectories == 0) {
    throw ValidationError("estimate_intensity: empty batch");
  }
  const std::size_t d = batch.spec.n_channels();
  const std::size_t nb = batch.bins.size();
  const double m = static_cast<double>(batch.n_trajectories);
  IntensityEstimate out;
  out.edges = batch.bins.edges;
  out.rate.assign(d + 1, std::vector<double>(nb, 0.0));
  out.poisson_error = out.rate;
  out.standard_error = out.rate;
  out.empty.assign(d + 1, std::vector<bool>(nb, true));

  for (std::size_t b = 0; b < nb; ++b) {
    const double width = batch.bins.edges[b + 1] - batch.bins.edges[b];
    for (std::size_t a = 0; a <= d; ++a) {
      const double count = static_cast<double>(batch.counts[a][b]);
      const double sq = static_cast<double>(batch.counts_sq[a][b]);
      const double mean = count / m;
      const double var = m > 1 ? std::max(0.0, (sq / m - mean * mean) * m / (m - 1.0)) : 0.0;
      out.rate[a][b] = mean / width;
      out.poisson_error[a][b] = std::sqrt(count) / (m * width);
      out.standard_error[a][b] = std::sqrt(var / m) / width;
      out.empty[a][b] = count == 0.0;
    }
  }
  return out;
}

struct OrderParameterSample
{
  unsigned n_emitters;
  double ratio;
  double n_bar_2;
  double standard_error;
  std::uint64_t n_trajectories;
};

/// Monte Carlo n_bar_2 over an (N, r) grid with Gamma_1 = 1, Gamma_2 = r.
/// Each grid point draws from its own stream family derived from `seed`.
inline std::vector<OrderParameterSample> sweep_order_parameter(
  const std::vector<unsigned> & n_values, const std::vector<double> & ratios,
  std::uint64_t trajectories, std::uint64_t seed, unsigned threads = 1)
{
  std::vector<OrderParameterSample> out;
  std::uint64_t point = 0;
  for (unsigned n : n_values) {
    for (double r : ratios) {
      auto spec = SystemSpec::two_channel(n, RateValue::from_double(r));
      BatchOptions opts;
      opts.n_trajectories = trajectories;
      opts.seed = mix_seed(seed ^ mix_seed(point++));
      opts.threads = threads;
      opts.bins = TimeBins::logarithmic(1.0, 2.0, 1);
      opts.histogram_threshold = 0;
      auto batch = simulate_batch(spec, opts);
      auto [mean, se] = batch.mean_fraction(1);
      out.push_back(OrderParameterSample{n, r, mean, se, trajectories});
    }
  }
  return out;
}

}  // namespace dicke

#endif  // DICKE__STOCHASTIC_HPP_
