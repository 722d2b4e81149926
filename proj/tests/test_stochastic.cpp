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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "dicke/philox.hpp"
#include "dicke/steady_state.hpp"
#include "dicke/stochastic.hpp"
#include "dicke/trajectory_solver.hpp"

namespace
{

using dicke::RateValue;
using dicke::SystemSpec;

TEST(Philox, KnownAnswers)
{
  using B = dicke::Philox4x32::block;
  EXPECT_EQ(dicke::Philox4x32::generate(B{0, 0, 0, 0}, 0),
    (B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(dicke::Philox4x32::generate(
      B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, 0xffffffffffffffffull),
    (B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(dicke::Philox4x32::generate(
      B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
      (std::uint64_t(0x299f31d0u) << 32) | 0xa4093822u),
    (B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, StreamsAreReproducibleAndDistinct)
{
  dicke::PhiloxStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
  EXPECT_EQ(a.blocks_used(), 50u);
  dicke::PhiloxStream u(1, 1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    const double w = u.uniform_pos();
    lo = std::min(lo, std::min(v, w));
    hi = std::max(hi, std::max(v, w));
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    ASSERT_GT(w, 0.0);
    ASSERT_LE(w, 1.0);
  }
  EXPECT_LT(lo, 1e-3);
  EXPECT_GT(hi, 1.0 - 1e-3);
}

TEST(Trajectory, SingleEmitterWaitingTime)
{
  SystemSpec spec(1, {RateValue(2)});
  const int n = 20000;
  std::vector<double> times;
  for (int k = 0; k < n; ++k) {
    auto rec = dicke::simulate_trajectory(spec, 11, k);
    ASSERT_EQ(rec.jump_times.size(), 1u);
    times.push_back(rec.jump_times[0]);
  }
  double mean = 0.0;
  for (double t : times) {
    mean += t / n;
  }
  // exponential with mean 1/2 and standard deviation 1/2
  EXPECT_NEAR(mean, 0.5, 3.0 * 0.5 / std::sqrt(double(n)));

  std::sort(times.begin(), times.end());
  double ks = 0.0;
  for (int k = 0; k < n; ++k) {
    const double cdf = 1.0 - std::exp(-2.0 * times[k]);
    ks = std::max({ks, std::fabs(cdf - double(k) / n), std::fabs(cdf - double(k + 1) / n)});
  }
  // 1% critical value of the Kolmogorov distribution
  EXPECT_LT(ks * std::sqrt(double(n)), 1.63);
}

TEST(Trajectory, RecordInvariants)
{
  SystemSpec spec(40, {RateValue(1), RateValue(5, 2), RateValue(1, 3)});
  auto rec = dicke::simulate_trajectory(spec, 5, 17);
  ASSERT_EQ(rec.jump_times.size(), 40u);
  EXPECT_TRUE(std::is_sorted(rec.jump_times.begin(), rec.jump_times.end()));
  std::vector<unsigned> n(3, 0);
  for (std::size_t k = 0; k < rec.jump_times.size(); ++k) {
    const unsigned m = 40 - static_cast<unsigned>(k);
    double w = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      w += spec.channel(a).to_double() * (n[a] + 1.0);
    }
    EXPECT_NEAR(rec.intensities[k], m * w, 1e-9 * m * w);
    ++n[rec.jump_channels[k]];
  }
  EXPECT_EQ(rec.final_occupations, n);
  EXPECT_EQ(rec.seed, 5u);
  EXPECT_EQ(rec.index, 17u);
}

TEST(Batch, SingleEmitterBranching)
{
  SystemSpec spec(1, {RateValue(1), RateValue(3)});
  dicke::BatchOptions opts;
  opts.n_trajectories = 40000;
  opts.bins = dicke::TimeBins::default_for(spec);
  auto batch = dicke::simulate_batch(spec, opts);
  auto [mean, se] = batch.mean_fraction(1);
  EXPECT_NEAR(mean, 0.75, 3.0 * se);
  EXPECT_GT(se, 0.0);
}

TEST(Batch, FinalStatesFollowExactSteadyState)
{
  // three emitters, r = 2, against the closed-form law by chi-squared
  auto spec = SystemSpec::two_channel(3, RateValue(2));
  dicke::BatchOptions opts;
  opts.n_trajectories = 100000;
  opts.seed = 3;
  opts.bins = dicke::TimeBins::default_for(spec, 10);
  auto batch = dicke::simulate_batch(spec, opts);
  ASSERT_TRUE(batch.has_histogram);
  auto exact = dicke::steady_state_two_channel(3, RateValue(2));
  double chi2 = 0.0;
  std::uint64_t seen = 0;
  for (unsigned x = 0; x <= 3; ++x) {
    const double expected = exact.probabilities[x] * double(opts.n_trajectories);
    auto it = batch.final_histogram.find({3 - x, x});
    const double observed = it == batch.final_histogram.end() ? 0.0 : double(it->second);
    seen += static_cast<std::uint64_t>(observed);
    chi2 += (observed - expected) * (observed - expected) / expected;
  }
  EXPECT_EQ(seen, opts.n_trajectories);
  boost::math::chi_squared dist(3.0);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 1e-3);
}

TEST(Batch, SingleEmitterIntensityPerBin)
{
  SystemSpec spec(1, {RateValue(1)});
  dicke::BatchOptions opts;
  opts.n_trajectories = 50000;
  opts.seed = 9;
  opts.bins = dicke::TimeBins::linear(0.0, 4.0, 20);
  auto est = dicke::estimate_intensity(dicke::simulate_batch(spec, opts));
  const auto row = est.total_row();
  for (std::size_t b = 0; b < 20; ++b) {
    const double lo = est.edges[b], hi = est.edges[b + 1];
    const double exact = (std::exp(-lo) - std::exp(-hi)) / (hi - lo);
    EXPECT_NEAR(est.rate[row][b], exact, 3.0 * est.standard_error[row][b]) << "bin " << b;
    EXPECT_FALSE(est.empty[row][b]);
  }
}

TEST(Batch, BalancedBurstPeakMatchesClosedForm)
{
  auto spec = SystemSpec::balanced(150, 2);
  auto exact = dicke::with_escalating_precision(
    dicke::default_precision_bits(150), [&]<class Real>() {
      return dicke::find_peak(dicke::intensity(dicke::solve<Real>(spec)), spec);
    }, [](int, int) {});

  dicke::BatchOptions opts;
  opts.n_trajectories = 4000;
  opts.seed = 21;
  opts.bins = dicke::TimeBins::linear(0.0, 4.0 * exact.time, 40);
  auto est = dicke::estimate_intensity(dicke::simulate_batch(spec, opts));
  const auto & total = est.rate[est.total_row()];
  const auto peak_bin = std::max_element(total.begin(), total.end()) - total.begin();
  const double centre = 0.5 * (est.edges[peak_bin] + est.edges[peak_bin + 1]);
  const double width = est.edges[1] - est.edges[0];
  EXPECT_NEAR(centre, exact.time, 2.0 * width);
  EXPECT_NEAR(total[peak_bin] / exact.value, 1.0, 0.05);
}

TEST(Batch, LargeSystemOrderParameter)
{
  auto spec = SystemSpec::two_channel(2000, RateValue(4));
  dicke::BatchOptions opts;
  opts.n_trajectories = 2000;
  opts.seed = 4;
  opts.bins = dicke::TimeBins::default_for(spec, 10);
  auto batch = dicke::simulate_batch(spec, opts);
  auto [mean, se] = batch.mean_fraction(1);
  auto ss = dicke::steady_state_two_channel(2000, RateValue(4));
  double exact = 0.0;
  for (unsigned x = 0; x <= 2000; ++x) {
    exact += x * ss.probabilities[x] / 2000.0;
  }
  EXPECT_NEAR(mean, exact, 3.0 * se);
}

TEST(Batch, DeterministicAndThreadIndependent)
{
  SystemSpec spec(30, {RateValue(1), RateValue(2), RateValue(1, 2)});
  dicke::BatchOptions opts;
  opts.n_trajectories = 3000;
  opts.seed = 77;
  opts.bins = dicke::TimeBins::default_for(spec, 50);
  opts.keep_records = true;
  auto a = dicke::simulate_batch(spec, opts);
  auto b = dicke::simulate_batch(spec, opts);
  opts.threads = 3;
  std::uint64_t calls = 0;
  opts.progress = [&](std::uint64_t) {++calls;};
  auto c = dicke::simulate_batch(spec, opts);
  EXPECT_EQ(calls, opts.n_trajectories);
  for (const auto * other : {&b, &c}) {
    EXPECT_EQ(a.counts, other->counts);
    EXPECT_EQ(a.counts_sq, other->counts_sq);
    EXPECT_EQ(a.overflow, other->overflow);
    EXPECT_EQ(a.final_sum, other->final_sum);
    EXPECT_EQ(a.final_histogram, other->final_histogram);
    ASSERT_EQ(a.records.size(), other->records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
      EXPECT_EQ(a.records[k].jump_times, other->records[k].jump_times);
      EXPECT_EQ(a.records[k].index, k);
    }
  }
  opts.seed = 78;
  opts.threads = 1;
  EXPECT_NE(dicke::simulate_batch(spec, opts).final_sum, a.final_sum);
}

TEST(Batch, JumpCountsAddUp)
{
  SystemSpec spec(12, {RateValue(1), RateValue(2)});
  dicke::BatchOptions opts;
  opts.n_trajectories = 500;
  opts.bins = dicke::TimeBins::logarithmic(1e-6, 1e3, 30);
  auto batch = dicke::simulate_batch(spec, opts);
  std::uint64_t total = 0;
  for (std::size_t a = 0; a < 2; ++a) {
    std::uint64_t channel = batch.overflow[a];
    for (auto c : batch.counts[a]) {
      channel += c;
    }
    EXPECT_EQ(channel, batch.final_sum[a]);
    total += channel;
  }
  EXPECT_EQ(total, 12u * 500u);
}

TEST(Batch, RejectsBadOptions)
{
  SystemSpec spec(5, {RateValue(1)});
  dicke::BatchOptions opts;
  opts.bins = dicke::TimeBins::default_for(spec);
  opts.n_trajectories = 0;
  EXPECT_THROW(dicke::simulate_batch(spec, opts), dicke::ValidationError);
  opts.n_trajectories = 10;
  opts.keep_records = true;
  opts.record_threshold = 4;
  EXPECT_THROW(dicke::simulate_batch(spec, opts), dicke::ResourceError);
  EXPECT_THROW(dicke::TimeBins::logarithmic(0.0, 1.0, 5), dicke::ValidationError);
  EXPECT_THROW(dicke::TimeBins::linear(1.0, 1.0, 5), dicke::ValidationError);
}

TEST(Sweep, EqualRatesGiveHalf)
{
  auto points = dicke::sweep_order_parameter({20, 200}, {1.0, 3.0}, 4000, 5);
  ASSERT_EQ(points.size(), 4u);
  for (const auto & p : points) {
    const double exact = dicke::order_parameter(p.n_emitters,
        RateValue::from_double(p.ratio)).n_bar_2;
    EXPECT_NEAR(p.n_bar_2, exact, 3.0 * p.standard_error) << p.n_emitters << " " << p.ratio;
    if (p.ratio == 1.0) {
      EXPECT_NEAR(p.n_bar_2, 0.5, 3.0 * p.standard_error);
    }
  }
}

}  // namespace
