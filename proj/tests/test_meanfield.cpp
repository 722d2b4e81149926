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

#include "dicke/meanfield.hpp"
#include "dicke/steady_state.hpp"

namespace
{

using dicke::RateValue;

double mean_fraction(const dicke::SteadyStateDistribution & ss)
{
  const std::size_t n = ss.probabilities.size() - 1;
  double s = 0.0;
  for (std::size_t x = 0; x <= n; ++x) {
    s += double(x) * ss.probabilities[x];
  }
  return s / double(n);
}

double ks_distance(const std::vector<double> & a, const std::vector<double> & b)
{
  double ca = 0.0, cb = 0.0, out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
    out = std::max(out, std::fabs(ca - cb));
  }
  return out;
}

TEST(StoppingTime, EqualRates)
{
  // 2 e^{tau} = N + 2
  auto s = dicke::solve_stopping_time(98, 1.0, 1.0);
  EXPECT_NEAR(s.tau_star, std::log(50.0), 1e-13);
  EXPECT_LT(s.relative_residual, 1e-12);
}

TEST(StoppingTime, ResidualVanishes)
{
  for (unsigned n : {1u, 10u, 1000u, 1000000u}) {
    for (double r : {0.01, 0.3, 1.0, 4.0, 50.0}) {
      auto s = dicke::solve_stopping_time(n, 1.0, r);
      const double lhs = std::exp(s.tau_star) + std::exp(r * s.tau_star);
      EXPECT_NEAR(lhs / (n + 2.0), 1.0, 1e-12) << n << " " << r;
      EXPECT_GT(s.tau_star, 0.0);
    }
  }
}

TEST(StoppingTime, DominantChannelAtLargeN)
{
  for (double r : {0.25, 4.0}) {
    auto s = dicke::solve_stopping_time(1000000, 1.0, r);
    EXPECT_NEAR(s.tau_star / (std::log(1000002.0) / std::max(1.0, r)), 1.0, 0.01);
  }
}

TEST(StoppingTime, EdgeCases)
{
  EXPECT_EQ(dicke::solve_stopping_time(0, 1.0, 2.0).tau_star, 0.0);
  EXPECT_THROW(dicke::solve_stopping_time(5, 0.0, 1.0), dicke::ValidationError);
  EXPECT_THROW(dicke::solve_stopping_time(5, 1.0, -2.0), dicke::ValidationError);
  EXPECT_THROW(dicke::solve_stopping_time(5, 1.0, INFINITY), dicke::ValidationError);
}

TEST(Yule, MeanOccupation)
{
  EXPECT_EQ(dicke::yule_mean(0.0, 3.0), 0.0);
  EXPECT_NEAR(dicke::yule_mean(std::log(5.0), 1.0), 4.0, 1e-14);
  EXPECT_NEAR(dicke::yule_mean(std::log(2.0) / 3.0, 3.0), 1.0, 1e-15);
  EXPECT_THROW(dicke::yule_mean(-1.0, 1.0), dicke::ValidationError);
  // both processes together account for every emitter at tau*
  for (unsigned n : {10u, 500u}) {
    auto s = dicke::solve_stopping_time(n, 1.0, 2.5);
    EXPECT_NEAR(dicke::yule_mean(s.tau_star, 1.0) + dicke::yule_mean(s.tau_star, 2.5), n, 1e-9);
  }
}

TEST(Asymptotic, FlatAtEqualRates)
{
  auto a = dicke::asymptotic_distribution(40, RateValue(1));
  for (double p : a.probabilities) {
    EXPECT_NEAR(p, 1.0 / 41.0, 1e-14);
  }
  auto raw = dicke::asymptotic_distribution(40, RateValue(1), false);
  auto exact = dicke::steady_state_two_channel(40, RateValue(1));
  // the anchor fixes the single-branch end to its exact value
  EXPECT_NEAR(raw.probabilities[0], exact.probabilities[0], 1e-14);
}

TEST(Asymptotic, CloseToExactDistribution)
{
  auto approx = dicke::asymptotic_distribution(100, RateValue(2));
  auto exact = dicke::steady_state_two_channel(100, RateValue(2));
  EXPECT_LE(ks_distance(approx.probabilities, exact.probabilities), 0.07);
}

TEST(Asymptotic, OrderParameterAtLargeN)
{
  auto approx = dicke::asymptotic_distribution(500, RateValue(3, 2));
  auto exact = dicke::steady_state_two_channel(500, RateValue(3, 2));
  EXPECT_NEAR(mean_fraction(approx), mean_fraction(exact), 0.05);
}

TEST(Asymptotic, DominantEndSlope)
{
  // log p_x is linear in x with slope ln(q2 / q1); compare with the exact
  // distribution at the dominant end x = N
  const unsigned n = 1000;
  const double r = 4.0;
  auto exact = dicke::steady_state_two_channel(n, RateValue(4));
  auto stop = dicke::solve_stopping_time(n, 1.0, r);
  const double predicted =
    std::log(-std::expm1(-r * stop.tau_star)) - std::log(-std::expm1(-stop.tau_star));
  const double measured =
    std::log(exact.probabilities[n]) - std::log(exact.probabilities[n - 1]);
  EXPECT_NEAR(measured / predicted, 1.0, 0.1);
  EXPECT_NEAR(dicke::thermal_ratio(n, 1.0, r), predicted, 1e-15);
}

TEST(Asymptotic, RejectsTinySystems)
{
  EXPECT_THROW(dicke::asymptotic_distribution(1, RateValue(2)), dicke::ValidationError);
}

TEST(CaseFormulas, OrderParameter)
{
  EXPECT_EQ(dicke::order_parameter_asymptotic(100, 1.0), 0.5);
  EXPECT_NEAR(dicke::order_parameter_asymptotic(10000, 2.0), 0.99, 1e-15);
  EXPECT_NEAR(dicke::order_parameter_asymptotic(10000, 0.5), 0.01, 1e-15);
  // exchange of the channels maps n2 -> 1 - n2 and r -> 1/r
  for (double r : {0.2, 0.7, 3.0}) {
    EXPECT_NEAR(dicke::order_parameter_asymptotic(777, r) +
      dicke::order_parameter_asymptotic(777, 1.0 / r), 1.0, 1e-14);
  }
  EXPECT_THROW(dicke::order_parameter_asymptotic(1, 2.0), dicke::ValidationError);
}

TEST(CaseFormulas, Susceptibility)
{
  const auto n = static_cast<unsigned>(std::lround(std::exp(10.0)));
  EXPECT_NEAR(dicke::susceptibility_asymptotic(n, 1.0), std::log(double(n)), 1e-12);
  EXPECT_NEAR(dicke::susceptibility_asymptotic(n, 1.0), 10.0, 1e-4);
  EXPECT_NEAR(dicke::susceptibility_asymptotic(100, 2.0), std::log(100.0) / 4.0 / 10.0, 1e-15);
  EXPECT_THROW(dicke::susceptibility_asymptotic(100, 0.0), dicke::ValidationError);
}

TEST(ThermalRatio, VanishesWhenChannelsAgreeOrSystemGrows)
{
  EXPECT_NEAR(dicke::thermal_ratio(100, 1.0, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(dicke::thermal_ratio(100, 1.0, 2.0), dicke::thermal_ratio(100, 2.0, 1.0), 1e-15);
  double prev = INFINITY;
  for (unsigned n : {10u, 100u, 1000u, 100000u, 10000000u}) {
    const double v = dicke::thermal_ratio(n, 1.0, 2.0);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-3);
}

}  // namespace
