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

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dicke/exp_poly_sum.hpp"
#include "dicke/rate_equations.hpp"
#include "dicke/trajectory_solver.hpp"

namespace
{

using dicke::ExpPolySum;
using dicke::RateValue;
using R = dicke::real128;
using Sum = ExpPolySum<R>;

double integrate(const std::function<double(double)> & f, double a, double b)
{
  if (b <= a) {
    return 0.0;
  }
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-13);
}

// fixed-order rule for nested integrals of smooth integrands
double integrate_fixed(const std::function<double(double)> & f, double a, double b)
{
  if (b <= a) {
    return 0.0;
  }
  return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

double at(const Sum & s, double t)
{
  return dicke::to_double(dicke::evaluate(s, t));
}

Sum term(double c, unsigned k, RateValue rate)
{
  return Sum::exponential(rate, R(c), k);
}

Sum random_sum(std::mt19937_64 & rng)
{
  std::uniform_int_distribution<int> rate(1, 5), power(0, 2), count(1, 3);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  Sum out;
  for (int i = count(rng); i > 0; --i) {
    out += term(coeff(rng), power(rng), RateValue(rate(rng)));
  }
  return out;
}

TEST(RateValue, ParsesDecimalsExactly)
{
  EXPECT_EQ(RateValue::from_decimal("0.1"), RateValue(1, 10));
  EXPECT_EQ(RateValue::from_decimal("1/8"), RateValue(1, 8));
  EXPECT_EQ(RateValue::from_decimal("2.5e-3"), RateValue(1, 400));
  EXPECT_EQ(RateValue(6, 4), RateValue(3, 2));
  EXPECT_EQ(RateValue(6, 4).denominator(), 2);
  EXPECT_NE(RateValue::from_decimal("0.3333333333"), RateValue(1, 3));
  EXPECT_THROW(RateValue::from_decimal("abc"), dicke::ValidationError);
  EXPECT_THROW(RateValue(1, 0), dicke::ValidationError);
}

TEST(Convolve, EqualRatesGiveLinearTerm)
{
  auto c = dicke::convolve(term(1, 0, 2), term(1, 0, 2));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.terms()[0].power, 1u);
  EXPECT_EQ(c.terms()[0].rate, RateValue(2));
  EXPECT_EQ(c.terms()[0].coeff, R(1));
}

TEST(Convolve, DistinctRatesGiveDifferenceQuotient)
{
  auto c = dicke::convolve(term(1, 0, 1), term(1, 0, 3));
  EXPECT_EQ(c.coefficient(RateValue(1), 0), R(0.5));
  EXPECT_EQ(c.coefficient(RateValue(3), 0), R(-0.5));
}

TEST(Convolve, TripleConvolutionMatchesQuadrature)
{
  auto c = dicke::convolve(dicke::convolve(term(1, 0, 1), term(1, 0, 2)), term(1, 0, 3));
  auto inner = [](double s) {
      return integrate([s](double u) {return std::exp(-(s - u)) * std::exp(-2.0 * u);}, 0.0, s);
    };
  const double reference =
    integrate([&](double s) {return inner(s) * std::exp(-3.0 * (1.0 - s));}, 0.0, 1.0);
  EXPECT_NEAR(at(c, 1.0), reference, 1e-12);
}

TEST(Convolve, DegenerateRuleMatchesQuadrature)
{
  // (t e^{-F t}) * e^{-K t} = (e^{-K t} - e^{-F t}) / (K - F)^2 + t e^{-F t} / (K - F)
  const double f = 1.0, k = 3.0;
  auto c = dicke::convolve(term(1, 1, 1), term(1, 0, 3));
  for (double t : {0.1, 0.7, 2.0, 5.0}) {
    const double reference = integrate(
      [&](double tau) {return (t - tau) * std::exp(-f * (t - tau)) * std::exp(-k * tau);},
      0.0, t);
    const double closed = (std::exp(-k * t) - std::exp(-f * t)) / ((k - f) * (k - f)) +
      t * std::exp(-f * t) / (k - f);
    EXPECT_NEAR(at(c, t), reference, 1e-12) << "t = " << t;
    EXPECT_NEAR(closed, reference, 1e-12) << "t = " << t;
  }
}

TEST(Convolve, HigherMultiplicities)
{
  // (t^2 e^{-t}) * (t e^{-t}) = 2! 1! / 4! t^4 e^{-t}
  auto c = dicke::convolve(term(1, 2, 1), term(1, 1, 1));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.terms()[0].power, 4u);
  EXPECT_NEAR(dicke::to_double(c.terms()[0].coeff), 1.0 / 12.0, 1e-30);

  auto d = dicke::convolve(term(1, 2, 1), term(1, 1, 2));
  for (double t : {0.3, 1.5, 4.0}) {
    const double reference = integrate(
      [&](double tau) {
        return (t - tau) * (t - tau) * std::exp(-(t - tau)) * tau * std::exp(-2.0 * tau);
      }, 0.0, t);
    EXPECT_NEAR(at(d, t), reference, 1e-12) << "t = " << t;
  }
}

TEST(Convolve, CommutativeAndAssociativeOnRandomSums)
{
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> when(0.01, 10.0);
  for (int trial = 0; trial < 25; ++trial) {
    auto a = random_sum(rng), b = random_sum(rng), c = random_sum(rng);
    auto ab = dicke::convolve(a, b), ba = dicke::convolve(b, a);
    auto left = dicke::convolve(ab, c), right = dicke::convolve(a, dicke::convolve(b, c));
    for (int k = 0; k < 5; ++k) {
      const double t = when(rng);
      EXPECT_NEAR(at(ab, t), at(ba, t), 1e-25);
      EXPECT_NEAR(at(left, t), at(right, t), 1e-25);
    }
    EXPECT_NEAR(at(ab, 0.0), 0.0, 1e-30);
  }
}

TEST(Evaluate, Basics)
{
  EXPECT_EQ(dicke::evaluate(term(1, 0, 2), 0.0), R(1));
  EXPECT_NEAR(at(term(1, 1, 1), 1.0), std::exp(-1.0), 1e-16);
  Sum s = term(3, 0, 1) + term(-2, 1, 4) + term(5, 0, 0);
  EXPECT_EQ(dicke::evaluate(s, 0.0), R(8));
}

TEST(Evaluate, TwoEmitterPopulationMatchesRateEquations)
{
  dicke::SystemSpec spec(2, {RateValue(1)});
  auto table = dicke::solve_single_channel<R>(spec);
  auto ode = dicke::integrate(spec, {0.5});
  auto p1 = table.population(dicke::OccupationState(spec, {1}));
  EXPECT_NEAR(at(p1, 0.5), ode(0, 1), 1e-10);
  EXPECT_NEAR(at(p1, 0.5), std::exp(-1.0), 1e-16);
}

TEST(Derivative, TermWise)
{
  auto d = dicke::derivative(term(1, 0, 2));
  EXPECT_EQ(d.coefficient(RateValue(2), 0), R(-2));
  auto e = dicke::derivative(term(1, 1, 1));
  EXPECT_EQ(e.coefficient(RateValue(1), 0), R(1));
  EXPECT_EQ(e.coefficient(RateValue(1), 1), R(-1));
}

TEST(Derivative, MatchesCentralDifferenceOnPopulations)
{
  dicke::SystemSpec spec(4, {RateValue(1)});
  auto table = dicke::solve_single_channel<R>(spec);
  const R h = R(1e-6);
  for (unsigned m = 0; m <= 4; ++m) {
    auto p = table.level_population(m);
    auto dp = dicke::derivative(p);
    for (double t : {0.05, 0.2, 0.6}) {
      const R fd = (dicke::evaluate(p, R(t) + h) - dicke::evaluate(p, R(t) - h)) / (2 * h);
      EXPECT_NEAR(dicke::to_double(fd), at(dp, t), 1e-8) << "m = " << m << ", t = " << t;
    }
  }
}

TEST(Derivative, IntegralRecoversInitialValue)
{
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = random_sum(rng);
    auto total = dicke::integral_to_infinity(dicke::derivative(s));
    EXPECT_NEAR(dicke::to_double(total), -at(s, 0.0), 1e-25);
  }
}

TEST(IntegralToInfinity, Basics)
{
  EXPECT_EQ(dicke::integral_to_infinity(term(1, 0, 2)), R(0.5));
  EXPECT_EQ(dicke::integral_to_infinity(term(1, 1, 1)), R(1));
  EXPECT_THROW(dicke::integral_to_infinity(term(1, 0, 0)), dicke::DivergenceError);
}

TEST(IntegralToInfinity, EveryEmitterReleasesOnePhoton)
{
  dicke::SystemSpec spec(5, {RateValue(1), RateValue(2)});
  auto table = dicke::solve_multichannel<R>(spec);
  EXPECT_NEAR(dicke::to_double(dicke::integral_to_infinity(dicke::intensity(table))), 5.0, 1e-20);

  // cumulative emission from the rate equations: N - <m> at late times
  dicke::RateEquationSystem system(spec);
  auto ode = dicke::integrate(system, {10.0});
  double emitted = 0.0;
  for (std::size_t i = 0; i < system.size(); ++i) {
    emitted += (5.0 - system.lattice().excitations(i)) * ode(0, static_cast<Eigen::Index>(i));
  }
  EXPECT_NEAR(emitted, 5.0, 1e-8);
}

TEST(ExpPolySum, SolverOutputMatchesNestedQuadrature)
{
  // defining convolution integrals evaluated directly, no closed form involved
  for (const auto & spec : {dicke::SystemSpec(3, {RateValue(1)}),
      dicke::SystemSpec(2, {RateValue(1), RateValue(3)}),
      dicke::SystemSpec(3, {RateValue(2), RateValue(1, 2)})})
  {
    const std::size_t d = spec.n_channels();
    std::function<double(std::vector<unsigned>, double)> p =
      [&](std::vector<unsigned> n, double t) -> double {
        dicke::OccupationState st(spec, n);
        const double lambda = dicke::decay_rate(spec, st).to_double();
        const unsigned m = st.excitations();
        double out = 0.0;
        bool seed = true;
        for (std::size_t a = 0; a < d; ++a) {
          if (n[a] == 0) {
            continue;
          }
          seed = false;
          auto prev = n;
          --prev[a];
          const double w = spec.channel(a).to_double() * (m + 1.0) * n[a];
          out += w * integrate_fixed(
            [&](double tau) {return p(prev, t - tau) * std::exp(-lambda * tau);}, 0.0, t);
        }
        return seed ? std::exp(-lambda * t) : out;
      };
    auto table = dicke::solve<R>(spec);
    dicke::Lattice lattice(spec);
    for (std::size_t i = 0; i < lattice.size(); ++i) {
      auto s = lattice.state(i);
      std::vector<unsigned> n(s.begin(), s.end());
      auto closed = table.population(dicke::OccupationState(spec, n));
      for (double t : {0.1, 0.4, 1.2}) {
        const double reference = p(n, t);
        const double value = at(closed, t);
        EXPECT_NEAR(value, reference, 1e-8 * std::max(std::fabs(reference), 1e-6))
          << spec.describe() << " state " << i << " t = " << t;
      }
    }
  }
}

TEST(ExpPolySum, JsonRoundTripIsExact)
{
  dicke::SystemSpec spec(6, {RateValue(1)});
  auto s = dicke::intensity(dicke::solve_single_channel<R>(spec));
  auto back = dicke::exp_poly_sum_from_json<R>(dicke::to_json(s));
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back.terms()[i].coeff, s.terms()[i].coeff);
    EXPECT_EQ(back.terms()[i].power, s.terms()[i].power);
    EXPECT_EQ(back.terms()[i].rate, s.terms()[i].rate);
  }
  EXPECT_THROW(dicke::exp_poly_sum_from_json<R>(nlohmann::json::object()),
    dicke::ValidationError);
}

TEST(ExpPolySum, MergesEqualKeysAndRejectsNegativeRates)
{
  Sum s = term(1, 0, 2);
  s += term(2, 0, 2);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.terms()[0].coeff, R(3));
  EXPECT_THROW(term(1, 0, -1), dicke::ValidationError);
}

TEST(Precision, ExhaustionIsReportedNotTruncated)
{
  EXPECT_THROW(dicke::solve_single_channel<double>(dicke::SystemSpec(40, {RateValue(1)})),
    dicke::PrecisionError);
  EXPECT_THROW(dicke::solve_single_channel<R>(dicke::SystemSpec(60, {RateValue(1)})),
    dicke::PrecisionError);
  EXPECT_NO_THROW(dicke::solve_single_channel<dicke::real512>(
      dicke::SystemSpec(60, {RateValue(1)})));
}

TEST(Precision, EscalationReachesAWorkingTier)
{
  dicke::SystemSpec spec(60, {RateValue(1)});
  int escalations = 0;
  const int bits = dicke::with_escalating_precision(
    128, [&]<class Real>() {
      dicke::solve_single_channel<Real>(spec);
      return dicke::precision_bits_v<Real>;
    }, [&](int, int) {++escalations;});
  EXPECT_GE(bits, 256);
  EXPECT_GE(escalations, 1);
  EXPECT_EQ(dicke::next_precision_bits(4096), 0);
  EXPECT_THROW(dicke::dispatch_precision(100, []<class Real>() {return 0;}),
    dicke::ValidationError);
}

}  // namespace
