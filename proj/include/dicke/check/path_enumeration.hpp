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

#ifndef DICKE__CHECK__PATH_ENUMERATION_HPP_
#define DICKE__CHECK__PATH_ENUMERATION_HPP_

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/exp_poly_sum.hpp"
#include "dicke/precision.hpp"
#include "dicke/system.hpp"

namespace dicke::check
{

/// Number of distinct jump orderings that end in `target`:
/// (sum n)! / prod n_alpha!.
inline std::uint64_t path_count(const std::vector<unsigned> & target)
{
  // built as a product of binomials so it stays exact in 64 bits
  std::uint64_t out = 1;
  unsigned placed = 0;
  for (unsigned k : target) {
    for (unsigned i = 1; i <= k; ++i) {
      const std::uint64_t num = placed + i;
      if (out > UINT64_MAX / num) {
        return UINT64_MAX;
      }
      out = out * num / i;
    }
    placed += k;
  }
  return out;
}

/// C_n = prod Gamma_alpha^{n_alpha} N! prod n_alpha! / m!, the product of
/// the jump rates along any single path into `target`.
template<class Real>
Real path_prefactor(const SystemSpec & spec, const std::vector<unsigned> & target)
{
  const unsigned q = std::accumulate(target.begin(), target.end(), 0u);
  const unsigned m = spec.n_emitters() - q;
  Real out = factorial<Real>(spec.n_emitters()) / factorial<Real>(m);
  for (std::size_t a = 0; a < target.size(); ++a) {
    const Real g = spec.channel(a).template to<Real>();
    for (unsigned k = 0; k < target[a]; ++k) {
      out *= g;
    }
    out *= factorial<Real>(target[a]);
  }
  return out;
}

/// Population of `target` as the literal sum over every jump ordering,
///   p_n(t) = C_n sum_paths (e^{-Lambda_0 t} * e^{-Lambda_1 t} * ... * e^{-Lambda_q t}),
/// with each path convolved from scratch. Refuses targets with more than
/// `max_paths` orderings.
template<class Real>
ExpPolySum<Real> path_sum_population(
  const SystemSpec & spec, const std::vector<unsigned> & target, std::uint64_t max_paths = 10'000)
{
  const std::size_t d = spec.n_channels();
  if (target.size() != d) {
    throw ValidationError("path_sum_population: wrong number of occupations");
  }
  const unsigned q = std::accumulate(target.begin(), target.end(), 0u);
  if (q > spec.n_emitters()) {
    throw ValidationError("path_sum_population: target outside the lattice");
  }
  if (path_count(target) > max_paths) {
    throw ResourceError(
            "path_sum_population: more than " + std::to_string(max_paths) + " paths");
  }

  std::vector<unsigned> state(d, 0);
  std::vector<RateValue> rates;
  rates.reserve(q + 1);
  rates.push_back(decay_rate(spec, OccupationState(spec, state)));

  ExpPolySum<Real> total;
  auto walk = [&](auto & self) -> void {
      if (rates.size() == q + 1) {
        auto chain = ExpPolySum<Real>::exponential(rates[0]);
        for (std::size_t j = 1; j < rates.size(); ++j) {
          chain = convolve(chain, ExpPolySum<Real>::exponential(rates[j]));
        }
        total += chain;
        return;
      }
      for (std::size_t a = 0; a < d; ++a) {
        if (state[a] == target[a]) {
          continue;
        }
        ++state[a];
        rates.push_back(decay_rate(spec, OccupationState(spec, state)));
        self(self);
        rates.pop_back();
        --state[a];
      }
    };
  walk(walk);
  total *= path_prefactor<Real>(spec, target);
  return total;
}

}  // namespace dicke::check

#endif  // DICKE__CHECK__PATH_ENUMERATION_HPP_
