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

#ifndef DICKE__SYSTEM_HPP_
#define DICKE__SYSTEM_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/rate_value.hpp"

namespace dicke
{

/// N emitters decaying collectively through d channels with rates Gamma_alpha
/// (exact multiples of the rate unit).
class SystemSpec
{
public:
  SystemSpec(unsigned n_emitters, std::vector<RateValue> channels)
  : n_emitters_(n_emitters), channels_(std::move(channels))
  {
    if (n_emitters_ < 1) {
      throw ValidationError("SystemSpec: need at least one emitter");
    }
    if (channels_.empty()) {
      throw ValidationError("SystemSpec: need at least one decay channel");
    }
    for (std::size_t a = 0; a < channels_.size(); ++a) {
      if (!channels_[a].is_positive()) {
        throw ValidationError(
                "SystemSpec: channel " + std::to_string(a + 1) + " rate " +
                channels_[a].str() + " is not positive");
      }
    }
  }

  /// `d` channels of rate 1/d each.
  static SystemSpec balanced(unsigned n_emitters, unsigned d)
  {
    if (d < 1) {
      throw ValidationError("SystemSpec: need at least one decay channel");
    }
    return SystemSpec(n_emitters, std::vector<RateValue>(d, RateValue(1, d)));
  }

  /// Two channels with Gamma_1 = 1, Gamma_2 = ratio.
  static SystemSpec two_channel(unsigned n_emitters, const RateValue & ratio)
  {
    return SystemSpec(n_emitters, {RateValue(1), ratio});
  }

  unsigned n_emitters() const noexcept {return n_emitters_;}
  std::size_t n_channels() const noexcept {return channels_.size();}
  const std::vector<RateValue> & channels() const noexcept {return channels_;}
  const RateValue & channel(std::size_t a) const {return channels_.at(a);}

  RateValue total_rate() const
  {
    RateValue out(0);
    for (const auto & g : channels_) {
      out += g;
    }
    return out;
  }

  RateValue max_rate() const {return *std::max_element(channels_.begin(), channels_.end());}
  RateValue min_rate() const {return *std::min_element(channels_.begin(), channels_.end());}

  bool is_balanced() const
  {
    return std::all_of(
      channels_.begin(), channels_.end(),
      [&](const RateValue & g) {return g == channels_.front();});
  }

  std::string describe() const
  {
    std::ostringstream os;
    os << "N=" << n_emitters_ << " rates=";
    for (std::size_t a = 0; a < channels_.size(); ++a) {
      os << (a ? "," : "") << channels_[a];
    }
    return os.str();
  }

  friend bool operator==(const SystemSpec &, const SystemSpec &) = default;

private:
  unsigned n_emitters_;
  std::vector<RateValue> channels_;
};

/// Ground-level occupations (n_1, ..., n_d); m = N - sum n is the number of
/// remaining excitations.
class OccupationState
{
public:
  OccupationState(const SystemSpec & spec, std::vector<unsigned> occupations)
  : occupations_(std::move(occupations)), n_emitters_(spec.n_emitters())
  {
    if (occupations_.size() != spec.n_channels()) {
      throw ValidationError("OccupationState: expected " + std::to_string(spec.n_channels()) +
              " occupations, got " + std::to_string(occupations_.size()));
    }
    if (ground_count() > n_emitters_) {
      throw ValidationError("OccupationState: occupations exceed N");
    }
  }

  /// The fully inverted state (0, ..., 0).
  static OccupationState excited(const SystemSpec & spec)
  {
    return OccupationState(spec, std::vector<unsigned>(spec.n_channels(), 0));
  }

  const std::vector<unsigned> & occupations() const noexcept {return occupations_;}
  unsigned operator[](std::size_t a) const {return occupations_.at(a);}
  std::size_t n_channels() const noexcept {return occupations_.size();}

  unsigned ground_count() const
  {
    return std::accumulate(occupations_.begin(), occupations_.end(), 0u);
  }

  unsigned excitations() const {return n_emitters_ - ground_count();}

  std::string str() const
  {
    std::string out = "(";
    for (std::size_t a = 0; a < occupations_.size(); ++a) {
      out += (a ? "," : "") + std::to_string(occupations_[a]);
    }
    return out + ")";
  }

  friend bool operator==(const OccupationState & a, const OccupationState & b)
  {
    return a.occupations_ == b.occupations_;
  }

private:
  std::vector<unsigned> occupations_;
  unsigned n_emitters_;
};

/// Total decay rate out of `state`: m * sum_alpha Gamma_alpha (n_alpha + 1).
/// Zero exactly on the ground simplex.
inline RateValue decay_rate(const SystemSpec & spec, const OccupationState & state)
{
  const unsigned m = state.excitations();
  if (m == 0) {
    return RateValue(0);
  }
  RateValue weight(0);
  for (std::size_t a = 0; a < spec.n_channels(); ++a) {
    weight += spec.channel(a) * RateValue(state[a] + 1);
  }
  return RateValue(m) * weight;
}

/// C(n + k, k) with saturation at SIZE_MAX.
inline std::size_t lattice_size(unsigned n_emitters, std::size_t d)
{
  long double v = 1.0L;
  for (std::size_t i = 1; i <= d; ++i) {
    v = v * static_cast<long double>(n_emitters + i) / static_cast<long double>(i);
  }
  if (v > 1.8e19L) {
    return SIZE_MAX;
  }
  return static_cast<std::size_t>(v + 0.5L);
}

/// Dense enumeration of the occupation lattice { n : sum n <= N }.
///
/// States are ordered by ground count q = sum n (so m decreases), then
/// lexicographically; every predecessor n - e_alpha has a smaller index.
class Lattice
{
public:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  explicit Lattice(const SystemSpec & spec, std::size_t cap = 2'000'000)
  : n_emitters_(spec.n_emitters()), d_(spec.n_channels())
  {
    std::size_t count = lattice_size(n_emitters_, d_);
    if (count > cap) {
      throw ResourceError(
              "occupation lattice has " +
              (count == SIZE_MAX ? std::string("> 1.8e19") : std::to_string(count)) +
              " states, above the cap of " + std::to_string(cap) +
              "; use the stochastic simulator for this size");
    }
    flat_.reserve(count * d_);
    level_begin_.reserve(n_emitters_ + 2);
    std::vector<unsigned> n(d_, 0);
    for (unsigned q = 0; q <= n_emitters_; ++q) {
      level_begin_.push_back(size());
      enumerate_level(q, 0, n);
    }
    level_begin_.push_back(size());

    index_.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
      index_.emplace(key(state(i)), i);
    }
    predecessors_.assign(size() * d_, kNone);
    for (std::size_t i = 0; i < size(); ++i) {
      auto s = state(i);
      std::vector<unsigned> p(s.begin(), s.end());
      for (std::size_t a = 0; a < d_; ++a) {
        if (p[a] > 0) {
          --p[a];
          predecessors_[i * d_ + a] = index_.at(key(p));
          ++p[a];
        }
      }
    }
  }

  std::size_t size() const noexcept {return flat_.size() / d_;}
  std::size_t n_channels() const noexcept {return d_;}
  unsigned n_emitters() const noexcept {return n_emitters_;}

  std::span<const unsigned> state(std::size_t i) const
  {
    return {flat_.data() + i * d_, d_};
  }

  unsigned excitations(std::size_t i) const
  {
    auto s = state(i);
    return n_emitters_ - std::accumulate(s.begin(), s.end(), 0u);
  }

  /// Index of n - e_alpha, or kNone when n_alpha = 0.
  std::size_t predecessor(std::size_t i, std::size_t alpha) const
  {
    return predecessors_[i * d_ + alpha];
  }

  std::size_t index_of(std::span<const unsigned> occupations) const
  {
    if (occupations.size() != d_) {
      throw ValidationError("Lattice: wrong number of occupations");
    }
    auto it = index_.find(key(occupations));
    if (it == index_.end()) {
      throw ValidationError("Lattice: state outside the lattice");
    }
    return it->second;
  }

  /// Indices [begin, end) of the states with ground count q = N - m.
  std::pair<std::size_t, std::size_t> level(unsigned q) const
  {
    return {level_begin_.at(q), level_begin_.at(q + 1)};
  }

private:
  static std::string key(std::span<const unsigned> s)
  {
    return std::string(reinterpret_cast<const char *>(s.data()), s.size() * sizeof(unsigned));
  }

  void enumerate_level(unsigned remaining, std::size_t pos, std::vector<unsigned> & n)
  {
    if (pos + 1 == d_) {
      n[pos] = remaining;
      flat_.insert(flat_.end(), n.begin(), n.end());
      return;
    }
    for (unsigned v = remaining + 1; v-- > 0; ) {
      n[pos] = v;
      enumerate_level(remaining - v, pos + 1, n);
    }
  }

  unsigned n_emitters_;
  std::size_t d_;
  std::vector<unsigned> flat_;
  std::vector<std::size_t> level_begin_;
  std::vector<std::size_t> predecessors_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace dicke

#endif  // DICKE__SYSTEM_HPP_
