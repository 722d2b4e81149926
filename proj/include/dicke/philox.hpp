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

#ifndef DICKE__PHILOX_HPP_
#define DICKE__PHILOX_HPP_

#include <array>
#include <cstdint>

namespace dicke
{

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is addressed by a 64-bit key (the master seed) and the upper
/// half of the counter (the stream index), so trajectory k always sees the
/// same numbers no matter which thread draws them or in which order.
class Philox4x32
{
public:
  using block = std::array<std::uint32_t, 4>;

  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr block generate(block ctr, std::uint64_t key)
  {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
      ctr = block{
        static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
        static_cast<std::uint32_t>(p1),
        static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
        static_cast<std::uint32_t>(p0)};
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return ctr;
  }
};

/// Sequential draws from stream `stream` of the generator keyed by `seed`.
class PhiloxStream
{
public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream)
  : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64()
  {
    if (used_ == 2) {
      refill();
    }
    const std::uint64_t out =
      (std::uint64_t(buffer_[2 * used_]) << 32) | buffer_[2 * used_ + 1];
    ++used_;
    return out;
  }

  /// Uniform on (0, 1] with 53 random bits; never returns 0.
  double uniform_pos()
  {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform()
  {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t blocks_used() const noexcept {return counter_;}

private:
  void refill()
  {
    buffer_ = Philox4x32::generate(
      {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
      seed_);
    ++counter_;
    used_ = 0;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32::block buffer_{};
  int used_ = 2;
};

/// SplitMix64 finalizer, used to derive independent seeds for sweep points.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace dicke

#endif  // DICKE__PHILOX_HPP_
