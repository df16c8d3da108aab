// Copyright 2026 The iwies Authors.
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

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace iwies {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Counter-based stream: the k-th word is mix64(key + (k + 1) * gamma), so any
/// word is addressable without replaying the stream.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterStream(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * kGoldenGamma);
  }

  // UniformRandomBitGenerator interface over the sequential counter.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return at(counter_++); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return to_unit(operator()()); }
  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  std::uint64_t key() const noexcept { return key_; }

  static constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fills `out` with standard normals from the stream keyed by `key`
/// (Marsaglia polar method). The output depends only on (key, out.size()).
inline void fill_standard_normal(std::uint64_t key, std::span<double> out) {
  CounterStream stream(key);
  const std::size_t n = out.size();
  std::size_t k = 0;
  while (k < n) {
    double u, v, s;
    do {
      u = 2.0 * stream.uniform() - 1.0;
      v = 2.0 * stream.uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    out[k++] = u * f;
    if (k < n) out[k++] = v * f;
  }
}

/// Seed derivation shared by every party of a run. stream_seed is injective
/// in (generation, worker) for generation, worker < 2^32.
class SeedSchedule {
 public:
  SeedSchedule() = default;
  explicit SeedSchedule(std::uint64_t master_seed) : master_seed_(master_seed) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }

  std::uint64_t stream_seed(std::uint64_t generation,
                            std::uint64_t worker) const noexcept {
    const std::uint64_t packed = (generation << 32) | (worker & 0xffffffffULL);
    return mix64(mix64(master_seed_) + packed);
  }

  /// Independent schedule for a sub-experiment (phase, run, trial, ...).
  SeedSchedule fork(std::uint64_t tag) const noexcept {
    return SeedSchedule(mix64(master_seed_ ^ mix64(tag + kGoldenGamma)));
  }

  friend bool operator==(const SeedSchedule&, const SeedSchedule&) = default;

 private:
  std::uint64_t master_seed_ = 0;
};

/// Sequential generator for one-off draws (initialization, task sampling).
inline CounterStream make_stream(std::uint64_t seed, std::uint64_t tag = 0) {
  return CounterStream(mix64(mix64(seed) ^ (tag * kGoldenGamma)));
}

}  // namespace iwies
