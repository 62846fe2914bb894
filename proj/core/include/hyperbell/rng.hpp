// Copyright 2026 The hyperbell Authors
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

// Counter-based substreams: every (seed, stream, index) triple names an
// independent, reproducible generator, so a Monte Carlo result never depends
// on the order in which bins or resamples are evaluated.

#include <cstdint>
#include <random>
#include <string_view>

namespace hyperbell {

/// Identifies the generator recipe. Bump the suffix whenever the recipe (or
/// the sampling algorithm built on it) changes output for a fixed seed.
inline constexpr std::string_view kRngName = "splitmix64-mt19937_64/v1";

/// Stream identifiers, one per consumer.
enum class RngStream : std::uint64_t {
  Histogram = 1,
  Tomography = 2,
  Bootstrap = 3,
  Polarization = 4,
  Search = 5,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, RngStream stream, std::uint64_t index) {
  const std::uint64_t k0 = splitmix64(seed);
  const std::uint64_t k1 = splitmix64(k0 ^ static_cast<std::uint64_t>(stream));
  const std::uint64_t k2 = splitmix64(k1 ^ splitmix64(index));
  const std::uint64_t k3 = splitmix64(k2);
  std::seed_seq seq{static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k2 >> 32),
                    static_cast<std::uint32_t>(k3), static_cast<std::uint32_t>(k3 >> 32)};
  return std::mt19937_64(seq);
}

/// Poisson draw that accepts a zero mean.
template <typename Engine>
std::int64_t poisson_draw(Engine& engine, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(engine);
}

}  // namespace hyperbell
