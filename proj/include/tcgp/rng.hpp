// Copyright 2026 The TCGP Authors.
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

#ifndef TCGP_RNG_HPP_
#define TCGP_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace tcgp {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t HashTag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed of the named substream `tag` (index `i`) below `parent`.
constexpr std::uint64_t DeriveSeed(std::uint64_t parent, std::string_view tag,
                                   std::uint64_t i = 0) {
  return Mix64(Mix64(parent ^ HashTag(tag)) + Mix64(i + 1));
}

inline Rng MakeRng(std::uint64_t seed) { return Rng(seed); }

// Poisson draw truncated below at `min_value`.
inline int PoissonAtLeast(Rng& rng, double mean, int min_value = 1) {
  std::poisson_distribution<int> d(mean);
  int v = d(rng);
  return v < min_value ? min_value : v;
}

}  // namespace tcgp

#endif  // TCGP_RNG_HPP_
