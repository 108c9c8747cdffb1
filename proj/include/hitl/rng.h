// Copyright 2026 The hitl-workbench Authors.
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

#ifndef HITL_RNG_H_
#define HITL_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace hitl {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent child seed from `base` along a path of stream ids.
// Streams with different paths never share a seed derivation chain, so runs
// and components can be re-created in isolation.
constexpr uint64_t DeriveSeed(uint64_t base, std::span<const uint64_t> path) {
  uint64_t s = MixSeed(base);
  for (uint64_t p : path) s = MixSeed(s ^ MixSeed(p + 0x632be59bd9b4e019ULL));
  return s;
}

constexpr uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> path) {
  return DeriveSeed(base, std::span<const uint64_t>(path.begin(), path.size()));
}

inline double Uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Uniform integer in [0, n).
inline int UniformIndex(Rng& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

}  // namespace hitl

#endif  // HITL_RNG_H_
