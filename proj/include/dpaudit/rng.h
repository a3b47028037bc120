// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded, splittable randomness with a fixed algorithm:
//
//   stream(seed, key) = std::mt19937_64(SplitMix64(seed ^ FNV1a64(key)))
//
// std::mt19937_64 is fully specified by the C++ standard, so draws are
// identical on every conforming platform. Only raw 64-bit outputs are used;
// std::*_distribution classes are implementation-defined and are avoided.

#ifndef DPAUDIT_RNG_H_
#define DPAUDIT_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace dpaudit {

using RandomStream = std::mt19937_64;

std::uint64_t Fnv1a64(std::string_view bytes);
std::uint64_t SplitMix64(std::uint64_t x);

// Independent stream for `key` under `seed`.
RandomStream MakeStream(std::uint64_t seed, std::string_view key);

// Uniform on the open interval (0, 1) with 53-bit resolution.
double UniformOpen01(RandomStream& rng);

// Uniform integer in [0, n), unbiased (rejection on the top range). n > 0.
std::uint64_t UniformIndex(RandomStream& rng, std::uint64_t n);

// One draw from Laplace(0, scale) by inverse CDF:
//   u ~ Uniform(-1/2, 1/2), x = -scale * sign(u) * ln(1 - 2|u|).
// Throws std::invalid_argument unless scale > 0 and finite.
double SampleLaplace(double scale, RandomStream& rng);

}  // namespace dpaudit

#endif  // DPAUDIT_RNG_H_
