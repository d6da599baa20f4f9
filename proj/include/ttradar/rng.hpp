// SPDX-License-Identifier: Apache-2.0
//
// ttradar: tensor-train denoising and parameter estimation for FMCW MIMO radar
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace ttradar {

// Counter-based normal generator. Draw k of stream `seed` is a pure function
// of (seed, k): SplitMix64 finalizer over seed ^ golden * (k + 1), then
// Box-Muller on two consecutive 53-bit uniforms.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1].
  double uniform(std::uint64_t counter) const {
    const std::uint64_t bits = mix(seed_ ^ mix(counter));
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
  }

  // Pair of independent standard normals for index k.
  std::pair<double, double> normal_pair(std::uint64_t k) const {
    const double u1 = uniform(2 * k), u2 = uniform(2 * k + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  std::uint64_t seed_;
};

}  // namespace ttradar
