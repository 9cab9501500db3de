/*
 * Copyright 2026 The mdeval Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Counter-based SplitMix64 streams.
//
// Draw i of a stream keyed by `key` is Mix(key + (i + 1) * 0x9E3779B97F4A7C15),
// with Mix the SplitMix64 finalizer. Uniforms take the top 53 bits; normals use
// Box-Muller on two consecutive uniforms and discard the sine half. None of
// this touches <random> distributions, whose output is library-specific.

#ifndef MDE_RNG_HPP_
#define MDE_RNG_HPP_

#include <cstdint>
#include <string_view>

namespace mde {

std::uint64_t SplitMix64Mix(std::uint64_t z);

// FNV-1a of `tag` folded into `base` and `index`, then mixed. Used to give
// every dataset, shift and model its own independent stream.
std::uint64_t DeriveSeed(std::uint64_t base, std::string_view tag,
                         std::uint64_t index = 0);

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t NextU64();
  // [0, 1)
  double Uniform();
  double Normal();
  // Uniform integer in [0, bound). `bound` must be > 0.
  std::uint64_t Below(std::uint64_t bound);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mde

#endif  // MDE_RNG_HPP_
