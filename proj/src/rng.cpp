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

#include "mde/rng.hpp"

#include <cmath>
#include <numbers>

namespace mde {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}  // namespace

std::uint64_t SplitMix64Mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t base, std::string_view tag,
                         std::uint64_t index) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return SplitMix64Mix(SplitMix64Mix(base ^ h) + index * kGolden);
}

std::uint64_t CounterRng::NextU64() {
  ++counter_;
  return SplitMix64Mix(key_ + counter_ * kGolden);
}

double CounterRng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double CounterRng::Normal() {
  const double u1 = 1.0 - Uniform();  // (0, 1], keeps the log finite
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::Below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection; unbiased.
  while (true) {
    const unsigned __int128 m =
        static_cast<unsigned __int128>(NextU64()) * bound;
    const auto low = static_cast<std::uint64_t>(m);
    if (low >= bound || low >= (0 - bound) % bound)
      return static_cast<std::uint64_t>(m >> 64);
  }
}

}  // namespace mde
