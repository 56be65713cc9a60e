// Copyright 2026 The vilcb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VILCB_RNG_H_
#define VILCB_RNG_H_

#include <cstdint>
#include <initializer_list>

namespace vilcb {

// Counter-based random numbers built on the SplitMix64 finalizer.
//
// Stream-splitting rule: sample i of a dataset with seed `seed` reads from
// the substream keyed Hash64({seed, i}); its k-th draw is
// Mix64(key + (k + 1) * kGolden). No state is shared between substreams, so
// any subset of samples can be regenerated independently and in any order.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t Mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

// Order-sensitive hash of a word sequence.
constexpr std::uint64_t Hash64(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (std::uint64_t w : words) h = Mix64(h ^ Mix64(w + kGolden));
  return h;
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t NextU64() {
    ++counter_;
    return Mix64(key_ + counter_ * kGolden);
  }
  // Uniform on [0, 1) with 53 random bits.
  constexpr double NextUniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace vilcb

#endif  // VILCB_RNG_H_
