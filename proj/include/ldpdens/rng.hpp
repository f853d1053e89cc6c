//
// Copyright 2026 The ldpdens Authors
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
//

#ifndef LDPDENS_RNG_HPP_
#define LDPDENS_RNG_HPP_

#include <cstdint>

namespace ldpdens {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Used both as a stream-key
// mixer and to expand a 64-bit key into engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a child stream key from a parent key and a tag. Chaining calls
// gives a documented, order-independent split: the stream for (seed, i, l)
// is derive_key(derive_key(seed, i), l) no matter which worker draws it.
inline std::uint64_t derive_key(std::uint64_t parent, std::uint64_t tag) {
  std::uint64_t s = parent ^ (0x9e3779b97f4a7c15ULL + (tag << 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  return a ^ (b >> 1) ^ tag;
}

// xoshiro256++ (Blackman & Vigna 2019). Small state, fast, and cheap to
// reseed, which matters because every (record, block) pair gets its own
// stream.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t key = 0) { seed(key); }

  void seed(std::uint64_t key) {
    // Expand the key through splitmix64 as recommended by the authors.
    for (auto& word : state_) word = splitmix64(key);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Bernoulli(p) draw for p in [0, 1].
  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in {0, ..., bound - 1} (Lemire's rejection method).
  std::uint64_t below(std::uint64_t bound) {
    for (;;) {
      std::uint64_t x = (*this)();
      __uint128_t m = static_cast<__uint128_t>(x) * bound;
      auto lo = static_cast<std::uint64_t>(m);
      if (lo >= bound || lo >= (-bound) % bound) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace ldpdens

#endif  // LDPDENS_RNG_HPP_
