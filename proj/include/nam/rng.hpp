#pragma once

#include <cstdint>
#include <vector>

namespace nam {

// xoshiro256** with splitmix64 seeding. Hand-rolled so that experiment
// results are reproducible across platforms and standard library versions;
// trial streams are derived from (master seed, grid index, trial index).
class Rng {
 public:
  explicit Rng(uint64_t seed = 1) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  static Rng derive(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t x = master;
    uint64_t mixed = splitmix64(x) ^ (a * 0x9e3779b97f4a7c15ull);
    mixed = splitmix64(mixed) ^ (b * 0xbf58476d1ce4e5b9ull);
    mixed = splitmix64(mixed) ^ (c * 0x94d049bb133111ebull);
    return Rng(splitmix64(mixed));
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [-half, half]
  double uniform_sym(double half) { return half * (2.0 * uniform() - 1.0); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  uint64_t below(uint64_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    uint64_t lo = static_cast<uint64_t>(m);
    if (lo < n) {
      uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  int below_int(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }

  bool coin() { return (next() & 1ull) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  static uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t state_[4];
};

}  // namespace nam
