#pragma once

#include <cstdint>

namespace mmc {

// splitmix64, used to derive well-mixed seeds from a master seed.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** generator. Self-contained so that streams are identical across
// platforms and standard-library versions.
class Xoshiro256 {
 public:
  explicit Xoshiro256(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) using the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  uint64_t s_[4];
};

// Independent stream for replication `index` under a master seed. Adding
// replications never perturbs the streams of earlier ones.
inline Xoshiro256 replication_stream(uint64_t master_seed, uint64_t index) {
  uint64_t mix = master_seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  return Xoshiro256(splitmix64(mix));
}

}  // namespace mmc
