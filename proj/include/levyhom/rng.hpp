#pragma once

#include <cstdint>
#include <initializer_list>

namespace levyhom {

// All randomness in the library is counter-based: every random quantity is a
// pure function of (seed, stream, counter words).  Re-evaluating with the
// same inputs is bit-identical on every platform; there is no hidden
// generator state to advance.

// splitmix64 finalizer.
inline uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

inline uint64_t hash_words(uint64_t seed, std::initializer_list<uint64_t> words) {
  uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ull);
  for (uint64_t w : words) h = mix64(h + 0x9e3779b97f4a7c15ull + w);
  return h;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double u01(uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Sequential sampler for deterministic validation scans and test properties.
class SeqRng {
 public:
  explicit SeqRng(uint64_t seed) : seed_(seed) {}
  double next() { return u01(hash_words(seed_, {ctr_++})); }
  double next_in(double lo, double hi) { return lo + (hi - lo) * next(); }
  uint64_t next_u64() { return hash_words(seed_, {ctr_++}); }

 private:
  uint64_t seed_;
  uint64_t ctr_ = 0;
};

}  // namespace levyhom
