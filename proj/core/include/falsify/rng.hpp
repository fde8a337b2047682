#pragma once

#include <cstdint>
#include <random>

namespace falsify {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used for seed derivation only.
std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a base seed, a fixed stream tag, and an index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

namespace streams {
inline constexpr std::uint64_t kSampler = 0x73616d706c6572ULL;  // "sampler"
inline constexpr std::uint64_t kCase = 0x63617365ULL;           // "case"
}  // namespace streams

// Portable generator: the engine is std::mt19937_64, whose output sequence is fixed by
// the standard. The standard distributions are not, so the transforms below are our own:
//   uniform01     top 53 bits of one draw, scaled by 2^-53, in [0, 1)
//   uniform_index one draw modulo n, rejecting the lowest 2^64 mod n draws
//   normal        Box-Muller cosine branch, two draws per variate, no caching
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  // Uniform over [0, n); n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }
  double normal(double mean = 0.0, double sigma = 1.0);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace falsify
