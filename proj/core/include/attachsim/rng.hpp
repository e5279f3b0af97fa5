#pragma once

#include <cstdint>
#include <random>

namespace attachsim {

// Seeded random stream. Every stochastic draw in the simulator goes through one
// of these; nothing is seeded from the wall clock.
//
// Substreams are derived from the construction seed, not from the current
// state, so `substream(k)` is stable no matter how much the parent was used.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  RngStream substream(std::uint64_t key) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; one pair per call, the sine half is dropped.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key);

}  // namespace attachsim
