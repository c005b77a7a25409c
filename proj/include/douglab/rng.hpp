#pragma once

#include <cstdint>

namespace douglab {

// Counter-derived random stream: the state is seeded by hashing
// (master_seed, stream_id), so stream r of a batch can be created on any
// worker in any order and still produce the same sequence. The generator is
// xoshiro256++ with splitmix64 seeding; doubles come from the top 53 bits and
// normals from Box-Muller, so sequences are bit-identical across platforms
// (no std::*_distribution involved).
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  // Uniform on (lo, hi) shifted from uniform().
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (one spare cached).
  double normal();
  // +1 or -1 with equal probability.
  double rademacher();
  // Exp(1) - 1: mean 0, variance 1, skewed.
  double centered_exponential();

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
};

}  // namespace douglab
