#pragma once

#include <cstdint>

namespace ldct {

// Counter-based pseudo-random stream. Each stream is keyed by up to three
// 64-bit words (seed, and e.g. view/bin or draw/site indices) so independent
// streams can be opened anywhere without shared state; draws within a stream
// advance a counter through a splitmix64-style permutation. Integer-only,
// so sequences are identical across platforms.
class CounterRng {
 public:
  explicit CounterRng(uint64_t k0, uint64_t k1 = 0, uint64_t k2 = 0);

  uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller (consumes two uniforms per pair).
  double gaussian();
  // Poisson with the given mean: CDF inversion below mean 10, PTRS-style
  // transformed rejection above.
  uint64_t poisson(double mean);

 private:
  uint64_t state_;
  double spare_gauss_ = 0.0;
  bool has_spare_ = false;
};

// Stateless 64-bit mix (splitmix64 finalizer); used for key derivation.
uint64_t mix64(uint64_t x);

}  // namespace ldct
