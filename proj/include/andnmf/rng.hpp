#pragma once

#include <cstdint>
#include <random>

namespace andnmf {

// Mixes (seed, stream) into an independent 64-bit seed (SplitMix64 finalizer).
// Used for per-column and per-component streams so that generation is
// independent of scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Seeded generator with fixed sampling algorithms.
//
// std::mt19937_64 output is fully specified by the standard, but the standard
// distributions are not, so the transforms are implemented here:
//   uniform   53 high bits of one draw, scaled to [0, 1)
//   normal    Marsaglia polar method, second variate cached
//   gamma     Marsaglia-Tsang squeeze; shape < 1 via Gamma(shape + 1) * U^(1/shape)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  // Natural log of a Gamma(shape, 1) draw; stays finite for tiny shapes where
  // the draw itself would underflow.
  double log_gamma_variate(double shape);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace andnmf
