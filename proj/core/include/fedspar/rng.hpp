#pragma once

#include <cstdint>

namespace fedspar {

// Counter-seeded xoshiro256++ generator. A generator is identified by a
// (seed, stream) pair; the 256-bit state is expanded from that pair with
// SplitMix64, so distinct stream ids give statistically independent
// substreams of the same master seed. The same (seed, stream) always
// replays the same draw sequence on every platform.
//
// Draw discipline (relied on by reproducibility tests):
//   * uniform()        consumes exactly one 64-bit word
//   * gaussian()       consumes exactly two uniforms (Box-Muller, no caching)
//   * laplace(b)       consumes exactly one uniform (inverse CDF), except
//                      that a raw draw mapping to the distribution's
//                      singular point is rejected and redrawn
//   * laplace(0) / gaussian_scaled(0) consume nothing and return 0
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Derive an independent generator from this one's identity. Derivation is
  // pure: it does not advance or read this generator's state.
  Rng substream(std::uint64_t tag) const;

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform();
  // Uniform on (0, 1); redraws the (probability 2^-53) zero case.
  double uniform_open();

  // Standard normal via Box-Muller; two uniforms per call, cosine branch.
  double gaussian();
  // N(0, stddev^2). stddev == 0 consumes no draws.
  double gaussian_scaled(double stddev);

  // Laplace with scale b via inverse CDF. b == 0 consumes no draws.
  double laplace(double scale);

  // Integer uniform on [0, bound) by rejection (unbiased).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_[4];
};

}  // namespace fedspar
