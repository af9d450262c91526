#include "fedspar/rng.hpp"

#include <cmath>

namespace fedspar {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  // Absorb both identity words through SplitMix64 before expanding the
  // state so that nearby (seed, stream) pairs decorrelate.
  std::uint64_t x = seed;
  x ^= 0xd1b54a32d192ed03ULL + splitmix64(x);
  x ^= stream + 0x8cb92ba72f3d8dd7ULL;
  for (auto& w : state_) w = splitmix64(x);
  // xoshiro must not start from the all-zero state.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

Rng Rng::substream(std::uint64_t tag) const {
  std::uint64_t x = stream_ ^ 0x9e3779b97f4a7c15ULL;
  x += splitmix64(x) ^ tag;
  return Rng(seed_, splitmix64(x));
}

std::uint64_t Rng::next_u64() {
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

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

double Rng::gaussian() {
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double Rng::gaussian_scaled(double stddev) {
  if (stddev == 0.0) return 0.0;
  return stddev * gaussian();
}

double Rng::laplace(double scale) {
  if (scale == 0.0) return 0.0;
  // u uniform on (-1/2, 1/2); x = -b sgn(u) ln(1 - 2|u|).
  double u;
  do {
    u = uniform() - 0.5;
  } while (u == -0.5);
  const double a = 1.0 - 2.0 * std::fabs(u);
  const double mag = -scale * std::log(a);
  return u < 0.0 ? -mag : mag;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x > limit);
  return x % bound;
}

}  // namespace fedspar
