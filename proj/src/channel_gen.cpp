#include "greenbf/channel_gen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace greenbf::bench {

namespace {

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double uniform_open(std::mt19937_64& eng) {
  // In (0, 1]; never 0 so log stays finite.
  return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t state = base;
  uint64_t h = splitmix64(state);
  state ^= a * 0xff51afd7ed558ccdull;
  h ^= splitmix64(state);
  state ^= b * 0xc4ceb9fe1a85ec53ull;
  h ^= splitmix64(state);
  state ^= c * 0x2545f4914f6cdd1dull;
  h ^= splitmix64(state);
  return h;
}

Channel gen_channel(uint64_t seed, int n_users, int n_antennas,
                    double pathloss_scale) {
  if (n_users <= 0 || n_antennas <= 0)
    throw std::invalid_argument("gen_channel: dimensions must be positive");
  if (pathloss_scale < 0.0)
    throw std::invalid_argument("gen_channel: pathloss_scale must be >= 0");

  std::mt19937_64 eng(seed);
  const double amp = std::sqrt(pathloss_scale / 2.0);
  CxMatrix entries(n_users, n_antennas);
  for (int k = 0; k < n_users; ++k) {
    for (int n = 0; n < n_antennas; ++n) {
      const double u1 = uniform_open(eng);
      const double u2 = uniform_open(eng);
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double theta = 2.0 * std::numbers::pi * u2;
      entries(k, n) = Complex(amp * r * std::cos(theta),
                              amp * r * std::sin(theta));
    }
  }
  return Channel{std::move(entries)};
}

double noise_power(double psd_dbm_per_hz, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0))
    throw std::invalid_argument("noise_power: bandwidth must be > 0");
  return std::pow(10.0, (psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz) - 30.0) / 10.0);
}

}  // namespace greenbf::bench
