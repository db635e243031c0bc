#pragma once

#include <cmath>
#include <cstdint>

#include "binreg/special.hpp"

namespace binreg {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace detail

/// Deterministic, portable random stream (xoshiro256++ core, splitmix64
/// seeding). Substreams are derived by keyed hashing so that results are
/// reproducible for a given (seed, substream path) regardless of how work
/// is partitioned across threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {
    std::uint64_t s = key;
    for (auto& w : state_) w = detail::splitmix64(s);
  }

  /// Independent stream derived from this stream's key and a salt.
  RngStream substream(std::uint64_t salt) const {
    std::uint64_t s = key_ ^ (salt + 0x632be59bd9b4e019ULL);
    return RngStream(detail::splitmix64(s));
  }
  RngStream substream(std::uint64_t a, std::uint64_t b) const {
    return substream(a).substream(b);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0,1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  double normal() { return norm_quantile(uniform()); }

  double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

  /// Gamma(shape, rate) via Marsaglia-Tsang; shape boosting below 1.
  double gamma(double shape, double rate = 1.0) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
    }
  }

  double chi2(double dof) { return gamma(0.5 * dof, 0.5); }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t state_[4];
};

}  // namespace binreg
