#include "binreg/sobol.hpp"

#include <bit>

#include "binreg/errors.hpp"
#include "binreg/rng.hpp"
#include "binreg/sobol_directions.hpp"

namespace binreg {

SobolSequence::SobolSequence(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim)
    throw ValidationError("SobolSequence: dimension must be in [1, " +
                          std::to_string(kMaxDim) + "], got " + std::to_string(dim));
  direction_.resize(dim);
  // First dimension: van der Corput.
  for (int b = 0; b < 32; ++b) direction_[0][b] = 1u << (31 - b);
  for (int j = 1; j < dim; ++j) {
    const std::uint32_t p = detail::kSobolPoly[j];
    const int s = std::bit_width(p) - 1;
    auto& v = direction_[j];
    for (int b = 0; b < s && b < 32; ++b)
      v[b] = detail::kSobolMInit[j][b] << (31 - b);
    for (int b = s; b < 32; ++b) {
      std::uint32_t newv = v[b - s] ^ (v[b - s] >> s);
      for (int k = 1; k <= s - 1; ++k)
        if ((p >> (s - k)) & 1u) newv ^= v[b - k];
      v[b] = newv;
    }
  }
}

Eigen::MatrixXd SobolSequence::points(Eigen::Index n) const {
  Eigen::MatrixXd out(n, dim_);
  std::vector<std::uint32_t> state(dim_, 0u);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k > 0) {
      const int bit = std::countr_zero(static_cast<std::uint64_t>(k));
      for (int j = 0; j < dim_; ++j) state[j] ^= direction_[j][bit];
    }
    for (int j = 0; j < dim_; ++j)
      out(k, j) = static_cast<double>(state[j]) * 0x1.0p-32;
  }
  return out;
}

namespace {
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Nested uniform (Owen) scrambling in base 2: the flip applied to digit d
// depends only on the d leading digits of the unscrambled value, so the
// same random permutation tree is shared by all points.
inline std::uint32_t owen_scramble(std::uint32_t v, std::uint64_t key) {
  std::uint32_t out = 0;
  for (int d = 0; d < 32; ++d) {
    const std::uint32_t prefix = d == 0 ? 0u : (v >> (32 - d));
    const std::uint64_t h =
        mix64(key ^ ((static_cast<std::uint64_t>(d) << 56) | prefix) * 0x9e3779b97f4a7c15ULL);
    const std::uint32_t bit = (v >> (31 - d)) & 1u;
    out |= ((bit ^ static_cast<std::uint32_t>(h & 1u)) << (31 - d));
  }
  return out;
}
}  // namespace

Eigen::MatrixXd SobolSequence::scrambled_points(Eigen::Index n, std::uint64_t seed) const {
  Eigen::MatrixXd out(n, dim_);
  std::vector<std::uint64_t> keys(dim_);
  for (int j = 0; j < dim_; ++j)
    keys[j] = mix64(seed + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(j + 1));
  std::vector<std::uint32_t> state(dim_, 0u);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k > 0) {
      const int bit = std::countr_zero(static_cast<std::uint64_t>(k));
      for (int j = 0; j < dim_; ++j) state[j] ^= direction_[j][bit];
    }
    for (int j = 0; j < dim_; ++j) {
      const std::uint32_t s = owen_scramble(state[j], keys[j]);
      out(k, j) = (static_cast<double>(s) + 0.5) * 0x1.0p-32;
    }
  }
  return out;
}

}  // namespace binreg
