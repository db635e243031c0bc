#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace binreg {

/// Sobol' sequence (Joe-Kuo direction numbers, Gray-code order, 32-bit
/// resolution), with optional Owen-style nested digital scrambling.
class SobolSequence {
 public:
  static constexpr int kMaxDim = 128;

  /// Unscrambled sequence of dimension d (throws when d > kMaxDim).
  explicit SobolSequence(int dim);

  /// First n points, row k = point k; point 0 is the origin. Coordinates
  /// are k/2^32 grid values in [0,1).
  Eigen::MatrixXd points(Eigen::Index n) const;

  /// First n points under nested uniform scrambling keyed by `seed`;
  /// coordinates land strictly inside (0,1). Each coordinate is marginally
  /// uniform and the point set stays a (t,m,d)-net with probability one.
  Eigen::MatrixXd scrambled_points(Eigen::Index n, std::uint64_t seed) const;

 private:
  int dim_;
  // direction_[j][b]: direction integer for bit b of dimension j.
  std::vector<std::array<std::uint32_t, 32>> direction_;
};

}  // namespace binreg
