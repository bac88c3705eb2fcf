// Core scalar/matrix aliases shared across the library. Eigen is the only
// math dependency; everything downstream works in these types.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace bevplan {

using Scalar = double;

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using Mat = MatX<Scalar>;
using Vec = VecX<Scalar>;
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

inline constexpr Scalar kPi = 3.14159265358979323846;

// Normalizes an angle to (-pi, pi]. Angles already in range pass through
// unchanged (std::remainder is exact for |a| < pi).
inline Scalar wrap_angle(Scalar a) {
  Scalar r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

inline Mat2 rotation2(Scalar yaw) {
  const Scalar c = std::cos(yaw), s = std::sin(yaw);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

}  // namespace bevplan
