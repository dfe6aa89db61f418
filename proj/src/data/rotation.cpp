#include "forcediff/data/rotation.hpp"

#include <cmath>
#include <string>

#include "forcediff/errors.hpp"

namespace forcediff::data {

std::array<double, 6> quat_to_6d(const std::array<double, 4>& q) {
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) >= kQuaternionNormTolerance) {
    throw DataError("quaternion norm " + std::to_string(norm) + " is not within " +
                    std::to_string(kQuaternionNormTolerance) + " of 1");
  }
  const double w = q[0] / norm, x = q[1] / norm, y = q[2] / norm, z = q[3] / norm;
  return {
      1.0 - 2.0 * (y * y + z * z),  // R00
      2.0 * (x * y + w * z),        // R10
      2.0 * (x * z - w * y),        // R20
      2.0 * (x * y - w * z),        // R01
      1.0 - 2.0 * (x * x + z * z),  // R11
      2.0 * (y * z + w * x),        // R21
  };
}

}  // namespace forcediff::data
