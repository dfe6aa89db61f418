#pragma once

#include <array>

namespace forcediff::data {

// Tolerance on | ||q|| - 1 | inside which a quaternion is renormalized.
inline constexpr double kQuaternionNormTolerance = 1e-3;

// Continuous 6-D rotation representation: the first two columns of the
// rotation matrix of q = (w, x, y, z), column-major. q and -q map to the same
// output. Throws DataError when q is not unit length within tolerance.
std::array<double, 6> quat_to_6d(const std::array<double, 4>& q);

}  // namespace forcediff::data
