// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace splatwatt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Degree-0 SH basis constant; decoded color = 0.5 + kShC0 * coefficient.
inline constexpr double kShC0 = 0.28209479177387814;

inline Vec3 decode_dc_color(const Vec3& dc) {
  return (Vec3::Constant(0.5) + kShC0 * dc).cwiseMax(0.0);
}

// Error classes map onto distinct CLI exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ComputeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace splatwatt
