// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splatwatt/types.hpp"

namespace splatwatt {

/// One anisotropic Gaussian primitive. All fields are stored decoded:
/// scales are linear scene units (strictly positive), opacity is in [0,1],
/// rotation is a unit quaternion. `color_dc` holds degree-0 SH coefficients;
/// higher-order coefficients are preserved through I/O but ignored by shading.
struct GaussianPoint {
  Vec3 position = Vec3::Zero();
  Vec3 scale = Vec3::Ones();
  Quat rotation = Quat::Identity();
  double opacity = 1.0;
  Vec3 color_dc = Vec3::Zero();
  std::vector<float> sh_rest;

  Vec3 rgb() const { return decode_dc_color(color_dc); }
};

struct Scene {
  std::string id;
  std::vector<GaussianPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  // Throws ComputeError naming the offending point/field on violation.
  void validate() const;

  // Axis-aligned bounds of point positions. Throws on empty scene.
  void bounds(Vec3& lo, Vec3& hi) const;
};

/// Pinhole camera. `rotation`/`translation` map world to camera coordinates
/// (x right, y down, z forward); a world point p images at
/// (fx*xc/zc + cx, fy*yc/zc + cy).
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double fx = 100.0;
  double fy = 100.0;
  double cx = 64.0;
  double cy = 64.0;
  int width = 128;
  int height = 128;

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  void validate() const;
};

struct GeneratorSpec {
  std::size_t count = 1000;
  Vec3 extent = Vec3(1.0, 1.0, 1.0);  // box half-widths around origin
  // Per-channel mean of the DC coefficients; presets map onto this.
  Vec3 color_mean = Vec3::Zero();
  double color_stddev = 0.55;
  double log_scale_mean = -3.4;  // median scale = exp(mean), scene units
  double log_scale_stddev = 0.45;
  double opacity_lo = 0.35;
  double opacity_hi = 0.95;
  std::uint64_t seed = 1;
  std::string id = "synthetic";

  // "neutral", "blue-heavy", "red-heavy", "warm"
  static GeneratorSpec with_color_profile(GeneratorSpec base, const std::string& profile);
};

struct PoseSpec {
  std::size_t count = 6;
  int width = 128;
  int height = 128;
  double fov_deg = 60.0;        // horizontal
  double radius_scale = 1.6;    // orbit radius = scale * bbox half-diagonal
  double elevation_lo_deg = -10.0;
  double elevation_hi_deg = 30.0;
};

// Deterministic in the seed: positions uniform in the extent box, scales
// log-normal, rotations uniform, colors normal around the channel means.
Scene generate_synthetic_scene(const GeneratorSpec& spec);

// Orbit poses around the scene bounding-box center, all looking at it.
// Deterministic in the seed. Throws ComputeError on degenerate extent.
std::vector<CameraPose> sample_poses(const Scene& scene, std::size_t n, std::uint64_t seed,
                                     const PoseSpec& spec = {});

}  // namespace splatwatt
