// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/scene.hpp"

#include <cmath>
#include <limits>

#include "splatwatt/rng.hpp"

namespace splatwatt {

namespace {

bool finite3(const Vec3& v) { return v.allFinite(); }

}  // namespace

void Scene::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GaussianPoint& p = points[i];
    const std::string where = "point " + std::to_string(i);
    if (!finite3(p.position)) throw ComputeError(where + ": non-finite position");
    if (!finite3(p.scale) || p.scale.minCoeff() <= 0.0)
      throw ComputeError(where + ": scale must be strictly positive and finite");
    if (!finite3(p.color_dc)) throw ComputeError(where + ": non-finite color coefficients");
    if (!std::isfinite(p.opacity) || p.opacity < 0.0 || p.opacity > 1.0)
      throw ComputeError(where + ": opacity outside [0,1]");
    const double qn = p.rotation.coeffs().norm();
    if (!std::isfinite(qn) || std::abs(qn - 1.0) > 1e-6)
      throw ComputeError(where + ": rotation quaternion not unit norm");
    for (float c : p.sh_rest)
      if (!std::isfinite(c)) throw ComputeError(where + ": non-finite SH coefficient");
  }
}

void Scene::bounds(Vec3& lo, Vec3& hi) const {
  if (points.empty()) throw ComputeError("bounds of empty scene");
  lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  hi = -lo;
  for (const GaussianPoint& p : points) {
    lo = lo.cwiseMin(p.position);
    hi = hi.cwiseMax(p.position);
  }
}

void CameraPose::validate() const {
  if (width <= 0 || height <= 0) throw ComputeError("camera resolution must be positive");
  if (!(fx > 0.0) || !(fy > 0.0)) throw ComputeError("camera focal lengths must be positive");
}

GeneratorSpec GeneratorSpec::with_color_profile(GeneratorSpec base, const std::string& profile) {
  if (profile == "neutral") {
    base.color_mean = Vec3::Zero();
  } else if (profile == "blue-heavy") {
    base.color_mean = Vec3(-0.45, 0.0, 0.75);
  } else if (profile == "red-heavy") {
    base.color_mean = Vec3(0.75, 0.0, -0.45);
  } else if (profile == "warm") {
    base.color_mean = Vec3(0.5, 0.2, -0.3);
  } else {
    throw ConfigError("unknown color profile: " + profile);
  }
  return base;
}

Scene generate_synthetic_scene(const GeneratorSpec& spec) {
  if (spec.count < 1) throw ConfigError("generator: point count must be >= 1");
  if (spec.extent.minCoeff() <= 0.0) throw ConfigError("generator: extent must be positive");
  if (!(spec.opacity_lo > 0.0 && spec.opacity_hi < 1.0 && spec.opacity_lo <= spec.opacity_hi))
    throw ConfigError("generator: opacity range must satisfy 0 < lo <= hi < 1");

  Rng rng(spec.seed);
  Scene scene;
  scene.id = spec.id;
  scene.points.resize(spec.count);
  for (GaussianPoint& p : scene.points) {
    for (int a = 0; a < 3; ++a) p.position[a] = rng.uniform(-spec.extent[a], spec.extent[a]);
    for (int a = 0; a < 3; ++a)
      p.scale[a] = std::exp(rng.normal(spec.log_scale_mean, spec.log_scale_stddev));
    p.rotation = rng.unit_quaternion().normalized();
    p.opacity = rng.uniform(spec.opacity_lo, spec.opacity_hi);
    for (int a = 0; a < 3; ++a) p.color_dc[a] = rng.normal(spec.color_mean[a], spec.color_stddev);
  }
  scene.validate();
  return scene;
}

std::vector<CameraPose> sample_poses(const Scene& scene, std::size_t n, std::uint64_t seed,
                                     const PoseSpec& spec) {
  if (n < 1) throw ConfigError("pose sampling: n must be >= 1");
  Vec3 lo, hi;
  scene.bounds(lo, hi);
  const Vec3 center = 0.5 * (lo + hi);
  double half_diag = 0.5 * (hi - lo).norm();
  if (!(half_diag > 0.0)) {
    if (scene.size() > 1) throw ComputeError("pose sampling: degenerate scene extent");
    half_diag = 1.0;  // single point: any orbit radius works
  }

  const double radius = spec.radius_scale * half_diag / std::tan(0.5 * spec.fov_deg * M_PI / 180.0);
  const double fx = 0.5 * spec.width / std::tan(0.5 * spec.fov_deg * M_PI / 180.0);

  Rng rng(seed);
  std::vector<CameraPose> poses;
  poses.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Evenly spread azimuths with seeded jitter; seeded elevation.
    const double az = 2.0 * M_PI * (static_cast<double>(i) + rng.uniform(0.0, 0.35)) /
                      static_cast<double>(n);
    const double el =
        rng.uniform(spec.elevation_lo_deg, spec.elevation_hi_deg) * M_PI / 180.0;
    const Vec3 eye = center + radius * Vec3(std::cos(el) * std::cos(az),
                                            std::cos(el) * std::sin(az), std::sin(el));

    const Vec3 forward = (center - eye).normalized();
    const Vec3 world_up(0.0, 0.0, 1.0);
    Vec3 right = world_up.cross(forward);
    if (right.norm() < 1e-9) right = Vec3(1.0, 0.0, 0.0);  // looking straight up/down
    right.normalize();
    const Vec3 down = forward.cross(right);

    CameraPose pose;
    pose.rotation.row(0) = right.transpose();
    pose.rotation.row(1) = down.transpose();
    pose.rotation.row(2) = forward.transpose();
    pose.translation = -pose.rotation * eye;
    pose.fx = fx;
    pose.fy = fx;
    pose.cx = 0.5 * spec.width;
    pose.cy = 0.5 * spec.height;
    pose.width = spec.width;
    pose.height = spec.height;
    pose.validate();
    poses.push_back(pose);
  }
  return poses;
}

}  // namespace splatwatt
