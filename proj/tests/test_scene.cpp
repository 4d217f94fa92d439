// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "splatwatt/scene.hpp"
#include "splatwatt/scene_io.hpp"

using namespace splatwatt;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  const fs::path p = fs::temp_directory_path() / "splatwatt_scene_tests";
  fs::create_directories(p);
  return p / name;
}

}  // namespace

TEST_CASE("generator is deterministic and respects the spec") {
  GeneratorSpec spec;
  spec.count = 1000;
  spec.seed = 42;
  const Scene a = generate_synthetic_scene(spec);
  const Scene b = generate_synthetic_scene(spec);
  REQUIRE(a.size() == 1000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.points[i].position == b.points[i].position);
    CHECK(a.points[i].scale == b.points[i].scale);
    CHECK(a.points[i].opacity == b.points[i].opacity);
    CHECK(a.points[i].color_dc == b.points[i].color_dc);
    CHECK(a.points[i].rotation.coeffs() == b.points[i].rotation.coeffs());
  }
  CHECK_NOTHROW(a.validate());
}

TEST_CASE("blue-heavy color profile biases the blue coefficient") {
  GeneratorSpec spec = GeneratorSpec::with_color_profile({}, "blue-heavy");
  spec.count = 4000;
  spec.seed = 7;
  const Scene scene = generate_synthetic_scene(spec);
  Vec3 mean = Vec3::Zero();
  for (const GaussianPoint& p : scene.points) mean += p.color_dc;
  mean /= static_cast<double>(scene.size());
  CHECK(mean[2] > mean[0]);  // blue above red

  CHECK_THROWS_AS(GeneratorSpec::with_color_profile({}, "nope"), ConfigError);
}

TEST_CASE("pose sampling: determinism, look-at, projection of the center") {
  const Scene scene = oracle::test_scene(200, 3);
  const auto a = sample_poses(scene, 8, 99);
  const auto b = sample_poses(scene, 8, 99);
  REQUIRE(a.size() == 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].rotation == b[i].rotation);
    CHECK(a[i].translation == b[i].translation);
  }

  Vec3 lo, hi;
  scene.bounds(lo, hi);
  const Vec3 center = 0.5 * (lo + hi);
  for (const CameraPose& pose : a) {
    const Vec3 cam = pose.to_camera(center);
    REQUIRE(cam.z() > 0.0);
    const double u = pose.fx * cam.x() / cam.z() + pose.cx;
    const double v = pose.fy * cam.y() / cam.z() + pose.cy;
    CHECK(u >= 0.0);
    CHECK(u < pose.width);
    CHECK(v >= 0.0);
    CHECK(v < pose.height);
  }

  const auto single = sample_poses(scene, 1, 5);
  REQUIRE(single.size() == 1);
  CHECK(std::isfinite(single[0].translation.norm()));
}

TEST_CASE("ply round-trip preserves attributes to float precision") {
  Scene scene = oracle::test_scene(100, 11);
  scene.points[3].sh_rest.assign(9, 0.25f);  // higher-order SH preserved
  for (std::size_t i = 0; i < scene.size(); ++i)
    scene.points[i].sh_rest.assign(9, static_cast<float>(0.01 * i));

  const fs::path path = temp_file("roundtrip.ply");
  save_scene(scene, path);
  const Scene loaded = load_scene(path);
  REQUIRE(loaded.size() == scene.size());

  double max_err = 0.0;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const GaussianPoint& p = scene.points[i];
    const GaussianPoint& q = loaded.points[i];
    max_err = std::max(max_err, (p.position - q.position).cwiseAbs().maxCoeff());
    max_err = std::max(max_err, (p.scale - q.scale).cwiseAbs().maxCoeff());
    max_err = std::max(max_err, (p.color_dc - q.color_dc).cwiseAbs().maxCoeff());
    max_err = std::max(max_err, std::abs(p.opacity - q.opacity));
    max_err = std::max(max_err,
                       (p.rotation.coeffs() - q.rotation.coeffs()).cwiseAbs().maxCoeff());
    REQUIRE(q.sh_rest.size() == p.sh_rest.size());
    for (std::size_t k = 0; k < p.sh_rest.size(); ++k)
      CHECK(q.sh_rest[k] == p.sh_rest[k]);
  }
  CHECK(max_err < 1e-6);
}

TEST_CASE("ply: empty scene, log-scale decode, error paths") {
  const fs::path path = temp_file("cases.ply");

  Scene empty;
  empty.id = "empty";
  save_scene(empty, path);
  CHECK(load_scene(path).size() == 0);

  // A hand-written single-point file with raw (pre-decode) values of zero:
  // exp(0) scales and sigmoid(0) opacity.
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "ply\nformat binary_little_endian 1.0\nelement vertex 1\n";
    for (const char* n : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2",
                          "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2",
                          "rot_3"})
      out << "property float " << n << "\n";
    out << "end_header\n";
    float row[17] = {0};
    row[13] = 1.0f;  // rot_0 (w)
    out.write(reinterpret_cast<const char*>(row), sizeof row);
  }
  const Scene one = load_scene(path);
  REQUIRE(one.size() == 1);
  CHECK(one.points[0].scale == Vec3(1.0, 1.0, 1.0));
  CHECK(one.points[0].opacity == doctest::Approx(0.5));

  // Malformed header names the offending part.
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "ply\nformat ascii 1.0\nelement vertex 0\nend_header\n";
  }
  CHECK_THROWS_WITH_AS(load_scene(path), doctest::Contains("format"), IoError);

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "ply\nformat binary_little_endian 1.0\nelement vertex 0\n"
           "property float x\nproperty float y\nproperty float z\nend_header\n";
  }
  CHECK_THROWS_WITH_AS(load_scene(path), doctest::Contains("f_dc_0"), IoError);

  // Non-finite attribute rejected with the point index.
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "ply\nformat binary_little_endian 1.0\nelement vertex 1\n";
    for (const char* n : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2",
                          "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2",
                          "rot_3"})
      out << "property float " << n << "\n";
    out << "end_header\n";
    float row[17] = {0};
    row[0] = std::numeric_limits<float>::quiet_NaN();
    row[13] = 1.0f;
    out.write(reinterpret_cast<const char*>(row), sizeof row);
  }
  CHECK_THROWS_WITH_AS(load_scene(path), doctest::Contains("point 0"), IoError);

  // Writing a scene with a NaN attribute is refused.
  Scene bad = oracle::test_scene(3, 2);
  bad.points[1].color_dc[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(save_scene(bad, path), ComputeError);
}

TEST_CASE("scene invariants are enforced") {
  Scene s = oracle::test_scene(4, 8);
  s.points[2].scale[1] = -0.1;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("point 2"), ComputeError);

  s = oracle::test_scene(4, 8);
  s.points[1].opacity = 1.5;
  CHECK_THROWS_AS(s.validate(), ComputeError);

  s = oracle::test_scene(4, 8);
  s.points[0].rotation.coeffs() *= 1.1;
  CHECK_THROWS_AS(s.validate(), ComputeError);

  Vec3 lo, hi;
  CHECK_THROWS_AS(Scene{}.bounds(lo, hi), ComputeError);
}

TEST_CASE("property: random generated scenes always satisfy invariants") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    GeneratorSpec spec;
    spec.count = 50 + 13 * seed;
    spec.seed = seed;
    spec.color_stddev = 0.2 + 0.1 * (seed % 5);
    const Scene scene = generate_synthetic_scene(spec);
    CHECK_NOTHROW(scene.validate());
    for (const GaussianPoint& p : scene.points) {
      CHECK(p.scale.minCoeff() > 0.0);
      CHECK(p.opacity >= 0.0);
      CHECK(p.opacity <= 1.0);
      CHECK(std::abs(p.rotation.norm() - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("property: save/load is identity within 1e-6 over random scenes") {
  for (std::uint64_t seed = 31; seed <= 40; ++seed) {
    const Scene scene = oracle::test_scene(40, seed);
    const fs::path path = temp_file("prop.ply");
    save_scene(scene, path);
    const Scene loaded = load_scene(path);
    REQUIRE(loaded.size() == scene.size());
    for (std::size_t i = 0; i < scene.size(); ++i) {
      CHECK((scene.points[i].position - loaded.points[i].position).cwiseAbs().maxCoeff() <
            1e-6);
      CHECK((scene.points[i].scale - loaded.points[i].scale).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(std::abs(scene.points[i].opacity - loaded.points[i].opacity) < 1e-6);
      CHECK((scene.points[i].color_dc - loaded.points[i].color_dc).cwiseAbs().maxCoeff() <
            1e-6);
    }
  }
}
