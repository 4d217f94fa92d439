// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "splatwatt/foveation.hpp"
#include "splatwatt/prune.hpp"

using namespace splatwatt;

namespace {

FoveationPlan test_plan() {
  FoveationPlan plan;
  plan.pooling.pixels_per_degree = 2.0;
  plan.outer_bounds_deg = {5.0, 12.0, 25.0};
  plan.blend_band_deg = 2.0;
  return plan;
}

std::vector<Scene> pruned_cascade(const Scene& dense, const std::vector<CameraPose>& poses,
                                  const std::vector<double>& rhos) {
  const PruneScores scores = compute_prune_scores(dense, poses);
  std::vector<Scene> cascade = {dense};
  for (double rho : rhos) {
    const Scene& prev = cascade.back();
    const PruneScores s = compute_prune_scores(prev, poses);
    cascade.push_back(prune(prev, s, rho));
  }
  (void)scores;
  return cascade;
}

}  // namespace

TEST_CASE("plan validation and geometry") {
  const CameraPose pose = oracle::identity_pose(96, 96);
  FoveationPlan plan = test_plan();
  CHECK_NOTHROW(plan.validate(pose));
  CHECK(plan.region_count() == 4);
  CHECK(plan.inner_deg(0) == 0.0);
  CHECK(plan.outer_deg(0, pose) == 5.0);
  CHECK(plan.outer_deg(3, pose) ==
        doctest::Approx(std::hypot(48.0, 48.0) / 2.0));  // corner, 2 px/deg

  plan.outer_bounds_deg = {5.0, 4.0};
  CHECK_THROWS_AS(plan.validate(pose), ConfigError);

  plan = test_plan();
  plan.blend_band_deg = 10.0;  // wider than the 5..12 gap
  CHECK_THROWS_AS(plan.validate(pose), ConfigError);

  plan = test_plan();
  plan.gaze_center = false;
  plan.gaze_px = Vec2(300, 0);
  CHECK_THROWS_AS(plan.validate(pose), ConfigError);
}

TEST_CASE("blend weights sum to one at every eccentricity") {
  const FoveationPlan plan = test_plan();
  for (double e = 0.0; e < 40.0; e += 0.03125) {
    double sum = 0.0;
    for (std::size_t r = 0; r < plan.region_count(); ++r) sum += plan.weight(r, e);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Zero-width band: every eccentricity belongs to exactly one region.
  FoveationPlan hard = test_plan();
  hard.blend_band_deg = 0.0;
  for (double e = 0.0; e < 40.0; e += 0.1) {
    int owners = 0;
    for (std::size_t r = 0; r < hard.region_count(); ++r) {
      const double w = hard.weight(r, e);
      CHECK((w == 0.0 || w == 1.0));
      owners += w == 1.0 ? 1 : 0;
    }
    CHECK(owners == 1);
  }
}

TEST_CASE("zero-width band composites exactly the owning region's pixels") {
  const Scene dense = oracle::test_scene(250, 80);
  const auto poses = sample_poses(dense, 1, 81, [] {
    PoseSpec s;
    s.width = 96;
    s.height = 96;
    return s;
  }());
  FoveationPlan plan = test_plan();
  plan.blend_band_deg = 0.0;

  const auto cascade = pruned_cascade(dense, poses, {0.3, 0.3, 0.3});
  REQUIRE(cascade.size() == 4);
  const FoveatedFrame frame = render_foveated(cascade, plan, poses[0]);

  // Re-render each region full-frame and compare owned pixels exactly.
  std::vector<Framebuffer> full;
  for (const Scene& model : cascade) full.push_back(rasterize(model, poses[0]).image);
  const Vec2 gaze = plan.gaze_for(poses[0]);
  for (int y = 0; y < poses[0].height; ++y)
    for (int x = 0; x < poses[0].width; ++x) {
      const double ecc =
          plan.pooling.eccentricity_deg(std::hypot((x + 0.5) - gaze.x(), (y + 0.5) - gaze.y()));
      std::size_t owner = plan.region_count() - 1;
      for (std::size_t r = 0; r < plan.region_count(); ++r)
        if (plan.weight(r, ecc) == 1.0) {
          owner = r;
          break;
        }
      CHECK(frame.composite.pixel(x, y) == full[owner].pixel(x, y));
    }
}

TEST_CASE("identical models in all regions reproduce the single-model render") {
  const Scene dense = oracle::test_scene(220, 85);
  const auto poses = sample_poses(dense, 1, 86, [] {
    PoseSpec s;
    s.width = 96;
    s.height = 96;
    return s;
  }());
  const FoveationPlan plan = test_plan();
  const std::vector<Scene> cascade(4, dense);
  const FoveatedFrame frame = render_foveated(cascade, plan, poses[0]);
  const Framebuffer single = rasterize(dense, poses[0]).image;
  double max_err = 0.0;
  for (int y = 0; y < poses[0].height; ++y)
    for (int x = 0; x < poses[0].width; ++x)
      max_err =
          std::max(max_err, (frame.composite.pixel(x, y) - single.pixel(x, y)).cwiseAbs().maxCoeff());
  CHECK(max_err < 1e-6);
}

TEST_CASE("foveated rendering work never exceeds rendering region 1 full-frame") {
  const Scene dense = oracle::test_scene(500, 90);
  const auto poses = sample_poses(dense, 2, 91, [] {
    PoseSpec s;
    s.width = 128;
    s.height = 128;
    return s;
  }());
  const FoveationPlan plan = test_plan();
  const auto cascade = pruned_cascade(dense, poses, {0.35, 0.45, 0.5});
  RasterizeOptions opts;
  opts.tile_size = 8;  // annuli several tiles wide at this scale
  EnergyModel em;

  for (const CameraPose& pose : poses) {
    const FoveatedFrame frame = render_foveated(cascade, plan, pose, opts);
    const OpCounters full = rasterize(cascade.front(), pose, opts).counters;
    CHECK(frame.counters.flops <= full.flops);
    CHECK(frame.counters.sram_bytes <= full.sram_bytes);
    // Boundary tiles are staged by two regions, so DRAM alone may locally
    // exceed; the energy-weighted total must not.
    CHECK(rendering_power(frame.counters, em) <= rendering_power(full, em));

    // Monotone cascade: each region's model costs no more than its
    // predecessor when rendered over the same (full) frame.
    double prev = std::numeric_limits<double>::infinity();
    for (const Scene& model : cascade) {
      const double watts = rendering_power(rasterize(model, pose, opts).counters, em);
      CHECK(watts <= prev);
      prev = watts;
    }
  }
}

TEST_CASE("foveated power report: single pose equality and total identity") {
  const Scene dense = oracle::test_scene(300, 95);
  const auto poses = sample_poses(dense, 2, 96, [] {
    PoseSpec s;
    s.width = 128;
    s.height = 128;
    return s;
  }());
  const FoveationPlan plan = test_plan();
  const auto cascade = pruned_cascade(dense, poses, {0.3, 0.4, 0.5});
  DisplayModel dm{0.8e-4, 1.2e-4, 2.4e-4, 0.5e-4};
  EnergyModel em;
  RasterizeOptions opts;
  opts.tile_size = 8;

  const PowerReport single = foveated_power_report(cascade, plan, {poses[0]}, dm, em, opts);
  REQUIRE(single.per_pose.size() == 1);
  CHECK(single.display_watts == single.per_pose[0].display_watts);
  CHECK(single.rendering_watts == single.per_pose[0].rendering_watts);
  CHECK(single.total_watts == single.display_watts + single.rendering_watts);

  const PowerReport both = foveated_power_report(cascade, plan, poses, dm, em, opts);
  CHECK(std::abs(both.total_watts - (both.display_watts + both.rendering_watts)) < 1e-15);

  // The cascade's total power undercuts running region 1 everywhere.
  const PowerReport r1 = evaluate_model(cascade.front(), poses, dm, em, opts);
  CHECK(both.total_watts < r1.total_watts);
}

TEST_CASE("pixel partition: disjoint masks cover the frame before blending") {
  const CameraPose pose = oracle::identity_pose(80, 80);
  FoveationPlan plan = test_plan();
  plan.blend_band_deg = 0.0;
  const Vec2 gaze = plan.gaze_for(pose);
  for (int y = 0; y < pose.height; ++y)
    for (int x = 0; x < pose.width; ++x) {
      const double ecc =
          plan.pooling.eccentricity_deg(std::hypot((x + 0.5) - gaze.x(), (y + 0.5) - gaze.y()));
      int owners = 0;
      for (std::size_t r = 0; r < plan.region_count(); ++r)
        owners += plan.weight(r, ecc) == 1.0 ? 1 : 0;
      CHECK(owners == 1);
    }
}
