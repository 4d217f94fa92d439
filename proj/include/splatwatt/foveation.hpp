// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "splatwatt/metrics.hpp"
#include "splatwatt/pipeline.hpp"

namespace splatwatt {

/// Quality regions by eccentricity from the gaze point. Region r covers
/// [inner_r, outer_r) degrees, the last region extending to the frame corner.
/// Boundaries blend linearly over a band of `blend_band_deg` centered on each
/// bound; bands must not overlap (validated), so per-pixel weights sum to 1.
struct FoveationPlan {
  EccPooling pooling;  // pixels_per_degree + pool-diameter map
  std::vector<double> outer_bounds_deg = {5.0, 12.0, 25.0};
  double blend_band_deg = 2.0;
  double eccq_rel_tol = 0.05;  // cross-region alignment tolerance
  bool gaze_center = true;
  Vec2 gaze_px = Vec2::Zero();

  std::size_t region_count() const { return outer_bounds_deg.size() + 1; }
  Vec2 gaze_for(const CameraPose& pose) const;
  double inner_deg(std::size_t r) const { return r == 0 ? 0.0 : outer_bounds_deg[r - 1]; }
  double outer_deg(std::size_t r, const CameraPose& pose) const;  // corner ecc for last region
  double representative_ecc_deg(std::size_t r, const CameraPose& pose) const;
  void validate(const CameraPose& pose) const;

  // Blend weight of region r at eccentricity e (degrees); weights over all
  // regions sum to 1 at every eccentricity.
  double weight(std::size_t r, double ecc_deg) const;
  // Half-open support of nonzero weight.
  void support(std::size_t r, double& lo_deg, double& hi_deg) const;
};

struct RegionBuild {
  Scene model;
  double achieved_eccq = 0.0;  // at the region's representative pooling
  int pool_side = 1;
  bool reused_predecessor = false;  // target unreachable
  bool fit_degenerate = false;      // fell back to the best measured sample
  std::vector<IsoQualitySample> samples;
  double rho_star = 0.0;
};

struct CascadeResult {
  std::vector<RegionBuild> regions;
  double r1_eccq = 0.0;  // alignment anchor
  PipelineResult r1_pipeline;

  std::vector<Scene> models() const;
};

/// Region 1 runs the standard power-optimal pipeline under `r1_target`; each
/// subsequent region is pruned from its predecessor with the control metric
/// switched to the eccentricity-pooled error at that region's representative
/// eccentricity, constrained to match region 1's achieved value within the
/// plan's relative tolerance.
CascadeResult build_cascade(const Scene& dense, const std::vector<CameraPose>& poses,
                            const FoveationPlan& plan, const QualityTarget& r1_target,
                            const SamplingPlan& r1_plan, const SamplingPlan& region_plan,
                            const OptimizeContext& ctx,
                            const CheckpointStore* checkpoints = nullptr);

struct FoveatedFrame {
  Framebuffer composite;
  OpCounters counters;  // sum over regions of work actually performed
  std::vector<OpCounters> per_region;
};

/// Renders each region's model over the tiles intersecting its annulus plus
/// blend band, then composites with the plan's blend weights.
FoveatedFrame render_foveated(const std::vector<Scene>& cascade, const FoveationPlan& plan,
                              const CameraPose& pose, const RasterizeOptions& opts = {});

PowerReport foveated_power_report(const std::vector<Scene>& cascade, const FoveationPlan& plan,
                                  const std::vector<CameraPose>& poses,
                                  const DisplayModel& display, const EnergyModel& energy,
                                  const RasterizeOptions& opts = {});

}  // namespace splatwatt
