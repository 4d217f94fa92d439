// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/foveation.hpp"

#include <algorithm>
#include <cmath>

namespace splatwatt {

Vec2 FoveationPlan::gaze_for(const CameraPose& pose) const {
  return gaze_center ? Vec2(0.5 * pose.width, 0.5 * pose.height) : gaze_px;
}

double FoveationPlan::outer_deg(std::size_t r, const CameraPose& pose) const {
  if (r + 1 < region_count()) return outer_bounds_deg[r];
  const Vec2 g = gaze_for(pose);
  const double dx = std::max(g.x(), pose.width - g.x());
  const double dy = std::max(g.y(), pose.height - g.y());
  return pooling.eccentricity_deg(std::hypot(dx, dy));
}

double FoveationPlan::representative_ecc_deg(std::size_t r, const CameraPose& pose) const {
  return 0.5 * (inner_deg(r) + outer_deg(r, pose));
}

void FoveationPlan::validate(const CameraPose& pose) const {
  // Empty bounds degenerate to a single full-frame region.
  if (!(pooling.pixels_per_degree > 0.0))
    throw ConfigError("foveation: pixels_per_degree must be positive");
  if (blend_band_deg < 0.0) throw ConfigError("foveation: blend band must be >= 0");
  double prev = 0.0;
  for (double b : outer_bounds_deg) {
    if (!(b > prev)) throw ConfigError("foveation: eccentricity bounds must be increasing");
    if (blend_band_deg > 0.0 && b - prev < blend_band_deg && prev > 0.0)
      throw ConfigError("foveation: blend bands overlap; narrow the band or widen regions");
    prev = b;
  }
  const Vec2 g = gaze_for(pose);
  if (g.x() < 0 || g.y() < 0 || g.x() > pose.width || g.y() > pose.height)
    throw ConfigError("foveation: gaze outside image");
}

double FoveationPlan::weight(std::size_t r, double ecc_deg) const {
  // t_j: fraction of the pixel belonging to the outer side of boundary j.
  auto t = [&](std::size_t j) {
    const double b = outer_bounds_deg[j];
    if (blend_band_deg <= 0.0) return ecc_deg >= b ? 1.0 : 0.0;
    return std::clamp((ecc_deg - (b - 0.5 * blend_band_deg)) / blend_band_deg, 0.0, 1.0);
  };
  const double enter = r == 0 ? 1.0 : t(r - 1);
  const double leave = r + 1 == region_count() ? 0.0 : t(r);
  return enter * (1.0 - leave);
}

void FoveationPlan::support(std::size_t r, double& lo_deg, double& hi_deg) const {
  lo_deg = r == 0 ? 0.0 : outer_bounds_deg[r - 1] - 0.5 * blend_band_deg;
  hi_deg = r + 1 == region_count()
               ? std::numeric_limits<double>::infinity()
               : outer_bounds_deg[r] + 0.5 * blend_band_deg;
}

std::vector<Scene> CascadeResult::models() const {
  std::vector<Scene> out;
  out.reserve(regions.size());
  for (const RegionBuild& r : regions) out.push_back(r.model);
  return out;
}

namespace {

double mean_eccq(const Scene& model, const std::vector<CameraPose>& poses,
                 const std::vector<Framebuffer>& refs, int pool_side,
                 const RasterizeOptions& opts) {
  double acc = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i)
    acc += ecc_quality_uniform(rasterize(model, poses[i], opts).image, refs[i], pool_side);
  return acc / static_cast<double>(poses.size());
}

}  // namespace

CascadeResult build_cascade(const Scene& dense, const std::vector<CameraPose>& poses,
                            const FoveationPlan& plan, const QualityTarget& r1_target,
                            const SamplingPlan& r1_plan, const SamplingPlan& region_plan,
                            const OptimizeContext& ctx, const CheckpointStore* checkpoints) {
  if (poses.empty()) throw ComputeError("build_cascade: empty pose list");
  plan.validate(poses.front());

  CascadeResult out;
  const std::vector<Framebuffer> dense_refs = render_views(dense, poses, ctx.raster);

  // Region 1: the standard pipeline under the PSNR/SSIM-style target.
  out.r1_pipeline = build_power_optimal_model(dense, poses, dense_refs, r1_target, r1_plan,
                                              ctx, checkpoints, "r1_");
  RegionBuild r1;
  r1.model = out.r1_pipeline.final_sample.model;
  r1.pool_side = plan.pooling.pool_side(plan.representative_ecc_deg(0, poses.front()));
  r1.achieved_eccq = mean_eccq(r1.model, poses, dense_refs, r1.pool_side, ctx.raster);
  r1.samples = out.r1_pipeline.samples;
  r1.rho_star = out.r1_pipeline.rho_star;
  out.r1_eccq = r1.achieved_eccq;
  out.regions.push_back(std::move(r1));

  if (plan.region_count() > 1 && !(out.r1_eccq > 0.0))
    throw ComputeError("build_cascade: region 1 matches the dense model exactly; "
                       "no alignment anchor");

  for (std::size_t r = 1; r < plan.region_count(); ++r) {
    const Scene& predecessor = out.regions.back().model;
    RegionBuild rb;
    rb.pool_side = plan.pooling.pool_side(plan.representative_ecc_deg(r, poses.front()));

    QualityTarget target;
    target.metric = ControlMetric::NegEccQuality;
    target.eccq_pool_side = rb.pool_side;
    target.q_min = -(1.0 + plan.eccq_rel_tol) * out.r1_eccq;
    target.epsilon = 2.0 * plan.eccq_rel_tol * out.r1_eccq;

    // Already worse than the band at this pooling: pruning cannot recover it.
    const double start_eccq =
        mean_eccq(predecessor, poses, dense_refs, rb.pool_side, ctx.raster);
    if (-start_eccq < target.q_min) {
      rb.model = predecessor;
      rb.achieved_eccq = start_eccq;
      rb.reused_predecessor = true;
      out.regions.push_back(std::move(rb));
      continue;
    }

    const std::string prefix = "r" + std::to_string(r + 1) + "_";
    try {
      PipelineResult pr = build_power_optimal_model(predecessor, poses, dense_refs, target,
                                                    region_plan, ctx, checkpoints, prefix);
      if (pr.final_sample.status == SampleStatus::MaxItersBelowTarget) {
        rb.model = predecessor;
        rb.reused_predecessor = true;
      } else {
        rb.model = pr.final_sample.model;
        rb.rho_star = pr.rho_star;
      }
      rb.samples = pr.samples;
    } catch (const ComputeError&) {
      // Curve degenerate at this region (e.g. lambda never moved): fall back
      // to the best measured converged sample.
      const PruneScores fb_scores = compute_prune_scores(predecessor, poses, ctx.raster);
      IsoQualitySample best;
      bool have = false;
      for (double rho : region_plan.rhos) {
        IsoQualitySample s =
            sample_iso_quality_point(predecessor, poses, rho, target, ctx, dense_refs,
                                     fb_scores);
        if (s.status != SampleStatus::MaxItersBelowTarget &&
            (!have || s.total_watts() < best.total_watts())) {
          best = s;
          have = true;
        }
        rb.samples.push_back(s);
      }
      rb.fit_degenerate = true;
      if (have) {
        rb.model = best.model;
        rb.rho_star = best.rho;
      } else {
        rb.model = predecessor;
        rb.reused_predecessor = true;
      }
    }
    rb.achieved_eccq = mean_eccq(rb.model, poses, dense_refs, rb.pool_side, ctx.raster);
    out.regions.push_back(std::move(rb));
  }
  return out;
}

FoveatedFrame render_foveated(const std::vector<Scene>& cascade, const FoveationPlan& plan,
                              const CameraPose& pose, const RasterizeOptions& opts) {
  plan.validate(pose);
  if (cascade.size() != plan.region_count())
    throw ComputeError("render_foveated: cascade size does not match the plan");

  const Vec2 gaze = plan.gaze_for(pose);
  const int ts = opts.tile_size;

  FoveatedFrame frame;
  frame.composite = Framebuffer(pose.width, pose.height);
  frame.per_region.resize(cascade.size());

  std::vector<Framebuffer> region_images;
  region_images.reserve(cascade.size());

  for (std::size_t r = 0; r < cascade.size(); ++r) {
    double lo_deg, hi_deg;
    plan.support(r, lo_deg, hi_deg);

    // Eccentricity interval of a tile's pixel centers: distance from the gaze
    // to the nearest point of the center rect, and to its farthest corner.
    auto tile_in_region = [&, lo_deg, hi_deg](int tx, int ty) {
      const double x0 = tx * ts + 0.5, x1 = std::min(pose.width, (tx + 1) * ts) - 0.5;
      const double y0 = ty * ts + 0.5, y1 = std::min(pose.height, (ty + 1) * ts) - 0.5;
      const double nx = std::clamp(gaze.x(), x0, x1), ny = std::clamp(gaze.y(), y0, y1);
      const double dmin = std::hypot(nx - gaze.x(), ny - gaze.y());
      const double fx = std::max(std::abs(x0 - gaze.x()), std::abs(x1 - gaze.x()));
      const double fy = std::max(std::abs(y0 - gaze.y()), std::abs(y1 - gaze.y()));
      const double dmax = std::hypot(fx, fy);
      const double e_lo = plan.pooling.eccentricity_deg(dmin);
      const double e_hi = plan.pooling.eccentricity_deg(dmax);
      return e_hi >= lo_deg && e_lo <= hi_deg;
    };

    RasterizeOptions ro = opts;
    ro.tile_filter = tile_in_region;
    ro.pixel_filter = [&, lo_deg, hi_deg](int x, int y) {
      const double ecc = plan.pooling.eccentricity_deg(
          std::hypot((x + 0.5) - gaze.x(), (y + 0.5) - gaze.y()));
      return ecc >= lo_deg && ecc <= hi_deg;
    };
    RasterizeResult rr = rasterize(cascade[r], pose, ro);
    frame.per_region[r] = rr.counters;
    frame.counters += rr.counters;
    region_images.push_back(std::move(rr.image));
  }

  for (int y = 0; y < pose.height; ++y) {
    for (int x = 0; x < pose.width; ++x) {
      const double ecc =
          plan.pooling.eccentricity_deg(std::hypot((x + 0.5) - gaze.x(), (y + 0.5) - gaze.y()));
      Vec3 color = Vec3::Zero();
      for (std::size_t r = 0; r < cascade.size(); ++r) {
        const double w = plan.weight(r, ecc);
        if (w > 0.0) color += w * region_images[r].pixel(x, y);
      }
      frame.composite.set_pixel(x, y, color);
    }
  }
  return frame;
}

PowerReport foveated_power_report(const std::vector<Scene>& cascade, const FoveationPlan& plan,
                                  const std::vector<CameraPose>& poses,
                                  const DisplayModel& display, const EnergyModel& energy,
                                  const RasterizeOptions& opts) {
  if (poses.empty()) throw ComputeError("foveated_power_report: empty pose list");
  display.validate();
  energy.validate();

  PowerReport report;
  for (const CameraPose& pose : poses) {
    const FoveatedFrame frame = render_foveated(cascade, plan, pose, opts);
    PosePower pp;
    pp.display_watts = display_power(frame.composite, display);
    pp.rendering_watts = rendering_power(frame.counters, energy);
    pp.counters = frame.counters;
    report.counters_total += frame.counters;
    report.display_watts += pp.display_watts;
    report.rendering_watts += pp.rendering_watts;
    report.per_pose.push_back(pp);
  }
  const double n = static_cast<double>(poses.size());
  report.display_watts /= n;
  report.rendering_watts /= n;
  report.total_watts = report.display_watts + report.rendering_watts;
  return report;
}

}  // namespace splatwatt
