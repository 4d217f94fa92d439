// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "splatwatt/metrics.hpp"
#include "splatwatt/power.hpp"
#include "splatwatt/prune.hpp"
#include "splatwatt/rasterize.hpp"
#include "splatwatt/scene.hpp"

namespace splatwatt {

enum class ControlMetric { PsnrDb, NegEccQuality };

/// Termination band for the controller: quality in [q_min, q_min + epsilon].
/// For NegEccQuality the quality is the negated pooled error (higher better)
/// evaluated with a constant pool side.
struct QualityTarget {
  ControlMetric metric = ControlMetric::PsnrDb;
  double q_min = 30.0;
  double epsilon = 0.05;
  int eccq_pool_side = 1;
};

struct FinetuneConfig {
  // Step size on the DC color coefficients. The loss is pixel-mean
  // normalized, so gradients scale as 1/(W*H); shipped configs set a
  // resolution-appropriate value.
  double learning_rate = 1e-2;
  int check_interval = 10;      // fine-tune steps per control iteration
  int max_control_iters = 1000;
  double lambda0 = 0.1;
  double lambda_min = 1e-6;
  double lambda_max = 1e3;
  double anneal_s0 = 2.0;       // S annealed from this to exactly 1
};

struct ControlRecord {
  int control_iter = 0;
  double quality = 0.0;
  double s = 1.0;             // adjustment scale used for this update
  double lambda_before = 0.0;
  double lambda_after = 0.0;
  bool adapted = false;       // false on the terminating check
};

struct PruneFinetuneState {
  double rho = 0.0;
  double lambda = 0.1;
  double anneal_scale = 2.0;  // S; non-increasing, exactly 1 at the last iteration
  double q_min = 0.0;
  double epsilon = 0.0;
  int iteration = 0;          // control iterations performed
  std::vector<ControlRecord> history;
};

enum class SampleStatus { Converged, MaxItersSurplus, MaxItersBelowTarget };

struct IsoQualitySample {
  Scene model;
  double rho = 0.0;
  double lambda_final = 0.0;
  double quality = 0.0;  // control-metric units
  double psnr_db = 0.0;  // vs the dense references, for summaries
  double ssim_score = 0.0;
  double display_watts = 0.0;
  double rendering_watts = 0.0;
  int control_iters = 0;
  SampleStatus status = SampleStatus::Converged;
  std::vector<ControlRecord> history;

  double total_watts() const { return display_watts + rendering_watts; }
  bool flagged() const { return status != SampleStatus::Converged; }
};

struct OptimizeContext {
  DisplayModel display;
  EnergyModel energy;
  RasterizeOptions raster;
  FinetuneConfig finetune;
};

std::vector<Framebuffer> render_views(const Scene& scene, const std::vector<CameraPose>& poses,
                                      const RasterizeOptions& opts = {});

double evaluate_quality(const Scene& scene, const std::vector<CameraPose>& poses,
                        const std::vector<Framebuffer>& references, const QualityTarget& target,
                        const RasterizeOptions& opts = {});

struct LossGradient {
  double loss = 0.0;
  std::vector<Vec3> color_dc_grad;  // d loss / d color_dc, per point
};

/// Loss and its analytic gradient w.r.t. the DC color coefficients:
///   loss = mean over poses of [ MSE(render, reference) + lambda * display_power ]
/// with MSE and the display term taken on clamped images, chained through the
/// blend adjoint and the color decode.
LossGradient finetune_gradient(const Scene& scene, const std::vector<CameraPose>& poses,
                               const std::vector<Framebuffer>& references, double lambda,
                               const DisplayModel& display, const RasterizeOptions& opts = {});

/// One gradient-descent step on DC color coefficients only. Returns the loss
/// before the update. Positions, scales, rotations and opacities are never
/// modified.
double finetune_step(Scene& scene, const std::vector<CameraPose>& poses,
                     const std::vector<Framebuffer>& references, double lambda,
                     const DisplayModel& display, double learning_rate,
                     const RasterizeOptions& opts = {});

/// lambda <- lambda*S if quality >= q_min else lambda/S (clamped), then S is
/// advanced by cosine annealing toward exactly 1 at max_control_iters.
void adapt_lambda(PruneFinetuneState& state, double measured_quality,
                  const FinetuneConfig& cfg);

double anneal_scale_at(int iteration, const FinetuneConfig& cfg);

/// Prunes `dense` at rho, then alternates fine-tune bursts with quality
/// checks until the quality lands in [q_min, q_min+epsilon] or the iteration
/// budget runs out (flagged result). References default to renders of the
/// dense model.
IsoQualitySample sample_iso_quality_point(const Scene& dense,
                                          const std::vector<CameraPose>& poses, double rho,
                                          const QualityTarget& target,
                                          const OptimizeContext& ctx);

// Variant with precomputed dense references and prune scores (the sampling
// driver reuses them across rho values).
IsoQualitySample sample_iso_quality_point(const Scene& dense,
                                          const std::vector<CameraPose>& poses, double rho,
                                          const QualityTarget& target, const OptimizeContext& ctx,
                                          const std::vector<Framebuffer>& references,
                                          const PruneScores& scores);

}  // namespace splatwatt
