// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/finetune.hpp"

#include <algorithm>
#include <cmath>

namespace splatwatt {

std::vector<Framebuffer> render_views(const Scene& scene, const std::vector<CameraPose>& poses,
                                      const RasterizeOptions& opts) {
  std::vector<Framebuffer> views;
  views.reserve(poses.size());
  for (const CameraPose& pose : poses) views.push_back(rasterize(scene, pose, opts).image);
  return views;
}

double evaluate_quality(const Scene& scene, const std::vector<CameraPose>& poses,
                        const std::vector<Framebuffer>& references, const QualityTarget& target,
                        const RasterizeOptions& opts) {
  if (poses.size() != references.size())
    throw ComputeError("evaluate_quality: pose/reference count mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Framebuffer image = rasterize(scene, poses[i], opts).image;
    acc += target.metric == ControlMetric::PsnrDb
               ? psnr(image, references[i])
               : -ecc_quality_uniform(image, references[i], target.eccq_pool_side);
  }
  return acc / static_cast<double>(poses.size());
}

LossGradient finetune_gradient(const Scene& scene, const std::vector<CameraPose>& poses,
                               const std::vector<Framebuffer>& references, double lambda,
                               const DisplayModel& display, const RasterizeOptions& opts) {
  if (poses.size() != references.size())
    throw ComputeError("finetune_gradient: pose/reference count mismatch");
  if (poses.empty()) throw ComputeError("finetune_gradient: empty pose list");

  const double n_poses = static_cast<double>(poses.size());
  std::vector<Vec3> grad_rgb(scene.size(), Vec3::Zero());
  double loss = 0.0;

  for (std::size_t pi = 0; pi < poses.size(); ++pi) {
    const CameraPose& pose = poses[pi];
    const Framebuffer raw = rasterize(scene, pose, opts).image;
    const Framebuffer& ref = references[pi];
    if (!raw.same_shape(ref)) throw ComputeError("finetune_gradient: reference size mismatch");

    const double n_pix = static_cast<double>(pose.width) * pose.height;
    const Vec3 disp_coef(display.alpha, display.beta, display.gamma);

    double se = 0.0;
    Framebuffer upstream(pose.width, pose.height);
    for (int y = 0; y < pose.height; ++y) {
      for (int x = 0; x < pose.width; ++x) {
        for (int c = 0; c < 3; ++c) {
          const double rv = raw.at(x, y, c);
          const double iv = std::clamp(rv, 0.0, 1.0);
          const double tv = std::clamp(ref.at(x, y, c), 0.0, 1.0);
          const double d = iv - tv;
          se += d * d;
          // d(clamp)/d(raw) vanishes outside (0,1).
          const double mask = (rv > 0.0 && rv < 1.0) ? 1.0 : 0.0;
          upstream.at(x, y, c) =
              mask * (2.0 * d / (3.0 * n_pix) + lambda * disp_coef[c] / n_pix) / n_poses;
        }
      }
    }
    loss += (se / (3.0 * n_pix) + lambda * display_power(raw, display)) / n_poses;

    const std::vector<Vec3> g = render_gradient_colors(scene, pose, upstream, opts);
    for (std::size_t i = 0; i < scene.size(); ++i) grad_rgb[i] += g[i];
  }

  // Chain through the DC color decode: rgb = max(0, 0.5 + C0 * dc).
  LossGradient out;
  out.loss = loss;
  out.color_dc_grad.assign(scene.size(), Vec3::Zero());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double active = (0.5 + kShC0 * scene.points[i].color_dc[c] > 0.0) ? 1.0 : 0.0;
      out.color_dc_grad[i][c] = grad_rgb[i][c] * kShC0 * active;
    }
  }
  return out;
}

double finetune_step(Scene& scene, const std::vector<CameraPose>& poses,
                     const std::vector<Framebuffer>& references, double lambda,
                     const DisplayModel& display, double learning_rate,
                     const RasterizeOptions& opts) {
  const LossGradient g = finetune_gradient(scene, poses, references, lambda, display, opts);
  for (std::size_t i = 0; i < scene.size(); ++i)
    scene.points[i].color_dc -= learning_rate * g.color_dc_grad[i];
  return g.loss;
}

double anneal_scale_at(int iteration, const FinetuneConfig& cfg) {
  if (iteration >= cfg.max_control_iters) return 1.0;
  const double t = static_cast<double>(iteration) / static_cast<double>(cfg.max_control_iters);
  return 1.0 + (cfg.anneal_s0 - 1.0) * 0.5 * (1.0 + std::cos(M_PI * t));
}

void adapt_lambda(PruneFinetuneState& state, double measured_quality,
                  const FinetuneConfig& cfg) {
  ControlRecord rec;
  rec.control_iter = state.iteration;
  rec.quality = measured_quality;
  rec.s = state.anneal_scale;
  rec.lambda_before = state.lambda;

  const double next = measured_quality >= state.q_min ? state.lambda * state.anneal_scale
                                                      : state.lambda / state.anneal_scale;
  state.lambda = std::clamp(next, cfg.lambda_min, cfg.lambda_max);

  rec.lambda_after = state.lambda;
  rec.adapted = true;
  state.history.push_back(rec);
  state.iteration += 1;
  state.anneal_scale = anneal_scale_at(state.iteration, cfg);
}

IsoQualitySample sample_iso_quality_point(const Scene& dense,
                                          const std::vector<CameraPose>& poses, double rho,
                                          const QualityTarget& target,
                                          const OptimizeContext& ctx) {
  const std::vector<Framebuffer> refs = render_views(dense, poses, ctx.raster);
  const PruneScores scores = compute_prune_scores(dense, poses, ctx.raster);
  return sample_iso_quality_point(dense, poses, rho, target, ctx, refs, scores);
}

IsoQualitySample sample_iso_quality_point(const Scene& dense,
                                          const std::vector<CameraPose>& poses, double rho,
                                          const QualityTarget& target, const OptimizeContext& ctx,
                                          const std::vector<Framebuffer>& references,
                                          const PruneScores& scores) {
  const FinetuneConfig& cfg = ctx.finetune;

  IsoQualitySample sample;
  sample.rho = rho;
  sample.model = prune(dense, scores, rho);

  PruneFinetuneState state;
  state.rho = rho;
  state.lambda = std::clamp(cfg.lambda0, cfg.lambda_min, cfg.lambda_max);
  state.anneal_scale = anneal_scale_at(0, cfg);
  state.q_min = target.q_min;
  state.epsilon = target.epsilon;

  bool converged = false;
  double quality = 0.0;
  for (int k = 0; k < cfg.max_control_iters; ++k) {
    quality = evaluate_quality(sample.model, poses, references, target, ctx.raster);
    if (quality >= state.q_min && quality <= state.q_min + state.epsilon) {
      ControlRecord rec;
      rec.control_iter = state.iteration;
      rec.quality = quality;
      rec.s = state.anneal_scale;
      rec.lambda_before = state.lambda;
      rec.lambda_after = state.lambda;
      rec.adapted = false;
      state.history.push_back(rec);
      converged = true;
      break;
    }
    adapt_lambda(state, quality, cfg);
    for (int j = 0; j < cfg.check_interval; ++j)
      finetune_step(sample.model, poses, references, state.lambda, ctx.display,
                    cfg.learning_rate, ctx.raster);
  }
  if (!converged)
    quality = evaluate_quality(sample.model, poses, references, target, ctx.raster);

  sample.lambda_final = state.lambda;
  sample.quality = quality;
  sample.control_iters = state.iteration;
  sample.status = converged ? SampleStatus::Converged
                            : (quality >= state.q_min ? SampleStatus::MaxItersSurplus
                                                      : SampleStatus::MaxItersBelowTarget);
  sample.history = std::move(state.history);

  double psnr_acc = 0.0, ssim_acc = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Framebuffer image = rasterize(sample.model, poses[i], ctx.raster).image;
    psnr_acc += psnr(image, references[i]);
    ssim_acc += ssim(image, references[i]);
  }
  sample.psnr_db = psnr_acc / static_cast<double>(poses.size());
  sample.ssim_score = ssim_acc / static_cast<double>(poses.size());

  const PowerReport power = evaluate_model(sample.model, poses, ctx.display, ctx.energy,
                                           ctx.raster);
  sample.display_watts = power.display_watts;
  sample.rendering_watts = power.rendering_watts;
  return sample;
}

}  // namespace splatwatt
