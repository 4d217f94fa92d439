// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "splatwatt/report.hpp"
#include "splatwatt/scene_io.hpp"

namespace splatwatt {

void SamplingPlan::validate() const {
  if (rhos.size() < 3) throw ConfigError("sampling plan: need at least 3 rho values");
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (!(rhos[i] >= 0.0 && rhos[i] < 1.0))
      throw ConfigError("sampling plan: rho values must be in [0, 1)");
    if (i > 0 && !(rhos[i] > rhos[i - 1]))
      throw ConfigError("sampling plan: rho values must be strictly increasing");
  }
}

CheckpointStore::CheckpointStore(std::filesystem::path dir, std::string config_hash)
    : dir_(std::move(dir)), config_hash_(std::move(config_hash)) {
  std::filesystem::create_directories(dir_);
}

std::optional<IsoQualitySample> CheckpointStore::load(const std::string& tag) const {
  const auto sidecar = dir_ / (tag + ".json");
  const auto model = dir_ / (tag + ".ply");
  if (!std::filesystem::exists(sidecar) || !std::filesystem::exists(model)) return std::nullopt;
  const Json j = read_json_file(sidecar);
  if (!j.contains("config_hash") || j.at("config_hash").get<std::string>() != config_hash_)
    return std::nullopt;
  IsoQualitySample s = sample_from_json(j.at("sample"));
  s.model = load_scene(model);
  return s;
}

void CheckpointStore::save(const std::string& tag, const IsoQualitySample& sample) const {
  save_scene(sample.model, dir_ / (tag + ".ply"));
  write_json_file(dir_ / (tag + ".json"),
                  Json{{"config_hash", config_hash_}, {"sample", sample_to_json(sample)}});
}

double quality_ceiling_psnr(const Scene& dense, const std::vector<CameraPose>& poses,
                            const PruneScores& scores, const std::vector<Framebuffer>& references,
                            double rho_ref, const RasterizeOptions& opts) {
  const Scene pruned = prune(dense, scores, rho_ref);
  QualityTarget probe;  // PSNR metric; band unused here
  return evaluate_quality(pruned, poses, references, probe, opts);
}

namespace {

std::string rho_tag(const std::string& prefix, double rho) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%srho_%.6f", prefix.c_str(), rho);
  return buf;
}

CurveSample to_curve_sample(const IsoQualitySample& s) {
  CurveSample cs;
  cs.rho = s.rho;
  cs.display_watts = s.display_watts;
  cs.rendering_watts = s.rendering_watts;
  cs.lambda_used = s.lambda_final;
  cs.quality_achieved = s.quality;
  cs.flagged = s.flagged();
  return cs;
}

}  // namespace

PipelineResult build_power_optimal_model(const Scene& dense,
                                         const std::vector<CameraPose>& poses,
                                         const QualityTarget& target, const SamplingPlan& plan,
                                         const OptimizeContext& ctx,
                                         const CheckpointStore* checkpoints,
                                         const std::string& checkpoint_prefix) {
  return build_power_optimal_model(dense, poses, render_views(dense, poses, ctx.raster),
                                   target, plan, ctx, checkpoints, checkpoint_prefix);
}

PipelineResult build_power_optimal_model(const Scene& start,
                                         const std::vector<CameraPose>& poses,
                                         const std::vector<Framebuffer>& references,
                                         const QualityTarget& target, const SamplingPlan& plan,
                                         const OptimizeContext& ctx,
                                         const CheckpointStore* checkpoints,
                                         const std::string& checkpoint_prefix) {
  const Scene& dense = start;
  plan.validate();
  if (poses.empty()) throw ComputeError("build_power_optimal_model: empty pose list");

  const PruneScores scores = compute_prune_scores(dense, poses, ctx.raster);

  PipelineResult result;
  result.target = target;

  auto sample_at = [&](double rho, const std::string& tag) -> IsoQualitySample {
    if (checkpoints) {
      if (auto cached = checkpoints->load(tag)) return std::move(*cached);
    }
    IsoQualitySample s =
        sample_iso_quality_point(dense, poses, rho, target, ctx, references, scores);
    if (checkpoints) checkpoints->save(tag, s);
    return s;
  };

  for (double rho : plan.rhos)
    result.samples.push_back(sample_at(rho, rho_tag(checkpoint_prefix, rho)));

  // Flagged samples missed the quality band, so they do not lie on the
  // iso-quality curve; the regression uses converged points only.
  std::vector<CurveSample> curve_samples;
  for (const IsoQualitySample& s : result.samples)
    if (!s.flagged()) curve_samples.push_back(to_curve_sample(s));
  if (curve_samples.size() < 3)
    throw ComputeError("build_power_optimal_model: fewer than 3 samples reached the "
                       "quality band; curve fit is not identifiable");

  char constraint[128];
  std::snprintf(constraint, sizeof constraint, "%s>=%.6g (eps %.6g)",
                target.metric == ControlMetric::PsnrDb ? "psnr_db" : "neg_eccq", target.q_min,
                target.epsilon);
  result.curve = fit_curve(curve_samples, constraint);

  result.predicted = minimize_total_power_watts(result.curve, plan.min_rho(), plan.max_rho());
  result.rho_star = result.predicted.rho;

  result.final_sample = sample_at(result.rho_star, checkpoint_prefix + "final");
  return result;
}

}  // namespace splatwatt
