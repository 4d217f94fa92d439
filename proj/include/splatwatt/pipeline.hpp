// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "splatwatt/curve.hpp"
#include "splatwatt/finetune.hpp"

namespace splatwatt {

struct SamplingPlan {
  std::vector<double> rhos = {0.1, 0.3, 0.5, 0.7, 0.85};

  void validate() const;  // sorted, unique, in [0,1)
  double min_rho() const { return rhos.front(); }
  double max_rho() const { return rhos.back(); }
};

/// One checkpoint per completed iso-quality sample: the model as a scene file
/// plus a JSON sidecar (state, quality, powers, control history). A sample is
/// reused only when its recorded config hash matches; samples are
/// deterministic given (config, seed), so resumed runs reproduce the
/// uninterrupted run byte for byte.
class CheckpointStore {
 public:
  CheckpointStore(std::filesystem::path dir, std::string config_hash);

  std::optional<IsoQualitySample> load(const std::string& tag) const;
  void save(const std::string& tag, const IsoQualitySample& sample) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string config_hash_;
};

struct PipelineResult {
  std::vector<IsoQualitySample> samples;  // one per planned rho
  IsoQualityCurve curve;
  double rho_star = 0.0;   // raw units, clamped to the plan range
  PowerMinimum predicted;  // Watts predicted by the curve at rho_star
  IsoQualitySample final_sample;
  QualityTarget target;
};

/// PSNR of the un-tuned prune at `rho_ref` against the dense renders: the
/// per-scene quality ceiling used to re-base fractional quality presets.
double quality_ceiling_psnr(const Scene& dense, const std::vector<CameraPose>& poses,
                            const PruneScores& scores, const std::vector<Framebuffer>& references,
                            double rho_ref, const RasterizeOptions& opts);

/// Samples one iso-quality point per planned rho, fits the Michaelis-Menten
/// curve pair, picks the Watt-minimal rho in closed form (clamped to the plan
/// range), and delivers the model sampled at that rho. Quality is measured
/// against renders of `dense` itself.
PipelineResult build_power_optimal_model(const Scene& dense,
                                         const std::vector<CameraPose>& poses,
                                         const QualityTarget& target, const SamplingPlan& plan,
                                         const OptimizeContext& ctx,
                                         const CheckpointStore* checkpoints = nullptr,
                                         const std::string& checkpoint_prefix = "");

/// Variant with externally supplied quality references (the foveated cascade
/// anchors every region to the original dense renders while pruning from the
/// predecessor region's model).
PipelineResult build_power_optimal_model(const Scene& start,
                                         const std::vector<CameraPose>& poses,
                                         const std::vector<Framebuffer>& references,
                                         const QualityTarget& target, const SamplingPlan& plan,
                                         const OptimizeContext& ctx,
                                         const CheckpointStore* checkpoints = nullptr,
                                         const std::string& checkpoint_prefix = "");

}  // namespace splatwatt
