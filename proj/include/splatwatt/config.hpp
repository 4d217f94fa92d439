// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "splatwatt/foveation.hpp"
#include "splatwatt/pipeline.hpp"
#include "splatwatt/report.hpp"

namespace splatwatt {

/// Quality targets: H/M/L presets are fractions (0.99/0.98/0.97) of the
/// per-run quality ceiling, the PSNR of the un-tuned prune at the largest
/// planned rho against the dense renders. `q_min_db` overrides the preset
/// with an absolute target.
struct QualityPolicy {
  std::string preset = "M";
  std::optional<double> q_min_db;
  double epsilon_db = 0.05;

  double preset_fraction() const;
};

struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;   // 0 = hardware concurrency; never affects results
  int tile_size = 16;
  bool generate_scene = true;
  std::string scene_path;
  GeneratorSpec generator;
  PoseSpec poses;
  DisplayModel display;
  EnergyModel energy;
  CountingModel counting;
  QualityPolicy quality;
  FinetuneConfig finetune;
  SamplingPlan sampling;
  bool has_foveation = false;
  FoveationPlan foveation;
  SamplingPlan region_sampling{{0.15, 0.4, 0.7}};
  std::string output_dir = "out";

  RasterizeOptions raster_options() const;
  OptimizeContext context() const;
  Scene make_scene() const;  // generate or load
  std::vector<CameraPose> make_poses(const Scene& scene) const;
};

RunConfig config_from_json(const Json& j);
// Resolved echo: every effective value spelled out; output_dir normalized to
// "." so reports compare byte-equal across run directories.
Json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);
std::string config_hash(const RunConfig& cfg);

// Desk-scale benchmark profile used by the shipped example config and the
// integration suite. The display profile is a scaled example (micro-Watt
// range), not a panel measurement; blue stays the most expensive channel.
RunConfig benchmark_config();

}  // namespace splatwatt
