// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "splatwatt/image.hpp"
#include "splatwatt/rasterize.hpp"
#include "splatwatt/scene.hpp"

namespace splatwatt {

/// Emissive-panel model: Watts = alpha*meanR + beta*meanG + gamma*meanB + s,
/// channel means taken in linear RGB. Shipped profiles are example values,
/// not panel measurements; blue is the most expensive channel.
struct DisplayModel {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double static_watts = 0.0;

  void validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0 || static_watts < 0)
      throw ConfigError("display model coefficients must be non-negative");
  }
};

struct EnergyModel {
  double joules_per_flop = 0.53e-12;
  double joules_per_sram_byte = 0.24e-12;
  double joules_per_dram_byte = 10.88e-12;
  double fps = 60.0;

  void validate() const {
    if (!(joules_per_flop > 0 && joules_per_sram_byte > 0 && joules_per_dram_byte > 0 &&
          fps > 0))
      throw ConfigError("energy model parameters must be strictly positive");
  }
};

struct PosePower {
  double display_watts = 0.0;
  double rendering_watts = 0.0;
  OpCounters counters;
  double total() const { return display_watts + rendering_watts; }
};

struct PowerReport {
  double display_watts = 0.0;    // mean over poses
  double rendering_watts = 0.0;  // mean over poses
  double total_watts = 0.0;      // display + rendering
  std::vector<PosePower> per_pose;
  OpCounters counters_total;  // summed over poses
};

double display_power(const Framebuffer& image, const DisplayModel& model);

double rendering_power(const OpCounters& counters, const EnergyModel& model);

// Arithmetic means of per-pose display/rendering power over the pose set.
PowerReport evaluate_model(const Scene& scene, const std::vector<CameraPose>& poses,
                           const DisplayModel& display, const EnergyModel& energy,
                           const RasterizeOptions& raster_opts = {});

}  // namespace splatwatt
