// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/power.hpp"

namespace splatwatt {

double display_power(const Framebuffer& image, const DisplayModel& model) {
  const Vec3 means = image.channel_means_clamped();
  return model.alpha * means[0] + model.beta * means[1] + model.gamma * means[2] +
         model.static_watts;
}

double rendering_power(const OpCounters& c, const EnergyModel& m) {
  const double joules = m.joules_per_flop * static_cast<double>(c.flops) +
                        m.joules_per_sram_byte * static_cast<double>(c.sram_bytes) +
                        m.joules_per_dram_byte * static_cast<double>(c.dram_bytes);
  return joules * m.fps;
}

PowerReport evaluate_model(const Scene& scene, const std::vector<CameraPose>& poses,
                           const DisplayModel& display, const EnergyModel& energy,
                           const RasterizeOptions& raster_opts) {
  if (poses.empty()) throw ComputeError("evaluate_model: empty pose list");
  display.validate();
  energy.validate();

  PowerReport report;
  report.per_pose.reserve(poses.size());
  for (const CameraPose& pose : poses) {
    const RasterizeResult r = rasterize(scene, pose, raster_opts);
    PosePower pp;
    pp.display_watts = display_power(r.image, display);
    pp.rendering_watts = rendering_power(r.counters, energy);
    pp.counters = r.counters;
    report.counters_total += r.counters;
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
