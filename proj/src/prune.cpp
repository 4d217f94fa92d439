// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/prune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace splatwatt {

PruneScores compute_prune_scores(const Scene& scene, const std::vector<CameraPose>& poses,
                                 const RasterizeOptions& opts) {
  if (poses.empty()) throw ComputeError("compute_prune_scores: empty pose list");

  PruneScores s;
  s.importance.assign(scene.size(), 0.0);
  s.cost.assign(scene.size(), 0.0);
  s.score.assign(scene.size(), 0.0);

  RasterizeOptions ro = opts;
  ro.collect_point_weights = true;
  for (const CameraPose& pose : poses) {
    const RasterizeResult r = rasterize(scene, pose, ro);
    for (std::size_t i = 0; i < scene.size(); ++i) s.importance[i] += r.point_weights[i];
    for (const ProjectedSplat& ps : project_points(scene, pose, opts))
      s.cost[ps.point_index] += ps.tile_count();
  }
  for (std::size_t i = 0; i < scene.size(); ++i)
    s.score[i] = s.importance[i] / std::max(s.cost[i], 1.0);
  return s;
}

Scene prune(const Scene& scene, const PruneScores& scores, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw ComputeError("prune: rho must be in [0, 1)");
  if (scores.score.size() != scene.size())
    throw ComputeError("prune: score/scene size mismatch");

  const std::size_t remove = static_cast<std::size_t>(
      std::ceil(rho * static_cast<double>(scene.size())));
  std::vector<std::size_t> order(scene.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores.score[a] != scores.score[b]) return scores.score[a] < scores.score[b];
    return a < b;
  });

  std::vector<char> removed(scene.size(), 0);
  for (std::size_t k = 0; k < remove; ++k) removed[order[k]] = 1;

  Scene out;
  out.id = scene.id;
  out.points.reserve(scene.size() - remove);
  for (std::size_t i = 0; i < scene.size(); ++i)
    if (!removed[i]) out.points.push_back(scene.points[i]);
  return out;
}

}  // namespace splatwatt
