// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "splatwatt/rasterize.hpp"
#include "splatwatt/scene.hpp"

namespace splatwatt {

/// Efficiency-aware pruning score: accumulated blend-weight contribution over
/// the pose set, divided by the point's tile-intersection count. Points that
/// intersect many tiles are expensive, so equal importance yields a lower
/// score and earlier pruning.
struct PruneScores {
  std::vector<double> importance;  // sum of alpha*T over pixels and poses
  std::vector<double> cost;        // tile intersections summed over poses
  std::vector<double> score;       // importance / max(cost, 1)
};

PruneScores compute_prune_scores(const Scene& scene, const std::vector<CameraPose>& poses,
                                 const RasterizeOptions& opts = {});

// Removes exactly ceil(rho * N) lowest-score points; ties broken by point
// index (lower index pruned first). rho must be in [0, 1).
Scene prune(const Scene& scene, const PruneScores& scores, double rho);

}  // namespace splatwatt
