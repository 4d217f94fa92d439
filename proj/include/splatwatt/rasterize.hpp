// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "splatwatt/image.hpp"
#include "splatwatt/scene.hpp"

namespace splatwatt {

struct OpCounters {
  std::uint64_t flops = 0;
  std::uint64_t sram_bytes = 0;
  std::uint64_t dram_bytes = 0;

  OpCounters& operator+=(const OpCounters& o) {
    flops += o.flops;
    sram_bytes += o.sram_bytes;
    dram_bytes += o.dram_bytes;
    return *this;
  }
  friend OpCounters operator+(OpCounters a, const OpCounters& b) { return a += b; }
  bool operator==(const OpCounters&) const = default;
};

/// Work/traffic charges of the tile-based pipeline. Defaults are derived by
/// counting arithmetic in the reference formulas (breakdown in the README);
/// every charge is configurable so reported Watts are auditable.
struct CountingModel {
  std::uint64_t projection_flops_per_point = 196;  // per point touching an active tile
  std::uint64_t flops_per_blend_event = 24;        // one splat evaluated at one pixel
  std::uint64_t splat_record_bytes = 40;           // SRAM: staged record per (point, tile)
  std::uint64_t pixel_state_bytes = 32;            // SRAM: accumulator r/w per blend event
  std::uint64_t point_attribute_bytes = 56;        // DRAM: raw attributes per point per frame
  std::uint64_t framebuffer_pixel_bytes = 4;       // DRAM: writeout per pixel of active tiles
};

struct ProjectedSplat {
  Vec2 mean = Vec2::Zero();        // pixel coordinates
  Mat2 covariance = Mat2::Zero();  // regularized, pixels^2
  Vec3 conic = Vec3::Zero();       // (a, b, c) with d'Cov^-1 d = a dx^2 + 2b dx dy + c dy^2
  double depth = 0.0;
  double alpha = 0.0;  // decoded opacity
  Vec3 rgb = Vec3::Zero();
  std::uint32_t point_index = 0;
  int tx0 = 0, tx1 = 0, ty0 = 0, ty1 = 0;  // half-open tile span, clipped to the grid

  int tile_count() const {
    return tx1 > tx0 && ty1 > ty0 ? (tx1 - tx0) * (ty1 - ty0) : 0;
  }
};

struct RasterizeOptions {
  int workers = 1;
  int tile_size = 16;
  double znear = 1e-2;
  double covariance_floor = 1e-7;
  double footprint_sigma = 3.0;  // footprint cutoff, standard deviations
  double transmittance_floor = 1e-4;
  double alpha_min = 1.0 / 255.0;
  double alpha_max = 0.99;
  CountingModel counting{};
  // Restricts rendering to tiles where this returns true (foveated regions,
  // counter-additivity checks). Null renders the full grid.
  std::function<bool(int, int)> tile_filter;
  // Scissor within active tiles: pixels failing it are neither blended nor
  // charged for writeout. Null passes every pixel.
  std::function<bool(int, int)> pixel_filter;
  bool collect_point_weights = false;
};

struct RasterizeResult {
  Framebuffer image;  // raw linear RGB; clamp at readout
  OpCounters counters;
  // Per scene point, sum over pixels of the committed blend weight alpha*T
  // (only when collect_point_weights is set).
  std::vector<double> point_weights;
};

// Perspective projection of means with first-order covariance propagation.
// Points behind znear are culled; covariances carry the regularization floor.
std::vector<ProjectedSplat> project_points(const Scene& scene, const CameraPose& pose,
                                           const RasterizeOptions& opts = {});

// Deterministic tile-based forward render: front-to-back alpha blending per
// pixel with early termination, instrumented per the counting model. Output
// is bit-identical for any worker count.
RasterizeResult rasterize(const Scene& scene, const CameraPose& pose,
                          const RasterizeOptions& opts = {});

// Adjoint of blending w.r.t. per-point colors: for each point, the sum over
// pixels of blend weight * upstream pixel gradient. Gradients are w.r.t. the
// decoded linear RGB; callers chain through the color decode themselves.
std::vector<Vec3> render_gradient_colors(const Scene& scene, const CameraPose& pose,
                                         const Framebuffer& upstream,
                                         const RasterizeOptions& opts = {});

}  // namespace splatwatt
