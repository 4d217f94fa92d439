// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/rasterize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace splatwatt {

namespace {

struct TileGrid {
  int tiles_x = 0;
  int tiles_y = 0;
  int tile_size = 16;
  int width = 0;
  int height = 0;

  TileGrid(int w, int h, int ts)
      : tiles_x((w + ts - 1) / ts), tiles_y((h + ts - 1) / ts), tile_size(ts), width(w),
        height(h) {}

  int count() const { return tiles_x * tiles_y; }
};

struct ListEntry {
  double depth;
  std::uint32_t splat;  // index into the projected array
};

struct PreparedFrame {
  TileGrid grid;
  std::vector<ProjectedSplat> splats;
  std::vector<char> tile_active;
  std::vector<std::vector<ListEntry>> tile_lists;  // depth-sorted, ties by point index
  std::vector<char> splat_touches_active;
};

// Runs fn(tile_index) for every active tile. Work distribution never affects
// results: each tile writes only to its own slots.
void for_each_active_tile(const PreparedFrame& frame, int workers,
                          const std::function<void(int)>& fn) {
  std::vector<int> active;
  active.reserve(frame.tile_lists.size());
  for (int t = 0; t < frame.grid.count(); ++t)
    if (frame.tile_active[t]) active.push_back(t);

  if (workers <= 1 || active.size() <= 1) {
    for (int t : active) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= active.size()) return;
      fn(active[k]);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(workers, static_cast<int>(active.size()));
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

PreparedFrame prepare(const Scene& scene, const CameraPose& pose, const RasterizeOptions& opts) {
  PreparedFrame frame{TileGrid(pose.width, pose.height, opts.tile_size),
                      project_points(scene, pose, opts),
                      {},
                      {},
                      {}};
  const TileGrid& grid = frame.grid;

  frame.tile_active.assign(grid.count(), 1);
  if (opts.tile_filter) {
    for (int ty = 0; ty < grid.tiles_y; ++ty)
      for (int tx = 0; tx < grid.tiles_x; ++tx)
        frame.tile_active[ty * grid.tiles_x + tx] = opts.tile_filter(tx, ty) ? 1 : 0;
  }

  frame.tile_lists.resize(grid.count());
  frame.splat_touches_active.assign(frame.splats.size(), 0);
  for (std::uint32_t s = 0; s < frame.splats.size(); ++s) {
    const ProjectedSplat& ps = frame.splats[s];
    for (int ty = ps.ty0; ty < ps.ty1; ++ty)
      for (int tx = ps.tx0; tx < ps.tx1; ++tx) {
        const int t = ty * grid.tiles_x + tx;
        if (!frame.tile_active[t]) continue;
        frame.tile_lists[t].push_back({ps.depth, s});
        frame.splat_touches_active[s] = 1;
      }
  }
  return frame;
}

void sort_tile_list(std::vector<ListEntry>& list, const std::vector<ProjectedSplat>& splats) {
  std::sort(list.begin(), list.end(), [&](const ListEntry& a, const ListEntry& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return splats[a.splat].point_index < splats[b.splat].point_index;
  });
}

// Point-level charges: projection work and a raw-attribute fetch per point
// whose footprint touches an active tile.
OpCounters point_level_counters(const PreparedFrame& frame, const CountingModel& cm) {
  OpCounters c;
  for (std::size_t s = 0; s < frame.splats.size(); ++s) {
    if (!frame.splat_touches_active[s]) continue;
    c.flops += cm.projection_flops_per_point;
    c.dram_bytes += cm.point_attribute_bytes;
  }
  return c;
}

std::uint64_t sort_cost_flops(std::size_t n) {
  if (n < 2) return 0;
  return static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(n) * std::log2(static_cast<double>(n))));
}

}  // namespace

std::vector<ProjectedSplat> project_points(const Scene& scene, const CameraPose& pose,
                                           const RasterizeOptions& opts) {
  pose.validate();
  const TileGrid grid(pose.width, pose.height, opts.tile_size);
  const double q_cut_sigma = opts.footprint_sigma;

  std::vector<ProjectedSplat> out;
  out.reserve(scene.size());
  for (std::uint32_t i = 0; i < scene.size(); ++i) {
    const GaussianPoint& p = scene.points[i];
    const Vec3 tc = pose.to_camera(p.position);
    if (!(tc.z() > opts.znear)) continue;  // behind or on the near plane

    const double zi = 1.0 / tc.z();
    ProjectedSplat ps;
    ps.point_index = i;
    ps.depth = tc.z();
    ps.mean = Vec2(pose.fx * tc.x() * zi + pose.cx, pose.fy * tc.y() * zi + pose.cy);

    const Mat3 rot = p.rotation.toRotationMatrix();
    const Mat3 m = rot * p.scale.asDiagonal();
    const Mat3 cov3 = m * m.transpose();

    Eigen::Matrix<double, 2, 3> jac;
    jac << pose.fx * zi, 0.0, -pose.fx * tc.x() * zi * zi,  //
        0.0, pose.fy * zi, -pose.fy * tc.y() * zi * zi;
    const Eigen::Matrix<double, 2, 3> a = jac * pose.rotation;
    Mat2 cov2 = a * cov3 * a.transpose();
    cov2(0, 0) += opts.covariance_floor;
    cov2(1, 1) += opts.covariance_floor;
    // Symmetrize against roundoff so the conic is well-defined.
    const double off = 0.5 * (cov2(0, 1) + cov2(1, 0));
    cov2(0, 1) = cov2(1, 0) = off;

    const double det = cov2(0, 0) * cov2(1, 1) - off * off;
    if (!(det > 0.0)) continue;
    ps.covariance = cov2;
    ps.conic = Vec3(cov2(1, 1) / det, -off / det, cov2(0, 0) / det);
    ps.alpha = p.opacity;
    ps.rgb = p.rgb();

    const double rx = q_cut_sigma * std::sqrt(cov2(0, 0));
    const double ry = q_cut_sigma * std::sqrt(cov2(1, 1));
    const double x0 = ps.mean.x() - rx, x1 = ps.mean.x() + rx;
    const double y0 = ps.mean.y() - ry, y1 = ps.mean.y() + ry;
    if (x1 < 0.0 || y1 < 0.0 || x0 >= pose.width || y0 >= pose.height) {
      ps.tx0 = ps.tx1 = ps.ty0 = ps.ty1 = 0;
    } else {
      const double ts = grid.tile_size;
      ps.tx0 = std::max(0, static_cast<int>(std::floor(x0 / ts)));
      ps.ty0 = std::max(0, static_cast<int>(std::floor(y0 / ts)));
      ps.tx1 = std::min(grid.tiles_x, static_cast<int>(std::floor(x1 / ts)) + 1);
      ps.ty1 = std::min(grid.tiles_y, static_cast<int>(std::floor(y1 / ts)) + 1);
      if (ps.tx1 <= ps.tx0 || ps.ty1 <= ps.ty0) ps.tx0 = ps.tx1 = ps.ty0 = ps.ty1 = 0;
    }
    out.push_back(ps);
  }
  return out;
}

RasterizeResult rasterize(const Scene& scene, const CameraPose& pose,
                          const RasterizeOptions& opts) {
  PreparedFrame frame = prepare(scene, pose, opts);
  const TileGrid& grid = frame.grid;
  const CountingModel& cm = opts.counting;
  const double q_cut = 0.5 * opts.footprint_sigma * opts.footprint_sigma;

  RasterizeResult result;
  result.image = Framebuffer(pose.width, pose.height);
  if (opts.collect_point_weights) result.point_weights.assign(scene.size(), 0.0);

  struct TileOut {
    OpCounters counters;
    std::vector<double> weights;  // aligned with the tile list
  };
  std::vector<TileOut> tile_out(grid.count());

  for_each_active_tile(frame, opts.workers, [&](int t) {
    std::vector<ListEntry>& list = frame.tile_lists[t];
    sort_tile_list(list, frame.splats);
    TileOut& out = tile_out[t];
    out.counters.flops += sort_cost_flops(list.size());
    out.counters.sram_bytes += list.size() * cm.splat_record_bytes;
    if (opts.collect_point_weights) out.weights.assign(list.size(), 0.0);

    const int tx = t % grid.tiles_x, ty = t / grid.tiles_x;
    const int x0 = tx * grid.tile_size, x1 = std::min(grid.width, x0 + grid.tile_size);
    const int y0 = ty * grid.tile_size, y1 = std::min(grid.height, y0 + grid.tile_size);

    std::uint64_t events = 0;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        if (opts.pixel_filter && !opts.pixel_filter(x, y)) continue;
        out.counters.dram_bytes += cm.framebuffer_pixel_bytes;
        double transmittance = 1.0;
        Vec3 color = Vec3::Zero();
        for (std::size_t k = 0; k < list.size(); ++k) {
          const ProjectedSplat& ps = frame.splats[list[k].splat];
          ++events;
          const double dx = (x + 0.5) - ps.mean.x();
          const double dy = (y + 0.5) - ps.mean.y();
          const double q =
              0.5 * (ps.conic[0] * dx * dx + 2.0 * ps.conic[1] * dx * dy +
                     ps.conic[2] * dy * dy);
          if (!(q >= 0.0) || q > q_cut) continue;  // outside the footprint cutoff
          const double alpha = std::min(opts.alpha_max, ps.alpha * std::exp(-q));
          if (alpha < opts.alpha_min) continue;
          const double w = alpha * transmittance;
          color += w * ps.rgb;
          if (opts.collect_point_weights) out.weights[k] += w;
          transmittance *= 1.0 - alpha;
          if (transmittance < opts.transmittance_floor) break;
        }
        result.image.set_pixel(x, y, color);
      }
    }
    out.counters.flops += events * cm.flops_per_blend_event;
    out.counters.sram_bytes += events * cm.pixel_state_bytes;
  });

  // Deterministic reduction in tile order; counters are integral and
  // point-weight accumulation order is fixed by (tile, list position).
  result.counters = point_level_counters(frame, cm);
  for (int t = 0; t < grid.count(); ++t) {
    if (!frame.tile_active[t]) continue;
    result.counters += tile_out[t].counters;
    if (opts.collect_point_weights) {
      const auto& list = frame.tile_lists[t];
      for (std::size_t k = 0; k < list.size(); ++k)
        result.point_weights[frame.splats[list[k].splat].point_index] += tile_out[t].weights[k];
    }
  }
  return result;
}

std::vector<Vec3> render_gradient_colors(const Scene& scene, const CameraPose& pose,
                                         const Framebuffer& upstream,
                                         const RasterizeOptions& opts) {
  if (upstream.width() != pose.width || upstream.height() != pose.height)
    throw ComputeError("render_gradient_colors: upstream size mismatch");

  PreparedFrame frame = prepare(scene, pose, opts);
  const TileGrid& grid = frame.grid;
  const double q_cut = 0.5 * opts.footprint_sigma * opts.footprint_sigma;

  std::vector<std::vector<Vec3>> tile_grads(grid.count());

  for_each_active_tile(frame, opts.workers, [&](int t) {
    std::vector<ListEntry>& list = frame.tile_lists[t];
    sort_tile_list(list, frame.splats);
    tile_grads[t].assign(list.size(), Vec3::Zero());

    const int tx = t % grid.tiles_x, ty = t / grid.tiles_x;
    const int x0 = tx * grid.tile_size, x1 = std::min(grid.width, x0 + grid.tile_size);
    const int y0 = ty * grid.tile_size, y1 = std::min(grid.height, y0 + grid.tile_size);

    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        if (opts.pixel_filter && !opts.pixel_filter(x, y)) continue;
        const Vec3 up = upstream.pixel(x, y);
        const bool up_zero = up.isZero(0.0);
        double transmittance = 1.0;
        for (std::size_t k = 0; k < list.size(); ++k) {
          const ProjectedSplat& ps = frame.splats[list[k].splat];
          const double dx = (x + 0.5) - ps.mean.x();
          const double dy = (y + 0.5) - ps.mean.y();
          const double q =
              0.5 * (ps.conic[0] * dx * dx + 2.0 * ps.conic[1] * dx * dy +
                     ps.conic[2] * dy * dy);
          if (!(q >= 0.0) || q > q_cut) continue;
          const double alpha = std::min(opts.alpha_max, ps.alpha * std::exp(-q));
          if (alpha < opts.alpha_min) continue;
          const double w = alpha * transmittance;
          if (!up_zero) tile_grads[t][k] += w * up;
          transmittance *= 1.0 - alpha;
          if (transmittance < opts.transmittance_floor) break;
        }
      }
    }
  });

  std::vector<Vec3> grads(scene.size(), Vec3::Zero());
  for (int t = 0; t < grid.count(); ++t) {
    if (!frame.tile_active[t]) continue;
    const auto& list = frame.tile_lists[t];
    for (std::size_t k = 0; k < list.size(); ++k)
      grads[frame.splats[list[k].splat].point_index] += tile_grads[t][k];
  }
  return grads;
}

}  // namespace splatwatt
