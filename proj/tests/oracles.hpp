// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used as test oracles. Everything here
// deliberately avoids the library's tile machinery, Eigen matrix products and
// integral images: plain scalar loops only.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "splatwatt/finetune.hpp"
#include "splatwatt/image.hpp"
#include "splatwatt/rasterize.hpp"
#include "splatwatt/scene.hpp"

namespace splatwatt::oracle {

struct FlatSplat {
  double u = 0, v = 0, depth = 0;
  double c00 = 0, c01 = 0, c11 = 0;  // 2D covariance
  double i00 = 0, i01 = 0, i11 = 0;  // its inverse
  double alpha = 0;
  double rgb[3] = {0, 0, 0};
  std::size_t index = 0;
  bool visible = false;
};

// Scalar-only reimplementation of the projection math.
inline FlatSplat project_one(const GaussianPoint& p, const CameraPose& pose,
                             const RasterizeOptions& opts) {
  FlatSplat s;
  double cam[3];
  for (int r = 0; r < 3; ++r) {
    cam[r] = pose.translation[r];
    for (int c = 0; c < 3; ++c) cam[r] += pose.rotation(r, c) * p.position[c];
  }
  if (!(cam[2] > opts.znear)) return s;
  s.depth = cam[2];
  const double zi = 1.0 / cam[2];
  s.u = pose.fx * cam[0] * zi + pose.cx;
  s.v = pose.fy * cam[1] * zi + pose.cy;

  const double qw = p.rotation.w(), qx = p.rotation.x(), qy = p.rotation.y(),
               qz = p.rotation.z();
  double rot[3][3] = {
      {1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qw * qz), 2 * (qx * qz + qw * qy)},
      {2 * (qx * qy + qw * qz), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qw * qx)},
      {2 * (qx * qz - qw * qy), 2 * (qy * qz + qw * qx), 1 - 2 * (qx * qx + qy * qy)}};
  double m[3][3];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[r][c] = rot[r][c] * p.scale[c];
  double cov3[3][3];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      cov3[r][c] = 0;
      for (int k = 0; k < 3; ++k) cov3[r][c] += m[r][k] * m[c][k];
    }

  double jac[2][3] = {{pose.fx * zi, 0, -pose.fx * cam[0] * zi * zi},
                      {0, pose.fy * zi, -pose.fy * cam[1] * zi * zi}};
  double a[2][3];
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) {
      a[r][c] = 0;
      for (int k = 0; k < 3; ++k) a[r][c] += jac[r][k] * pose.rotation(k, c);
    }
  double tmp[2][3];
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) {
      tmp[r][c] = 0;
      for (int k = 0; k < 3; ++k) tmp[r][c] += a[r][k] * cov3[k][c];
    }
  double cov2[2][2];
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      cov2[r][c] = 0;
      for (int k = 0; k < 3; ++k) cov2[r][c] += tmp[r][k] * a[c][k];
    }
  s.c00 = cov2[0][0] + opts.covariance_floor;
  s.c11 = cov2[1][1] + opts.covariance_floor;
  s.c01 = 0.5 * (cov2[0][1] + cov2[1][0]);

  const double det = s.c00 * s.c11 - s.c01 * s.c01;
  if (!(det > 0)) return s;
  s.i00 = s.c11 / det;
  s.i01 = -s.c01 / det;
  s.i11 = s.c00 / det;
  s.alpha = p.opacity;
  const Vec3 rgb = p.rgb();
  for (int c = 0; c < 3; ++c) s.rgb[c] = rgb[c];
  s.visible = true;
  return s;
}

// Per-pixel blend over all splats sorted by (depth, index); no tiles. Applies
// the same footprint cutoff, alpha thresholds and termination rule as the
// library blend, so results must agree to roundoff.
inline Framebuffer brute_force_render(const Scene& scene, const CameraPose& pose,
                                      const RasterizeOptions& opts,
                                      std::vector<double>* weights = nullptr) {
  std::vector<FlatSplat> splats;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    FlatSplat s = project_one(scene.points[i], pose, opts);
    s.index = i;
    if (s.visible) splats.push_back(s);
  }
  std::sort(splats.begin(), splats.end(), [](const FlatSplat& a, const FlatSplat& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.index < b.index;
  });

  if (weights) weights->assign(scene.size(), 0.0);
  const double q_cut = 0.5 * opts.footprint_sigma * opts.footprint_sigma;
  Framebuffer fb(pose.width, pose.height);
  for (int y = 0; y < pose.height; ++y) {
    for (int x = 0; x < pose.width; ++x) {
      double t = 1.0;
      double color[3] = {0, 0, 0};
      for (const FlatSplat& s : splats) {
        const double dx = (x + 0.5) - s.u, dy = (y + 0.5) - s.v;
        const double q = 0.5 * (s.i00 * dx * dx + 2.0 * s.i01 * dx * dy + s.i11 * dy * dy);
        if (!(q >= 0.0) || q > q_cut) continue;
        const double alpha = std::min(opts.alpha_max, s.alpha * std::exp(-q));
        if (alpha < opts.alpha_min) continue;
        const double w = alpha * t;
        for (int c = 0; c < 3; ++c) color[c] += w * s.rgb[c];
        if (weights) (*weights)[s.index] += w;
        t *= 1.0 - alpha;
        if (t < opts.transmittance_floor) break;
      }
      for (int c = 0; c < 3; ++c) fb.at(x, y, c) = color[c];
    }
  }
  return fb;
}

// Counts tiles whose region overlaps the splat's footprint box by looping
// over the whole grid with a rectangle-overlap test.
inline int brute_force_tile_count(const ProjectedSplat& s, const CameraPose& pose,
                                  const RasterizeOptions& opts) {
  const int ts = opts.tile_size;
  const int tiles_x = (pose.width + ts - 1) / ts;
  const int tiles_y = (pose.height + ts - 1) / ts;
  const double rx = opts.footprint_sigma * std::sqrt(s.covariance(0, 0));
  const double ry = opts.footprint_sigma * std::sqrt(s.covariance(1, 1));
  const double x0 = s.mean.x() - rx, x1 = s.mean.x() + rx;
  const double y0 = s.mean.y() - ry, y1 = s.mean.y() + ry;
  if (x1 < 0.0 || y1 < 0.0 || x0 >= pose.width || y0 >= pose.height) return 0;
  int count = 0;
  for (int ty = 0; ty < tiles_y; ++ty)
    for (int tx = 0; tx < tiles_x; ++tx) {
      const bool overlap = x1 >= tx * ts && x0 < (tx + 1.0) * ts &&  //
                           y1 >= ty * ts && y0 < (ty + 1.0) * ts;
      if (overlap) ++count;
    }
  return count;
}

// Central finite differences of an arbitrary scalar function of the scene's
// DC color coefficients.
inline std::vector<Vec3> fd_color_gradient(const Scene& scene,
                                           const std::function<double(const Scene&)>& f,
                                           double h = 1e-4) {
  std::vector<Vec3> grads(scene.size(), Vec3::Zero());
  Scene work = scene;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double saved = work.points[i].color_dc[c];
      work.points[i].color_dc[c] = saved + h;
      const double fp = f(work);
      work.points[i].color_dc[c] = saved - h;
      const double fm = f(work);
      work.points[i].color_dc[c] = saved;
      grads[i][c] = (fp - fm) / (2.0 * h);
    }
  }
  return grads;
}

// The loss finetune_gradient differentiates, recomputed independently.
inline double eq5_loss(const Scene& scene, const std::vector<CameraPose>& poses,
                       const std::vector<Framebuffer>& refs, double lambda,
                       const DisplayModel& display, const RasterizeOptions& opts) {
  double loss = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Framebuffer raw = rasterize(scene, poses[i], opts).image;
    double se = 0.0;
    for (int y = 0; y < poses[i].height; ++y)
      for (int x = 0; x < poses[i].width; ++x)
        for (int c = 0; c < 3; ++c) {
          const double d = std::clamp(raw.at(x, y, c), 0.0, 1.0) -
                           std::clamp(refs[i].at(x, y, c), 0.0, 1.0);
          se += d * d;
        }
    const double n_pix = static_cast<double>(poses[i].width) * poses[i].height;
    loss += (se / (3.0 * n_pix) + lambda * display_power(raw, display)) /
            static_cast<double>(poses.size());
  }
  return loss;
}

// Direct-convolution SSIM (no separability), averaged over channels and valid
// positions.
inline double naive_ssim(const Framebuffer& a, const Framebuffer& b) {
  const int win = 11;
  const double sigma = 1.5, c1 = 1e-4, c2 = 9e-4;
  double kernel[11][11];
  double ksum = 0.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      const double di = i - 5.0, dj = j - 5.0;
      kernel[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      ksum += kernel[i][j];
    }
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) kernel[i][j] /= ksum;

  const int w = a.width(), h = a.height();
  double total = 0.0;
  std::size_t count = 0;
  for (int y = 0; y + win <= h; ++y)
    for (int x = 0; x + win <= w; ++x) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
        for (int i = 0; i < win; ++i)
          for (int j = 0; j < win; ++j) {
            const double va = std::clamp(a.at(x + j, y + i, c), 0.0, 1.0);
            const double vb = std::clamp(b.at(x + j, y + i, c), 0.0, 1.0);
            ma += kernel[i][j] * va;
            mb += kernel[i][j] * vb;
            maa += kernel[i][j] * va * va;
            mbb += kernel[i][j] * vb * vb;
            mab += kernel[i][j] * va * vb;
          }
        const double var_a = maa - ma * ma, var_b = mbb - mb * mb, cov = mab - ma * mb;
        s += (2 * ma * mb + c1) * (2 * cov + c2) /
             ((ma * ma + mb * mb + c1) * (var_a + var_b + c2)) / 3.0;
      }
      total += s;
      ++count;
    }
  return total / static_cast<double>(count);
}

// Direct-loop pooled-statistics error with a caller-supplied pool side map.
inline double naive_pooled_error(const Framebuffer& a, const Framebuffer& b,
                                 const std::function<int(int, int)>& side_at) {
  const int w = a.width(), h = a.height();
  double score = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int side = side_at(x, y);
        const int lo = (side - 1) / 2, hi = side / 2;
        const int x0 = std::max(0, x - lo), x1 = std::min(w - 1, x + hi);
        const int y0 = std::max(0, y - lo), y1 = std::min(h - 1, y + hi);
        double sa = 0, sb = 0, saa = 0, sbb = 0;
        for (int yy = y0; yy <= y1; ++yy)
          for (int xx = x0; xx <= x1; ++xx) {
            const double va = std::clamp(a.at(xx, yy, c), 0.0, 1.0);
            const double vb = std::clamp(b.at(xx, yy, c), 0.0, 1.0);
            sa += va;
            sb += vb;
            saa += va * va;
            sbb += vb * vb;
          }
        const double n = static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
        const double ma = sa / n, mb = sb / n;
        const double va = std::max(0.0, saa / n - ma * ma);
        const double vb = std::max(0.0, sbb / n - mb * mb);
        score += (ma - mb) * (ma - mb) + (va - vb) * (va - vb);
      }
  return score / (static_cast<double>(w) * h * 3.0);
}

// Dense grid search over [lo, hi]; n+1 evaluation points.
inline double grid_search_min_rho(const std::function<double(double)>& total, double lo,
                                  double hi, int n = 1000000) {
  double best_rho = lo, best = total(lo);
  for (int i = 1; i <= n; ++i) {
    const double rho = lo + (hi - lo) * static_cast<double>(i) / n;
    const double v = total(rho);
    if (v < best) {
      best = v;
      best_rho = rho;
    }
  }
  return best_rho;
}

// Small deterministic test scene; colors clamped to a clamp-safe range so
// finite differences never straddle the decode or framebuffer clamps.
inline Scene test_scene(std::size_t count, std::uint64_t seed, double extent = 1.0,
                        bool clamp_colors = false) {
  GeneratorSpec spec;
  spec.count = count;
  spec.extent = Vec3(extent, extent, 0.8 * extent);
  spec.seed = seed;
  spec.log_scale_mean = -2.6;
  spec.log_scale_stddev = 0.4;
  Scene scene = generate_synthetic_scene(spec);
  if (clamp_colors)
    for (GaussianPoint& p : scene.points)
      for (int c = 0; c < 3; ++c) p.color_dc[c] = std::clamp(p.color_dc[c], -0.9, 0.9);
  return scene;
}

inline CameraPose identity_pose(int width = 64, int height = 64, double f = 60.0) {
  CameraPose pose;
  pose.width = width;
  pose.height = height;
  pose.fx = pose.fy = f;
  pose.cx = 0.5 * width;
  pose.cy = 0.5 * height;
  return pose;
}

}  // namespace splatwatt::oracle
