// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "splatwatt/image.hpp"

namespace splatwatt {

/// 10*log10(1/MSE) over all pixels and channels of the clamped linear images.
/// Identical images return +infinity.
double psnr(const Framebuffer& a, const Framebuffer& b);

/// Windowed SSIM: 11x11 Gaussian window (sigma 1.5), C1=0.01^2, C2=0.03^2 on
/// unit dynamic range, averaged over channels and valid window positions.
/// Requires min(width, height) >= 11.
double ssim(const Framebuffer& a, const Framebuffer& b);

/// Per-position SSIM map (channel-averaged) over the valid region, size
/// (width-10) x (height-10), row-major. Exposed for shift-consistency tests.
std::vector<double> ssim_map(const Framebuffer& a, const Framebuffer& b, int& map_w, int& map_h);

/// Eccentricity-dependent pool sizing: pool diameter (pixels) grows linearly
/// with angular distance from the gaze point. With slope 0 the pooling is
/// uniform at `diameter_at_gaze_px` everywhere.
struct EccPooling {
  double pixels_per_degree = 8.0;
  double diameter_at_gaze_px = 1.0;
  double diameter_slope_px_per_deg = 31.0 / 40.0;  // ~1 px at gaze, ~32 px at 40 deg
  double diameter_max_px = 64.0;

  double eccentricity_deg(double dist_px) const { return dist_px / pixels_per_degree; }
  int pool_side(double ecc_deg) const;
};

/// Eccentricity-pooled error: mean over pixels and channels of the squared
/// difference of locally pooled statistics (window mean and variance), with
/// the window side given by the pooling map at the pixel's eccentricity from
/// `gaze`. Zero iff pooled statistics agree everywhere; with pool side forced
/// to 1 this reduces to the per-pixel MSE. Lower is better.
double ecc_quality(const Framebuffer& a, const Framebuffer& b, const Vec2& gaze,
                   const EccPooling& pooling);

/// ecc_quality with a constant pool side (used for cross-region alignment at
/// a region's representative eccentricity).
double ecc_quality_uniform(const Framebuffer& a, const Framebuffer& b, int pool_side);

}  // namespace splatwatt
