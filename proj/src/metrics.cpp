// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace splatwatt {

namespace {

void require_same_shape(const Framebuffer& a, const Framebuffer& b, const char* op) {
  if (!a.same_shape(b)) throw ComputeError(std::string(op) + ": image dimension mismatch");
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

std::array<double, kSsimWindow> ssim_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - (kSsimWindow - 1) / 2.0;
    k[i] = std::exp(-0.5 * d * d / (kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable valid-mode filtering of a W x H plane with the SSIM kernel.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h) {
  const auto k = ssim_kernel();
  const int vw = w - kSsimWindow + 1;
  const int vh = h - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(vw) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * plane[y * w + x + i];
      tmp[static_cast<std::size_t>(y) * vw + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(vw) * vh, 0.0);
  for (int y = 0; y < vh; ++y)
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * tmp[static_cast<std::size_t>(y + i) * vw + x];
      out[static_cast<std::size_t>(y) * vw + x] = acc;
    }
  return out;
}

std::vector<double> channel_plane_clamped(const Framebuffer& fb, int c) {
  std::vector<double> plane(static_cast<std::size_t>(fb.width()) * fb.height());
  for (int y = 0; y < fb.height(); ++y)
    for (int x = 0; x < fb.width(); ++x)
      plane[static_cast<std::size_t>(y) * fb.width() + x] = std::clamp(fb.at(x, y, c), 0.0, 1.0);
  return plane;
}

// Summed-area tables over clamped values and their squares; (w+1) x (h+1).
struct Integral {
  int w, h;
  std::vector<double> sum, sumsq;

  Integral(const Framebuffer& fb, int c) : w(fb.width()), h(fb.height()) {
    sum.assign(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    sumsq.assign(sum.size(), 0.0);
    for (int y = 0; y < h; ++y) {
      double row = 0.0, rowsq = 0.0;
      for (int x = 0; x < w; ++x) {
        const double v = std::clamp(fb.at(x, y, c), 0.0, 1.0);
        row += v;
        rowsq += v * v;
        const std::size_t i = static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1);
        sum[i] = sum[i - (w + 1)] + row;
        sumsq[i] = sumsq[i - (w + 1)] + rowsq;
      }
    }
  }

  // Inclusive pixel rectangle [x0, x1] x [y0, y1], pre-clipped by the caller.
  void stats(int x0, int x1, int y0, int y1, double& mean, double& var) const {
    const auto at = [&](const std::vector<double>& t, int x, int y) {
      return t[static_cast<std::size_t>(y) * (w + 1) + x];
    };
    const double n = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
    const double s =
        at(sum, x1 + 1, y1 + 1) - at(sum, x0, y1 + 1) - at(sum, x1 + 1, y0) + at(sum, x0, y0);
    const double s2 = at(sumsq, x1 + 1, y1 + 1) - at(sumsq, x0, y1 + 1) - at(sumsq, x1 + 1, y0) +
                      at(sumsq, x0, y0);
    mean = s / n;
    var = std::max(0.0, s2 / n - mean * mean);
  }
};

double pooled_error(const Framebuffer& a, const Framebuffer& b,
                    const std::function<int(int, int)>& side_at) {
  const int w = a.width(), h = a.height();
  double score = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Integral ia(a, c), ib(b, c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int side = side_at(x, y);
        const int lo = (side - 1) / 2, hi = side / 2;
        const int x0 = std::max(0, x - lo), x1 = std::min(w - 1, x + hi);
        const int y0 = std::max(0, y - lo), y1 = std::min(h - 1, y + hi);
        double ma, va, mb, vb;
        ia.stats(x0, x1, y0, y1, ma, va);
        ib.stats(x0, x1, y0, y1, mb, vb);
        score += (ma - mb) * (ma - mb) + (va - vb) * (va - vb);
      }
    }
  }
  return score / (static_cast<double>(w) * h * 3.0);
}

}  // namespace

double psnr(const Framebuffer& a, const Framebuffer& b) {
  require_same_shape(a, b, "psnr");
  const int w = a.width(), h = a.height();
  double se = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const double d = std::clamp(a.at(x, y, c), 0.0, 1.0) - std::clamp(b.at(x, y, c), 0.0, 1.0);
        se += d * d;
      }
  const double mse = se / (static_cast<double>(w) * h * 3.0);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

std::vector<double> ssim_map(const Framebuffer& a, const Framebuffer& b, int& map_w, int& map_h) {
  require_same_shape(a, b, "ssim");
  const int w = a.width(), h = a.height();
  if (w < kSsimWindow || h < kSsimWindow)
    throw ComputeError("ssim: image smaller than the 11x11 window");
  map_w = w - kSsimWindow + 1;
  map_h = h - kSsimWindow + 1;

  std::vector<double> map(static_cast<std::size_t>(map_w) * map_h, 0.0);
  for (int c = 0; c < 3; ++c) {
    const auto pa = channel_plane_clamped(a, c);
    const auto pb = channel_plane_clamped(b, c);
    std::vector<double> paa(pa.size()), pbb(pa.size()), pab(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      paa[i] = pa[i] * pa[i];
      pbb[i] = pb[i] * pb[i];
      pab[i] = pa[i] * pb[i];
    }
    const auto mu_a = filter_valid(pa, w, h);
    const auto mu_b = filter_valid(pb, w, h);
    const auto m_aa = filter_valid(paa, w, h);
    const auto m_bb = filter_valid(pbb, w, h);
    const auto m_ab = filter_valid(pab, w, h);
    for (std::size_t i = 0; i < map.size(); ++i) {
      const double va = m_aa[i] - mu_a[i] * mu_a[i];
      const double vb = m_bb[i] - mu_b[i] * mu_b[i];
      const double cov = m_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + kSsimC1) * (2.0 * cov + kSsimC2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kSsimC1) * (va + vb + kSsimC2);
      map[i] += num / den / 3.0;
    }
  }
  return map;
}

double ssim(const Framebuffer& a, const Framebuffer& b) {
  int mw = 0, mh = 0;
  const auto map = ssim_map(a, b, mw, mh);
  double acc = 0.0;
  for (double v : map) acc += v;
  return acc / static_cast<double>(map.size());
}

int EccPooling::pool_side(double ecc_deg) const {
  const double d =
      std::min(diameter_max_px, diameter_at_gaze_px + diameter_slope_px_per_deg * ecc_deg);
  return std::max(1, static_cast<int>(std::lround(d)));
}

double ecc_quality(const Framebuffer& a, const Framebuffer& b, const Vec2& gaze,
                   const EccPooling& pooling) {
  require_same_shape(a, b, "ecc_quality");
  if (gaze.x() < 0 || gaze.y() < 0 || gaze.x() > a.width() || gaze.y() > a.height())
    throw ComputeError("ecc_quality: gaze outside image");
  return pooled_error(a, b, [&](int x, int y) {
    const double dist = std::hypot((x + 0.5) - gaze.x(), (y + 0.5) - gaze.y());
    return pooling.pool_side(pooling.eccentricity_deg(dist));
  });
}

double ecc_quality_uniform(const Framebuffer& a, const Framebuffer& b, int pool_side) {
  require_same_shape(a, b, "ecc_quality");
  if (pool_side < 1) throw ComputeError("ecc_quality: pool side must be >= 1");
  return pooled_error(a, b, [&](int, int) { return pool_side; });
}

}  // namespace splatwatt
