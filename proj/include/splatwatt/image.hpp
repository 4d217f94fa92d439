// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "splatwatt/types.hpp"

namespace splatwatt {

/// Linear-RGB image. Blending writes raw (possibly >1) values; consumers that
/// need displayable values clamp at readout via clamped()/pixel_clamped().
class Framebuffer {
 public:
  Framebuffer() = default;
  Framebuffer(int width, int height)
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * 3, 0.0) {}

  int width() const { return width_; }
  int height() const { return height_; }

  double& at(int x, int y, int c) { return data_[idx(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[idx(x, y, c)]; }

  Vec3 pixel(int x, int y) const {
    const std::size_t i = idx(x, y, 0);
    return Vec3(data_[i], data_[i + 1], data_[i + 2]);
  }
  void set_pixel(int x, int y, const Vec3& v) {
    const std::size_t i = idx(x, y, 0);
    data_[i] = v[0];
    data_[i + 1] = v[1];
    data_[i + 2] = v[2];
  }
  Vec3 pixel_clamped(int x, int y) const {
    return pixel(x, y).cwiseMax(0.0).cwiseMin(1.0);
  }

  Framebuffer clamped() const;

  // Mean of each channel after clamping to [0,1].
  Vec3 channel_means_clamped() const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const Framebuffer& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

 private:
  std::size_t idx(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3 + c;
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// 8-bit RGB PNG; values are clamped and sRGB-encoded at the I/O boundary.
// Byte output is deterministic for identical pixel content.
void write_png(const Framebuffer& fb, const std::filesystem::path& path);

// Raw float32 export (PFM, little-endian) of the clamped linear image.
void write_pfm(const Framebuffer& fb, const std::filesystem::path& path);

double linear_to_srgb(double c);

}  // namespace splatwatt
