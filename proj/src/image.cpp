// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace splatwatt {

Framebuffer Framebuffer::clamped() const {
  Framebuffer out = *this;
  for (double& v : out.data_) v = std::clamp(v, 0.0, 1.0);
  return out;
}

Vec3 Framebuffer::channel_means_clamped() const {
  Vec3 sum = Vec3::Zero();
  const std::size_t n = static_cast<std::size_t>(width_) * height_;
  if (n == 0) return sum;
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) sum[c] += std::clamp(data_[i * 3 + c], 0.0, 1.0);
  return sum / static_cast<double>(n);
}

double linear_to_srgb(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

namespace {

void put_u32be(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back(static_cast<unsigned char>(x >> 24));
  v.push_back(static_cast<unsigned char>(x >> 16));
  v.push_back(static_cast<unsigned char>(x >> 8));
  v.push_back(static_cast<unsigned char>(x));
}

void write_chunk(std::ofstream& out, const char type[4], const unsigned char* data,
                 std::uint32_t len) {
  std::vector<unsigned char> head;
  put_u32be(head, len);
  out.write(reinterpret_cast<const char*>(head.data()), 4);
  out.write(type, 4);
  if (len) out.write(reinterpret_cast<const char*>(data), len);
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
  if (len) crc = crc32(crc, data, len);
  std::vector<unsigned char> tail;
  put_u32be(tail, static_cast<std::uint32_t>(crc));
  out.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace

void write_png(const Framebuffer& fb, const std::filesystem::path& path) {
  const int w = fb.width(), h = fb.height();
  if (w <= 0 || h <= 0) throw IoError("write_png: empty framebuffer");

  // Filter type 0 on every scanline keeps the encoder trivial and the
  // compressed bytes reproducible.
  std::vector<unsigned char> raw(static_cast<std::size_t>(h) * (1 + 3 * w));
  std::size_t o = 0;
  for (int y = 0; y < h; ++y) {
    raw[o++] = 0;
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        raw[o++] = static_cast<unsigned char>(
            std::lround(255.0 * linear_to_srgb(fb.at(x, y, c))));
  }

  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> comp(comp_len);
  if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw IoError("write_png: deflate failure");
  comp.resize(comp_len);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  out.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<unsigned char> ihdr;
  put_u32be(ihdr, static_cast<std::uint32_t>(w));
  put_u32be(ihdr, static_cast<std::uint32_t>(h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  write_chunk(out, "IHDR", ihdr.data(), static_cast<std::uint32_t>(ihdr.size()));
  write_chunk(out, "IDAT", comp.data(), static_cast<std::uint32_t>(comp.size()));
  write_chunk(out, "IEND", nullptr, 0);
  if (!out) throw IoError(path.string() + ": write failure");
}

void write_pfm(const Framebuffer& fb, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << "PF\n" << fb.width() << " " << fb.height() << "\n-1.0\n";
  // PFM stores rows bottom-to-top.
  std::vector<float> row(static_cast<std::size_t>(fb.width()) * 3);
  for (int y = fb.height() - 1; y >= 0; --y) {
    for (int x = 0; x < fb.width(); ++x) {
      const Vec3 p = fb.pixel_clamped(x, y);
      for (int c = 0; c < 3; ++c) row[static_cast<std::size_t>(x) * 3 + c] = static_cast<float>(p[c]);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * 4));
  }
  if (!out) throw IoError(path.string() + ": write failure");
}

}  // namespace splatwatt
