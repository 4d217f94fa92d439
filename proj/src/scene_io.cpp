// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace splatwatt {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit_clamped(double p) {
  const double q = std::clamp(p, 1e-7, 1.0 - 1e-7);
  return std::log(q / (1.0 - q));
}

struct PlyHeader {
  std::size_t vertex_count = 0;
  std::vector<std::string> properties;  // in declaration order, all float32
  std::size_t header_bytes = 0;
};

PlyHeader parse_header(std::istream& in, const std::string& path) {
  auto fail = [&](const std::string& what) { throw IoError(path + ": " + what); };

  PlyHeader h;
  std::string line;
  if (!std::getline(in, line)) fail("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  h.header_bytes += line.size() + 1;
  if (line != "ply") fail("malformed header: missing 'ply' magic");

  bool have_format = false;
  bool in_vertex_element = false;
  bool done = false;
  while (std::getline(in, line)) {
    h.header_bytes += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment") continue;
    if (tok == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt != "binary_little_endian" || ver != "1.0")
        fail("malformed header: format must be 'binary_little_endian 1.0', got '" + fmt + " " +
             ver + "'");
      have_format = true;
    } else if (tok == "element") {
      std::string name;
      long long count = -1;
      ls >> name >> count;
      if (name == "vertex") {
        if (count < 0) fail("malformed header: bad vertex count");
        h.vertex_count = static_cast<std::size_t>(count);
        in_vertex_element = true;
      } else {
        in_vertex_element = false;  // ignore other elements' properties
      }
    } else if (tok == "property") {
      if (!in_vertex_element) continue;
      std::string type, name;
      ls >> type >> name;
      if (type != "float" && type != "float32")
        fail("malformed header: property '" + name + "' has unsupported type '" + type + "'");
      if (name.empty()) fail("malformed header: unnamed property");
      h.properties.push_back(name);
    } else if (tok == "end_header") {
      done = true;
      break;
    } else if (tok.empty()) {
      continue;
    } else {
      fail("malformed header: unexpected token '" + tok + "'");
    }
  }
  if (!done) fail("malformed header: missing 'end_header'");
  if (!have_format) fail("malformed header: missing 'format' line");
  return h;
}

}  // namespace

Scene load_scene(const std::filesystem::path& path, SceneFormat format) {
  (void)format;  // single supported format
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");

  const PlyHeader header = parse_header(in, path.string());

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.properties.size(); ++i) index[header.properties[i]] = i;
  auto require = [&](const std::string& name) -> std::size_t {
    auto it = index.find(name);
    if (it == index.end())
      throw IoError(path.string() + ": malformed header: missing property '" + name + "'");
    return it->second;
  };

  const std::size_t ix = require("x"), iy = require("y"), iz = require("z");
  const std::size_t idc0 = require("f_dc_0"), idc1 = require("f_dc_1"), idc2 = require("f_dc_2");
  const std::size_t iop = require("opacity");
  const std::size_t is0 = require("scale_0"), is1 = require("scale_1"), is2 = require("scale_2");
  const std::size_t ir0 = require("rot_0"), ir1 = require("rot_1"), ir2 = require("rot_2"),
                    ir3 = require("rot_3");

  // f_rest_* higher-order SH, preserved in index order.
  std::vector<std::size_t> rest;
  for (std::size_t k = 0;; ++k) {
    auto it = index.find("f_rest_" + std::to_string(k));
    if (it == index.end()) break;
    rest.push_back(it->second);
  }

  const std::size_t stride = header.properties.size();
  std::vector<float> row(stride);

  Scene scene;
  scene.id = path.stem().string();
  scene.points.resize(header.vertex_count);
  for (std::size_t i = 0; i < header.vertex_count; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(stride * 4));
    if (!in)
      throw IoError(path.string() + ": truncated payload at point " + std::to_string(i));
    for (std::size_t c = 0; c < stride; ++c)
      if (!std::isfinite(row[c]))
        throw IoError(path.string() + ": non-finite attribute '" + header.properties[c] +
                      "' at point " + std::to_string(i));

    GaussianPoint& p = scene.points[i];
    p.position = Vec3(row[ix], row[iy], row[iz]);
    p.scale = Vec3(std::exp(double(row[is0])), std::exp(double(row[is1])),
                   std::exp(double(row[is2])));
    p.rotation = Quat(row[ir0], row[ir1], row[ir2], row[ir3]);  // (w, x, y, z)
    const double qn = p.rotation.coeffs().norm();
    if (!(qn > 1e-12))
      throw IoError(path.string() + ": zero-norm rotation at point " + std::to_string(i));
    p.rotation.normalize();
    p.opacity = std::clamp(sigmoid(row[iop]), 0.0, 1.0);
    p.color_dc = Vec3(row[idc0], row[idc1], row[idc2]);
    p.sh_rest.reserve(rest.size());
    for (std::size_t r : rest) p.sh_rest.push_back(row[r]);
  }
  scene.validate();
  return scene;
}

void save_scene(const Scene& scene, const std::filesystem::path& path, SceneFormat format) {
  (void)format;
  scene.validate();  // refuses non-finite or out-of-range attributes

  const std::size_t rest_count = scene.points.empty() ? 0 : scene.points.front().sh_rest.size();
  for (std::size_t i = 0; i < scene.points.size(); ++i)
    if (scene.points[i].sh_rest.size() != rest_count)
      throw ComputeError("save_scene: inconsistent f_rest count at point " + std::to_string(i));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");

  std::ostringstream hdr;
  hdr << "ply\nformat binary_little_endian 1.0\n";
  hdr << "element vertex " << scene.points.size() << "\n";
  for (const char* n : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"})
    hdr << "property float " << n << "\n";
  for (std::size_t k = 0; k < rest_count; ++k) hdr << "property float f_rest_" << k << "\n";
  hdr << "property float opacity\n";
  for (const char* n : {"scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"})
    hdr << "property float " << n << "\n";
  hdr << "end_header\n";
  out << hdr.str();

  std::vector<float> row;
  for (const GaussianPoint& p : scene.points) {
    row.clear();
    for (int a = 0; a < 3; ++a) row.push_back(static_cast<float>(p.position[a]));
    for (int a = 0; a < 3; ++a) row.push_back(0.0f);  // nx, ny, nz
    for (int a = 0; a < 3; ++a) row.push_back(static_cast<float>(p.color_dc[a]));
    for (float c : p.sh_rest) row.push_back(c);
    row.push_back(static_cast<float>(logit_clamped(p.opacity)));
    for (int a = 0; a < 3; ++a) row.push_back(static_cast<float>(std::log(p.scale[a])));
    row.push_back(static_cast<float>(p.rotation.w()));
    row.push_back(static_cast<float>(p.rotation.x()));
    row.push_back(static_cast<float>(p.rotation.y()));
    row.push_back(static_cast<float>(p.rotation.z()));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * 4));
  }
  if (!out) throw IoError(path.string() + ": write failure");
}

}  // namespace splatwatt
