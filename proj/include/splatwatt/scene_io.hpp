// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "splatwatt/scene.hpp"

namespace splatwatt {

enum class SceneFormat { SplatPly };

// Binary little-endian PLY in the de-facto splat export layout: named float32
// properties x y z nx ny nz f_dc_0..2 [f_rest_*] opacity scale_0..2 rot_0..3,
// with log-encoded scales and logit-encoded opacities. The reader locates
// properties by name (any order), skips unknown ones, and enforces all
// GaussianPoint invariants on the decoded values.
Scene load_scene(const std::filesystem::path& path, SceneFormat format = SceneFormat::SplatPly);

void save_scene(const Scene& scene, const std::filesystem::path& path,
                SceneFormat format = SceneFormat::SplatPly);

}  // namespace splatwatt
