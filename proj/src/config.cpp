// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/config.hpp"

#include <thread>

#include "splatwatt/scene_io.hpp"

namespace splatwatt {

namespace {

double num(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? number_from_json(j.at(key)) : fallback;
}

Vec3 vec3_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-element array");
  return Vec3(number_from_json(j[0]), number_from_json(j[1]), number_from_json(j[2]));
}

Json vec3_to(const Vec3& v) {
  return Json::array({json_number(v[0]), json_number(v[1]), json_number(v[2])});
}

}  // namespace

double QualityPolicy::preset_fraction() const {
  if (preset == "H") return 0.99;
  if (preset == "M") return 0.98;
  if (preset == "L") return 0.97;
  throw ConfigError("quality preset must be H, M, or L (got '" + preset + "')");
}

RasterizeOptions RunConfig::raster_options() const {
  RasterizeOptions opts;
  opts.workers = threads > 0 ? threads
                             : std::max(1u, std::thread::hardware_concurrency());
  opts.tile_size = tile_size;
  opts.counting = counting;
  return opts;
}

OptimizeContext RunConfig::context() const {
  return OptimizeContext{display, energy, raster_options(), finetune};
}

Scene RunConfig::make_scene() const {
  if (!generate_scene) return load_scene(scene_path);
  GeneratorSpec spec = generator;
  spec.seed = seed;
  return generate_synthetic_scene(spec);
}

std::vector<CameraPose> RunConfig::make_poses(const Scene& scene) const {
  // Pose sub-seed derived from the run seed.
  return sample_poses(scene, poses.count, seed + 1, poses);
}

RunConfig config_from_json(const Json& j) {
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
    throw ConfigError("config: schema_version must be 1");
  if (!j.contains("seed")) throw ConfigError("config: seed is mandatory");

  RunConfig cfg;
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.threads = j.value("threads", 0);
  if (j.contains("raster")) {
    cfg.tile_size = j.at("raster").value("tile_size", cfg.tile_size);
    if (cfg.tile_size < 4) throw ConfigError("config: raster.tile_size must be >= 4");
  }

  if (j.contains("scene")) {
    const Json& s = j.at("scene");
    const std::string source = s.value("source", "generate");
    if (source == "file") {
      cfg.generate_scene = false;
      if (!s.contains("path")) throw ConfigError("config: scene.source=file requires scene.path");
      cfg.scene_path = s.at("path").get<std::string>();
    } else if (source == "generate") {
      cfg.generate_scene = true;
    } else {
      throw ConfigError("config: scene.source must be 'generate' or 'file'");
    }
    if (s.contains("generator")) {
      const Json& g = s.at("generator");
      cfg.generator.count = g.value("count", cfg.generator.count);
      if (g.contains("extent")) cfg.generator.extent = vec3_from(g.at("extent"));
      if (g.contains("color_profile"))
        cfg.generator = GeneratorSpec::with_color_profile(cfg.generator,
                                                          g.at("color_profile").get<std::string>());
      if (g.contains("color_mean")) cfg.generator.color_mean = vec3_from(g.at("color_mean"));
      cfg.generator.color_stddev = num(g, "color_stddev", cfg.generator.color_stddev);
      cfg.generator.log_scale_mean = num(g, "log_scale_mean", cfg.generator.log_scale_mean);
      cfg.generator.log_scale_stddev = num(g, "log_scale_stddev", cfg.generator.log_scale_stddev);
      if (g.contains("opacity_range")) {
        cfg.generator.opacity_lo = number_from_json(g.at("opacity_range")[0]);
        cfg.generator.opacity_hi = number_from_json(g.at("opacity_range")[1]);
      }
      if (g.contains("id")) cfg.generator.id = g.at("id").get<std::string>();
    }
  }

  if (j.contains("poses")) {
    const Json& p = j.at("poses");
    cfg.poses.count = p.value("count", cfg.poses.count);
    if (p.contains("resolution")) {
      cfg.poses.width = p.at("resolution")[0].get<int>();
      cfg.poses.height = p.at("resolution")[1].get<int>();
    }
    cfg.poses.fov_deg = num(p, "fov_deg", cfg.poses.fov_deg);
    cfg.poses.radius_scale = num(p, "radius_scale", cfg.poses.radius_scale);
    if (p.contains("elevation_deg")) {
      cfg.poses.elevation_lo_deg = number_from_json(p.at("elevation_deg")[0]);
      cfg.poses.elevation_hi_deg = number_from_json(p.at("elevation_deg")[1]);
    }
  }

  if (j.contains("display_model")) {
    const Json& d = j.at("display_model");
    cfg.display.alpha = num(d, "alpha", cfg.display.alpha);
    cfg.display.beta = num(d, "beta", cfg.display.beta);
    cfg.display.gamma = num(d, "gamma", cfg.display.gamma);
    cfg.display.static_watts = num(d, "static_watts", cfg.display.static_watts);
    cfg.display.validate();
  }
  if (j.contains("energy_model")) {
    const Json& e = j.at("energy_model");
    cfg.energy.joules_per_flop = num(e, "joules_per_flop", cfg.energy.joules_per_flop);
    cfg.energy.joules_per_sram_byte =
        num(e, "joules_per_sram_byte", cfg.energy.joules_per_sram_byte);
    cfg.energy.joules_per_dram_byte =
        num(e, "joules_per_dram_byte", cfg.energy.joules_per_dram_byte);
    cfg.energy.fps = num(e, "fps", cfg.energy.fps);
    cfg.energy.validate();
  }
  if (j.contains("counting")) {
    const Json& c = j.at("counting");
    cfg.counting.projection_flops_per_point =
        c.value("projection_flops_per_point", cfg.counting.projection_flops_per_point);
    cfg.counting.flops_per_blend_event =
        c.value("flops_per_blend_event", cfg.counting.flops_per_blend_event);
    cfg.counting.splat_record_bytes =
        c.value("splat_record_bytes", cfg.counting.splat_record_bytes);
    cfg.counting.pixel_state_bytes = c.value("pixel_state_bytes", cfg.counting.pixel_state_bytes);
    cfg.counting.point_attribute_bytes =
        c.value("point_attribute_bytes", cfg.counting.point_attribute_bytes);
    cfg.counting.framebuffer_pixel_bytes =
        c.value("framebuffer_pixel_bytes", cfg.counting.framebuffer_pixel_bytes);
  }

  if (j.contains("quality")) {
    const Json& q = j.at("quality");
    cfg.quality.preset = q.value("preset", cfg.quality.preset);
    if (q.contains("q_min_db") && !q.at("q_min_db").is_null())
      cfg.quality.q_min_db = number_from_json(q.at("q_min_db"));
    cfg.quality.epsilon_db = num(q, "epsilon_db", cfg.quality.epsilon_db);
    if (!cfg.quality.q_min_db) cfg.quality.preset_fraction();  // validates the preset
  }

  if (j.contains("finetune")) {
    const Json& f = j.at("finetune");
    cfg.finetune.learning_rate = num(f, "learning_rate", cfg.finetune.learning_rate);
    cfg.finetune.check_interval = f.value("check_interval", cfg.finetune.check_interval);
    cfg.finetune.max_control_iters =
        f.value("max_control_iters", cfg.finetune.max_control_iters);
    cfg.finetune.lambda0 = num(f, "lambda0", cfg.finetune.lambda0);
    cfg.finetune.lambda_min = num(f, "lambda_min", cfg.finetune.lambda_min);
    cfg.finetune.lambda_max = num(f, "lambda_max", cfg.finetune.lambda_max);
    cfg.finetune.anneal_s0 = num(f, "anneal_s0", cfg.finetune.anneal_s0);
    if (cfg.finetune.anneal_s0 < 1.0) throw ConfigError("config: anneal_s0 must be >= 1");
  }

  if (j.contains("sampling") && j.at("sampling").contains("rhos")) {
    cfg.sampling.rhos.clear();
    for (const Json& r : j.at("sampling").at("rhos"))
      cfg.sampling.rhos.push_back(number_from_json(r));
    cfg.sampling.validate();
  }

  if (j.contains("foveation") && !j.at("foveation").is_null()) {
    const Json& f = j.at("foveation");
    cfg.has_foveation = true;
    cfg.foveation.pooling.pixels_per_degree =
        num(f, "pixels_per_degree", cfg.foveation.pooling.pixels_per_degree);
    cfg.foveation.pooling.diameter_at_gaze_px =
        num(f, "pool_diameter_at_gaze_px", cfg.foveation.pooling.diameter_at_gaze_px);
    cfg.foveation.pooling.diameter_slope_px_per_deg = num(
        f, "pool_diameter_slope_px_per_deg", cfg.foveation.pooling.diameter_slope_px_per_deg);
    cfg.foveation.pooling.diameter_max_px =
        num(f, "pool_diameter_max_px", cfg.foveation.pooling.diameter_max_px);
    if (f.contains("outer_bounds_deg")) {
      cfg.foveation.outer_bounds_deg.clear();
      for (const Json& b : f.at("outer_bounds_deg"))
        cfg.foveation.outer_bounds_deg.push_back(number_from_json(b));
    }
    cfg.foveation.blend_band_deg = num(f, "blend_band_deg", cfg.foveation.blend_band_deg);
    cfg.foveation.eccq_rel_tol = num(f, "eccq_rel_tol", cfg.foveation.eccq_rel_tol);
    if (f.contains("gaze") && f.at("gaze").is_array()) {
      cfg.foveation.gaze_center = false;
      cfg.foveation.gaze_px =
          Vec2(number_from_json(f.at("gaze")[0]), number_from_json(f.at("gaze")[1]));
    }
    if (f.contains("region_sampling") && f.at("region_sampling").contains("rhos")) {
      cfg.region_sampling.rhos.clear();
      for (const Json& r : f.at("region_sampling").at("rhos"))
        cfg.region_sampling.rhos.push_back(number_from_json(r));
      cfg.region_sampling.validate();
    }
  }

  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  return cfg;
}

Json config_to_json(const RunConfig& cfg) {
  Json scene{{"source", cfg.generate_scene ? "generate" : "file"}};
  if (!cfg.generate_scene) scene["path"] = cfg.scene_path;
  scene["generator"] = Json{{"count", cfg.generator.count},
                            {"extent", vec3_to(cfg.generator.extent)},
                            {"color_mean", vec3_to(cfg.generator.color_mean)},
                            {"color_stddev", json_number(cfg.generator.color_stddev)},
                            {"log_scale_mean", json_number(cfg.generator.log_scale_mean)},
                            {"log_scale_stddev", json_number(cfg.generator.log_scale_stddev)},
                            {"opacity_range", Json::array({json_number(cfg.generator.opacity_lo),
                                                           json_number(cfg.generator.opacity_hi)})},
                            {"id", cfg.generator.id}};

  Json j{{"schema_version", 1},
         {"seed", cfg.seed},
         {"threads", cfg.threads},
         {"raster", Json{{"tile_size", cfg.tile_size}}},
         {"scene", scene},
         {"poses", Json{{"count", cfg.poses.count},
                        {"resolution", Json::array({cfg.poses.width, cfg.poses.height})},
                        {"fov_deg", json_number(cfg.poses.fov_deg)},
                        {"radius_scale", json_number(cfg.poses.radius_scale)},
                        {"elevation_deg", Json::array({json_number(cfg.poses.elevation_lo_deg),
                                                       json_number(cfg.poses.elevation_hi_deg)})}}},
         {"display_model", Json{{"alpha", json_number(cfg.display.alpha)},
                                {"beta", json_number(cfg.display.beta)},
                                {"gamma", json_number(cfg.display.gamma)},
                                {"static_watts", json_number(cfg.display.static_watts)}}},
         {"energy_model", Json{{"joules_per_flop", json_number(cfg.energy.joules_per_flop)},
                               {"joules_per_sram_byte", json_number(cfg.energy.joules_per_sram_byte)},
                               {"joules_per_dram_byte", json_number(cfg.energy.joules_per_dram_byte)},
                               {"fps", json_number(cfg.energy.fps)}}},
         {"counting", Json{{"projection_flops_per_point", cfg.counting.projection_flops_per_point},
                           {"flops_per_blend_event", cfg.counting.flops_per_blend_event},
                           {"splat_record_bytes", cfg.counting.splat_record_bytes},
                           {"pixel_state_bytes", cfg.counting.pixel_state_bytes},
                           {"point_attribute_bytes", cfg.counting.point_attribute_bytes},
                           {"framebuffer_pixel_bytes", cfg.counting.framebuffer_pixel_bytes}}},
         {"quality", Json{{"preset", cfg.quality.preset},
                          {"q_min_db", cfg.quality.q_min_db ? json_number(*cfg.quality.q_min_db)
                                                            : Json(nullptr)},
                          {"epsilon_db", json_number(cfg.quality.epsilon_db)}}},
         {"finetune", Json{{"learning_rate", json_number(cfg.finetune.learning_rate)},
                           {"check_interval", cfg.finetune.check_interval},
                           {"max_control_iters", cfg.finetune.max_control_iters},
                           {"lambda0", json_number(cfg.finetune.lambda0)},
                           {"lambda_min", json_number(cfg.finetune.lambda_min)},
                           {"lambda_max", json_number(cfg.finetune.lambda_max)},
                           {"anneal_s0", json_number(cfg.finetune.anneal_s0)}}},
         {"sampling", Json{{"rhos", [&] {
                              Json a = Json::array();
                              for (double r : cfg.sampling.rhos) a.push_back(json_number(r));
                              return a;
                            }()}}}};

  if (cfg.has_foveation) {
    Json f{{"pixels_per_degree", json_number(cfg.foveation.pooling.pixels_per_degree)},
           {"pool_diameter_at_gaze_px", json_number(cfg.foveation.pooling.diameter_at_gaze_px)},
           {"pool_diameter_slope_px_per_deg",
            json_number(cfg.foveation.pooling.diameter_slope_px_per_deg)},
           {"pool_diameter_max_px", json_number(cfg.foveation.pooling.diameter_max_px)},
           {"outer_bounds_deg", [&] {
              Json a = Json::array();
              for (double b : cfg.foveation.outer_bounds_deg) a.push_back(json_number(b));
              return a;
            }()},
           {"blend_band_deg", json_number(cfg.foveation.blend_band_deg)},
           {"eccq_rel_tol", json_number(cfg.foveation.eccq_rel_tol)}};
    if (cfg.foveation.gaze_center)
      f["gaze"] = "center";
    else
      f["gaze"] = Json::array(
          {json_number(cfg.foveation.gaze_px.x()), json_number(cfg.foveation.gaze_px.y())});
    f["region_sampling"] = Json{{"rhos", [&] {
                                   Json a = Json::array();
                                   for (double r : cfg.region_sampling.rhos)
                                     a.push_back(json_number(r));
                                   return a;
                                 }()}};
    j["foveation"] = f;
  } else {
    j["foveation"] = nullptr;
  }
  j["output_dir"] = ".";
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& cfg) {
  Json canonical = config_to_json(cfg);
  canonical["threads"] = 0;  // parallelism never affects results
  const std::string dump = canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig benchmark_config() {
  RunConfig cfg;
  cfg.seed = 42;
  cfg.threads = 0;
  cfg.generate_scene = true;
  // Dense enough that efficiency-aware pruning removes occluded/redundant
  // points (image brightness survives pruning), with near-uniform footprints
  // and opacities so the color-tuning time constants stay homogeneous.
  cfg.generator.count = 700;
  cfg.generator.extent = Vec3(0.53, 0.45, 0.36);
  cfg.generator.color_mean = Vec3::Zero();
  cfg.generator.color_stddev = 0.5;
  cfg.generator.log_scale_mean = -2.6;
  cfg.generator.log_scale_stddev = 0.15;
  cfg.generator.opacity_lo = 0.85;
  cfg.generator.opacity_hi = 0.95;
  cfg.generator.id = "desk-bench";

  cfg.poses.count = 2;
  cfg.poses.width = 96;
  cfg.poses.height = 96;
  cfg.poses.fov_deg = 60.0;
  cfg.poses.radius_scale = 1.6;

  // Desk-scale example display profile (milli-Watt range, non-measured);
  // blue is the most expensive channel. Scaled so the display and rendering
  // power ranges are comparable on ~1e3-point scenes.
  cfg.display.alpha = 7.5e-3;
  cfg.display.beta = 10.5e-3;
  cfg.display.gamma = 21.0e-3;
  cfg.display.static_watts = 2.0e-3;

  cfg.quality.preset = "M";
  cfg.quality.epsilon_db = 0.05;

  cfg.finetune.learning_rate = 600.0;
  cfg.finetune.check_interval = 25;
  cfg.finetune.max_control_iters = 120;
  cfg.finetune.lambda0 = 2.0;

  cfg.sampling.rhos = {0.1, 0.3, 0.5, 0.7, 0.85};

  cfg.foveation.pooling.pixels_per_degree = 2.0;
  cfg.foveation.outer_bounds_deg = {5.0, 12.0, 25.0};
  cfg.foveation.blend_band_deg = 2.0;
  cfg.foveation.eccq_rel_tol = 0.05;
  cfg.region_sampling.rhos = {0.15, 0.4, 0.7};

  cfg.output_dir = "out";
  return cfg;
}

}  // namespace splatwatt
