// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "splatwatt/config.hpp"
#include "splatwatt/foveation.hpp"
#include "splatwatt/scene_io.hpp"

namespace splatwatt {

namespace {

namespace fs = std::filesystem;

struct CliArgs {
  std::string config_path;
  std::string out_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> threads_override;
};

struct RunEnv {
  RunConfig cfg;
  fs::path out;
  Scene dense;
  std::vector<CameraPose> poses;
  OptimizeContext ctx;
  std::string hash;
};

RunEnv make_env(const CliArgs& args) {
  RunEnv env;
  env.cfg = load_config(args.config_path);
  if (!args.out_override.empty()) env.cfg.output_dir = args.out_override;
  if (args.seed_override) env.cfg.seed = *args.seed_override;
  if (args.threads_override) env.cfg.threads = *args.threads_override;

  env.out = env.cfg.output_dir;
  fs::create_directories(env.out);
  env.dense = env.cfg.make_scene();
  env.poses = env.cfg.make_poses(env.dense);
  env.ctx = env.cfg.context();
  env.hash = config_hash(env.cfg);

  write_json_file(env.out / "resolved_config.json", config_to_json(env.cfg));
  if (env.cfg.generate_scene) save_scene(env.dense, env.out / "dense.ply");
  return env;
}

QualityTarget resolve_quality_target(const RunEnv& env, const std::vector<Framebuffer>& refs,
                                     const PruneScores& scores) {
  QualityTarget target;
  target.metric = ControlMetric::PsnrDb;
  target.epsilon = env.cfg.quality.epsilon_db;
  if (env.cfg.quality.q_min_db) {
    target.q_min = *env.cfg.quality.q_min_db;
  } else {
    const double ceiling = quality_ceiling_psnr(env.dense, env.poses, scores, refs,
                                                env.cfg.sampling.max_rho(), env.ctx.raster);
    target.q_min = env.cfg.quality.preset_fraction() * ceiling;
  }
  return target;
}

std::string pose_name(std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pose_%03zu.%s", i, ext);
  return buf;
}

int cmd_render(const CliArgs& args) {
  RunEnv env = make_env(args);
  fs::create_directories(env.out / "renders");

  PowerReport report;
  for (std::size_t i = 0; i < env.poses.size(); ++i) {
    const RasterizeResult r = rasterize(env.dense, env.poses[i], env.ctx.raster);
    write_png(r.image, env.out / "renders" / pose_name(i, "png"));
    write_pfm(r.image, env.out / "renders" / pose_name(i, "pfm"));
    PosePower pp;
    pp.display_watts = display_power(r.image, env.ctx.display);
    pp.rendering_watts = rendering_power(r.counters, env.ctx.energy);
    pp.counters = r.counters;
    report.per_pose.push_back(pp);
    report.counters_total += r.counters;
    report.display_watts += pp.display_watts;
    report.rendering_watts += pp.rendering_watts;
  }
  const double n = static_cast<double>(env.poses.size());
  report.display_watts /= n;
  report.rendering_watts /= n;
  report.total_watts = report.display_watts + report.rendering_watts;
  write_json_file(env.out / "power_report.json", power_report_to_json(report));
  std::cout << "rendered " << env.poses.size() << " poses; mean total power "
            << number_string(report.total_watts) << " W\n";
  return 0;
}

int cmd_power(const CliArgs& args) {
  RunEnv env = make_env(args);
  const PowerReport report =
      evaluate_model(env.dense, env.poses, env.ctx.display, env.ctx.energy, env.ctx.raster);
  write_json_file(env.out / "power.json", power_report_to_json(report));

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < report.per_pose.size(); ++i) {
    const PosePower& pp = report.per_pose[i];
    rows.push_back({std::to_string(i), number_string(pp.display_watts),
                    number_string(pp.rendering_watts), number_string(pp.total()),
                    std::to_string(pp.counters.flops), std::to_string(pp.counters.sram_bytes),
                    std::to_string(pp.counters.dram_bytes)});
  }
  write_csv(env.out / "power.csv",
            {"pose", "display_watts", "rendering_watts", "total_watts", "flops", "sram_bytes",
             "dram_bytes"},
            rows);
  std::cout << "mean display " << number_string(report.display_watts) << " W, rendering "
            << number_string(report.rendering_watts) << " W\n";
  return 0;
}

Json samples_payload(const RunEnv& env, const QualityTarget& target,
                     const std::vector<IsoQualitySample>& samples) {
  Json arr = Json::array();
  for (const IsoQualitySample& s : samples) arr.push_back(sample_to_json(s));
  return Json{{"config_hash", env.hash},
              {"quality_target",
               Json{{"metric", target.metric == ControlMetric::PsnrDb ? "psnr_db" : "neg_eccq"},
                    {"q_min", json_number(target.q_min)},
                    {"epsilon", json_number(target.epsilon)}}},
              {"samples", arr}};
}

int cmd_sample_curve(const CliArgs& args) {
  RunEnv env = make_env(args);
  const std::vector<Framebuffer> refs = render_views(env.dense, env.poses, env.ctx.raster);
  const PruneScores scores = compute_prune_scores(env.dense, env.poses, env.ctx.raster);
  const QualityTarget target = resolve_quality_target(env, refs, scores);

  CheckpointStore store(env.out / "samples", env.hash);
  std::vector<IsoQualitySample> samples;
  for (double rho : env.cfg.sampling.rhos) {
    char tag[64];
    std::snprintf(tag, sizeof tag, "rho_%.6f", rho);
    if (auto cached = store.load(tag)) {
      samples.push_back(std::move(*cached));
    } else {
      samples.push_back(
          sample_iso_quality_point(env.dense, env.poses, rho, target, env.ctx, refs, scores));
      store.save(tag, samples.back());
    }
    std::cout << "rho " << rho << ": quality " << number_string(samples.back().quality)
              << ", display " << number_string(samples.back().display_watts) << " W, rendering "
              << number_string(samples.back().rendering_watts) << " W\n";
  }
  write_json_file(env.out / "samples.json", samples_payload(env, target, samples));
  return 0;
}

void write_curve_artifacts(const fs::path& out, const IsoQualityCurve& curve,
                           const std::vector<CurveSample>& samples) {
  write_json_file(out / "curve.json", curve_to_json(curve));

  std::vector<std::vector<std::string>> rows;
  for (const CurveSample& s : samples) {
    rows.push_back({number_string(s.rho), number_string(s.display_watts),
                    number_string(curve.display_watts(s.rho)), number_string(s.rendering_watts),
                    number_string(curve.rendering_watts(s.rho)),
                    number_string(s.display_watts + s.rendering_watts),
                    number_string(curve.total_watts(s.rho))});
  }
  write_csv(out / "curve_fit.csv",
            {"rho", "display_watts", "display_watts_fit", "rendering_watts",
             "rendering_watts_fit", "total_watts", "total_watts_fit"},
            rows);

  SvgSeries d_markers{{}, "#1f77b4", false, true, "display (measured)"};
  SvgSeries r_markers{{}, "#d62728", false, true, "rendering (measured)"};
  SvgSeries d_line{{}, "#1f77b4", true, false, "display (fit)"};
  SvgSeries r_line{{}, "#d62728", true, false, "rendering (fit)"};
  for (const CurveSample& s : samples) {
    const double t = curve.norm.norm_rho(s.rho);
    d_markers.points.emplace_back(t, (s.display_watts - curve.norm.display_min) /
                                         curve.norm.display_range());
    r_markers.points.emplace_back(t, (s.rendering_watts - curve.norm.render_min) /
                                         curve.norm.render_range());
  }
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    d_line.points.emplace_back(t, curve.display_norm(t));
    r_line.points.emplace_back(t, curve.render_norm(t));
  }
  write_svg_plot(out / "curve_fit.svg", "Iso-quality power curves (normalized)",
                 "pruning ratio (normalized)", "power (normalized)",
                 {d_line, r_line, d_markers, r_markers});

  SvgSeries t_markers{{}, "#2ca02c", false, true, "total (measured)"};
  SvgSeries t_line{{}, "#2ca02c", true, false, "total (fit)"};
  for (const CurveSample& s : samples)
    t_markers.points.emplace_back(s.rho, s.display_watts + s.rendering_watts);
  for (int i = 0; i <= 100; ++i) {
    const double rho =
        curve.norm.rho_min + (curve.norm.rho_max - curve.norm.rho_min) * i / 100.0;
    t_line.points.emplace_back(rho, curve.total_watts(rho));
  }
  write_svg_plot(out / "curve_total.svg", "Total power vs pruning ratio", "pruning ratio",
                 "total power (W)", {t_line, t_markers});
}

int cmd_fit(const CliArgs& args) {
  RunEnv env = make_env(args);
  const Json payload = read_json_file(env.out / "samples.json");
  std::vector<CurveSample> samples;
  for (const Json& js : payload.at("samples")) {
    const IsoQualitySample s = sample_from_json(js);
    samples.push_back({s.rho, s.display_watts, s.rendering_watts, s.lambda_final, s.quality,
                       s.flagged()});
  }
  const IsoQualityCurve curve =
      fit_curve(samples, payload.at("quality_target").dump());
  write_curve_artifacts(env.out, curve, samples);
  std::cout << "fit: display MRE " << number_string(curve.diagnostics.mre_display)
            << ", rendering MRE " << number_string(curve.diagnostics.mre_render) << "\n";
  return 0;
}

struct SummaryRow {
  std::string variant;
  std::size_t points;
  double psnr_db;
  double ssim;
  double display;
  double rendering;
  double total;
};

void emit_summary(const fs::path& out, const std::vector<SummaryRow>& rows) {
  std::vector<Vec2> qp;
  for (const SummaryRow& r : rows) qp.emplace_back(r.psnr_db, r.total);
  const std::vector<bool> front = pareto_front(qp);

  std::vector<std::vector<std::string>> csv;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SummaryRow& r = rows[i];
    csv.push_back({r.variant, std::to_string(r.points), number_string(r.psnr_db),
                   number_string(r.ssim), number_string(r.display), number_string(r.rendering),
                   number_string(r.total), front[i] ? "1" : "0"});
  }
  write_csv(out / "summary.csv",
            {"variant", "points", "psnr_db", "ssim", "display_watts", "rendering_watts",
             "total_watts", "pareto"},
            csv);

  std::printf("%-14s %8s %10s %8s %13s %13s %13s\n", "variant", "points", "PSNR(dB)", "SSIM",
              "display(W)", "render(W)", "total(W)");
  for (const SummaryRow& r : rows)
    std::printf("%-14s %8zu %10s %8.4f %13.4e %13.4e %13.4e\n", r.variant.c_str(), r.points,
                std::isfinite(r.psnr_db) ? number_string(r.psnr_db).substr(0, 7).c_str() : "inf",
                r.ssim, r.display, r.rendering, r.total);
}

int cmd_optimize(const CliArgs& args) {
  RunEnv env = make_env(args);
  const std::vector<Framebuffer> refs = render_views(env.dense, env.poses, env.ctx.raster);
  const PruneScores scores = compute_prune_scores(env.dense, env.poses, env.ctx.raster);
  const QualityTarget target = resolve_quality_target(env, refs, scores);
  CheckpointStore store(env.out / "samples", env.hash);

  const PowerReport dense_power =
      evaluate_model(env.dense, env.poses, env.ctx.display, env.ctx.energy, env.ctx.raster);

  Json report{{"config_hash", env.hash},
              {"quality_target", Json{{"metric", "psnr_db"},
                                      {"q_min", json_number(target.q_min)},
                                      {"epsilon", json_number(target.epsilon)}}},
              {"dense", Json{{"point_count", env.dense.size()},
                             {"psnr_db", json_number(std::numeric_limits<double>::infinity())},
                             {"ssim", json_number(1.0)},
                             {"display_watts", json_number(dense_power.display_watts)},
                             {"rendering_watts", json_number(dense_power.rendering_watts)},
                             {"total_watts", json_number(dense_power.total_watts)}}}};

  std::vector<SummaryRow> rows;
  rows.push_back({"dense", env.dense.size(), std::numeric_limits<double>::infinity(), 1.0,
                  dense_power.display_watts, dense_power.rendering_watts,
                  dense_power.total_watts});

  if (!env.cfg.has_foveation) {
    const PipelineResult pr =
        build_power_optimal_model(env.dense, env.poses, target, env.cfg.sampling, env.ctx,
                                  &store, "");

    std::vector<CurveSample> curve_samples;
    Json sample_arr = Json::array();
    for (const IsoQualitySample& s : pr.samples) {
      curve_samples.push_back({s.rho, s.display_watts, s.rendering_watts, s.lambda_final,
                               s.quality, s.flagged()});
      sample_arr.push_back(sample_to_json(s));
      char name[32];
      std::snprintf(name, sizeof name, "rho=%.2f", s.rho);
      rows.push_back({name, s.model.size(), s.psnr_db, s.ssim_score, s.display_watts,
                      s.rendering_watts, s.total_watts()});
    }
    write_curve_artifacts(env.out, pr.curve, curve_samples);
    save_scene(pr.final_sample.model, env.out / "final_model.ply");

    report["samples"] = sample_arr;
    report["curve"] = curve_to_json(pr.curve);
    report["rho_star"] = json_number(pr.rho_star);
    report["predicted"] = Json{{"display_watts", json_number(pr.predicted.display)},
                               {"rendering_watts", json_number(pr.predicted.rendering)},
                               {"total_watts", json_number(pr.predicted.total)}};
    report["final"] = sample_to_json(pr.final_sample);
    rows.push_back({"final", pr.final_sample.model.size(), pr.final_sample.psnr_db,
                    pr.final_sample.ssim_score, pr.final_sample.display_watts,
                    pr.final_sample.rendering_watts, pr.final_sample.total_watts()});
  } else {
    const CascadeResult cascade =
        build_cascade(env.dense, env.poses, env.cfg.foveation, target, env.cfg.sampling,
                      env.cfg.region_sampling, env.ctx, &store);
    fs::create_directories(env.out / "cascade");
    Json regions = Json::array();
    for (std::size_t r = 0; r < cascade.regions.size(); ++r) {
      const RegionBuild& rb = cascade.regions[r];
      char name[32];
      std::snprintf(name, sizeof name, "region_%zu.ply", r + 1);
      save_scene(rb.model, env.out / "cascade" / name);
      regions.push_back(Json{{"point_count", rb.model.size()},
                             {"pool_side", rb.pool_side},
                             {"achieved_eccq", json_number(rb.achieved_eccq)},
                             {"rho_star", json_number(rb.rho_star)},
                             {"reused_predecessor", rb.reused_predecessor},
                             {"fit_degenerate", rb.fit_degenerate}});
    }

    const std::vector<Scene> models = cascade.models();
    const PowerReport fov_power = foveated_power_report(
        models, env.cfg.foveation, env.poses, env.ctx.display, env.ctx.energy, env.ctx.raster);
    const PowerReport r1_power = evaluate_model(models.front(), env.poses, env.ctx.display,
                                                env.ctx.energy, env.ctx.raster);

    std::vector<CurveSample> curve_samples;
    Json sample_arr = Json::array();
    for (const IsoQualitySample& s : cascade.r1_pipeline.samples) {
      curve_samples.push_back({s.rho, s.display_watts, s.rendering_watts, s.lambda_final,
                               s.quality, s.flagged()});
      sample_arr.push_back(sample_to_json(s));
    }
    write_curve_artifacts(env.out, cascade.r1_pipeline.curve, curve_samples);
    save_scene(models.front(), env.out / "final_model.ply");

    report["samples"] = sample_arr;
    report["curve"] = curve_to_json(cascade.r1_pipeline.curve);
    report["rho_star"] = json_number(cascade.r1_pipeline.rho_star);
    report["final"] = sample_to_json(cascade.r1_pipeline.final_sample);
    report["foveation"] = Json{{"r1_eccq", json_number(cascade.r1_eccq)},
                               {"regions", regions},
                               {"foveated_power", power_report_to_json(fov_power)},
                               {"r1_fullframe_power", power_report_to_json(r1_power)}};

    const IsoQualitySample& f = cascade.r1_pipeline.final_sample;
    rows.push_back({"R1(full)", models.front().size(), f.psnr_db, f.ssim_score,
                    r1_power.display_watts, r1_power.rendering_watts, r1_power.total_watts});
    rows.push_back({"foveated", models.back().size(), f.psnr_db, f.ssim_score,
                    fov_power.display_watts, fov_power.rendering_watts, fov_power.total_watts});
  }

  write_json_file(env.out / "report.json", report);
  emit_summary(env.out, rows);
  return 0;
}

int cmd_foveate(const CliArgs& args) {
  RunEnv env = make_env(args);
  if (!env.cfg.has_foveation) throw ConfigError("foveate: config has no foveation plan");

  std::vector<Scene> models;
  for (std::size_t r = 0; r < env.cfg.foveation.region_count(); ++r) {
    char name[32];
    std::snprintf(name, sizeof name, "region_%zu.ply", r + 1);
    const fs::path path = env.out / "cascade" / name;
    if (!fs::exists(path))
      throw IoError("foveate: missing cascade model " + path.string() +
                    " (run optimize with the foveation plan first)");
    models.push_back(load_scene(path));
  }

  fs::create_directories(env.out / "renders");
  for (std::size_t i = 0; i < env.poses.size(); ++i) {
    const FoveatedFrame frame =
        render_foveated(models, env.cfg.foveation, env.poses[i], env.ctx.raster);
    write_png(frame.composite, env.out / "renders" / pose_name(i, "png"));
    write_pfm(frame.composite, env.out / "renders" / pose_name(i, "pfm"));
  }
  const PowerReport report = foveated_power_report(models, env.cfg.foveation, env.poses,
                                                   env.ctx.display, env.ctx.energy,
                                                   env.ctx.raster);
  write_json_file(env.out / "foveated_report.json", power_report_to_json(report));
  std::cout << "foveated mean total power " << number_string(report.total_watts) << " W\n";
  return 0;
}

int cmd_report(const CliArgs& args) {
  RunEnv env = make_env(args);
  const fs::path report_path = env.out / "report.json";
  if (!fs::exists(report_path))
    throw IoError("report: missing " + report_path.string() + " (run optimize first)");
  const Json report = read_json_file(report_path);

  std::vector<SummaryRow> rows;
  auto row_from = [](const std::string& name, const Json& j) {
    SummaryRow r;
    r.variant = name;
    r.points = j.at("point_count").get<std::size_t>();
    r.psnr_db = number_from_json(j.at("psnr_db"));
    r.ssim = number_from_json(j.at("ssim"));
    r.display = number_from_json(j.at("display_watts"));
    r.rendering = number_from_json(j.at("rendering_watts"));
    r.total = number_from_json(j.at("total_watts"));
    return r;
  };
  rows.push_back(row_from("dense", report.at("dense")));
  if (report.contains("samples"))
    for (const Json& s : report.at("samples")) {
      char name[32];
      std::snprintf(name, sizeof name, "rho=%.2f", number_from_json(s.at("rho")));
      rows.push_back(row_from(name, s));
    }
  if (report.contains("final")) rows.push_back(row_from("final", report.at("final")));

  emit_summary(env.out, rows);

  SvgSeries pts{{}, "#1f77b4", false, true, "variants"};
  SvgSeries front_pts{{}, "#d62728", false, true, "pareto front"};
  std::vector<Vec2> qp;
  for (const SummaryRow& r : rows)
    if (std::isfinite(r.psnr_db)) qp.emplace_back(r.psnr_db, r.total);
  const std::vector<bool> front = pareto_front(qp);
  for (std::size_t i = 0; i < qp.size(); ++i)
    (front[i] ? front_pts : pts).points.push_back(qp[i]);
  write_svg_plot(env.out / "summary.svg", "Quality vs total power", "PSNR (dB)",
                 "total power (W)", {pts, front_pts});
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Display/rendering power co-optimization for Gaussian-splat scenes"};
  app.require_subcommand(1);

  CliArgs args;
  int rc = 0;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", args.config_path, "Path to the JSON run config")->required();
    sub->add_option("-o,--out", args.out_override, "Output directory (overrides config)");
    sub->add_option("--seed", args.seed_override, "Seed override");
    sub->add_option("--threads", args.threads_override,
                    "Worker threads (never affects results)");
  };

  struct Verb {
    const char* name;
    const char* help;
    int (*fn)(const CliArgs&);
  };
  static const Verb verbs[] = {
      {"render", "Render all poses to PNG/PFM with a per-frame power report", cmd_render},
      {"power", "Evaluate display/rendering power over the pose set", cmd_power},
      {"sample-curve", "Sample iso-quality models across the pruning plan", cmd_sample_curve},
      {"fit", "Fit the iso-quality curve pair to sampled points", cmd_fit},
      {"optimize", "Full pipeline: sample, fit, closed-form minimum, final model", cmd_optimize},
      {"foveate", "Render and evaluate the foveated cascade built by optimize", cmd_foveate},
      {"report", "Consolidate run artifacts into summary CSV/SVG", cmd_report},
  };
  for (const Verb& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    add_common(sub);
    sub->callback([&args, &rc, fn = v.fn] { rc = fn(args); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const ComputeError& e) {
    std::cerr << "compute error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}

}  // namespace splatwatt
