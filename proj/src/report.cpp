// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace splatwatt {

Json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double number_from_json(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw IoError("unexpected numeric string '" + s + "'");
  }
  return j.get<double>();
}

std::string number_string(double x) { return json_number(x).dump(); }

Json counters_to_json(const OpCounters& c) {
  return Json{{"flops", c.flops}, {"sram_bytes", c.sram_bytes}, {"dram_bytes", c.dram_bytes}};
}

OpCounters counters_from_json(const Json& j) {
  OpCounters c;
  c.flops = j.at("flops").get<std::uint64_t>();
  c.sram_bytes = j.at("sram_bytes").get<std::uint64_t>();
  c.dram_bytes = j.at("dram_bytes").get<std::uint64_t>();
  return c;
}

Json power_report_to_json(const PowerReport& r) {
  Json per_pose = Json::array();
  for (const PosePower& pp : r.per_pose)
    per_pose.push_back(Json{{"display_watts", json_number(pp.display_watts)},
                            {"rendering_watts", json_number(pp.rendering_watts)},
                            {"total_watts", json_number(pp.total())},
                            {"counters", counters_to_json(pp.counters)}});
  return Json{{"display_watts", json_number(r.display_watts)},
              {"rendering_watts", json_number(r.rendering_watts)},
              {"total_watts", json_number(r.total_watts)},
              {"counters_total", counters_to_json(r.counters_total)},
              {"per_pose", per_pose}};
}

namespace {

const char* status_name(SampleStatus s) {
  switch (s) {
    case SampleStatus::Converged:
      return "converged";
    case SampleStatus::MaxItersSurplus:
      return "max_iters_surplus";
    case SampleStatus::MaxItersBelowTarget:
      return "max_iters_below_target";
  }
  return "unknown";
}

SampleStatus status_from_name(const std::string& s) {
  if (s == "converged") return SampleStatus::Converged;
  if (s == "max_iters_surplus") return SampleStatus::MaxItersSurplus;
  if (s == "max_iters_below_target") return SampleStatus::MaxItersBelowTarget;
  throw IoError("unknown sample status '" + s + "'");
}

}  // namespace

Json sample_to_json(const IsoQualitySample& s) {
  Json history = Json::array();
  for (const ControlRecord& r : s.history)
    history.push_back(Json{{"iter", r.control_iter},
                           {"quality", json_number(r.quality)},
                           {"s", json_number(r.s)},
                           {"lambda_before", json_number(r.lambda_before)},
                           {"lambda_after", json_number(r.lambda_after)},
                           {"adapted", r.adapted}});
  return Json{{"rho", json_number(s.rho)},
              {"lambda_final", json_number(s.lambda_final)},
              {"quality", json_number(s.quality)},
              {"psnr_db", json_number(s.psnr_db)},
              {"ssim", json_number(s.ssim_score)},
              {"display_watts", json_number(s.display_watts)},
              {"rendering_watts", json_number(s.rendering_watts)},
              {"total_watts", json_number(s.total_watts())},
              {"control_iters", s.control_iters},
              {"status", status_name(s.status)},
              {"point_count", s.model.size()},
              {"history", history}};
}

IsoQualitySample sample_from_json(const Json& j) {
  IsoQualitySample s;
  s.rho = number_from_json(j.at("rho"));
  s.lambda_final = number_from_json(j.at("lambda_final"));
  s.quality = number_from_json(j.at("quality"));
  s.psnr_db = number_from_json(j.at("psnr_db"));
  s.ssim_score = number_from_json(j.at("ssim"));
  s.display_watts = number_from_json(j.at("display_watts"));
  s.rendering_watts = number_from_json(j.at("rendering_watts"));
  s.control_iters = j.at("control_iters").get<int>();
  s.status = status_from_name(j.at("status").get<std::string>());
  for (const Json& r : j.at("history")) {
    ControlRecord rec;
    rec.control_iter = r.at("iter").get<int>();
    rec.quality = number_from_json(r.at("quality"));
    rec.s = number_from_json(r.at("s"));
    rec.lambda_before = number_from_json(r.at("lambda_before"));
    rec.lambda_after = number_from_json(r.at("lambda_after"));
    rec.adapted = r.at("adapted").get<bool>();
    s.history.push_back(rec);
  }
  return s;
}

Json curve_to_json(const IsoQualityCurve& c) {
  return Json{
      {"quality_constraint", c.quality_constraint},
      {"display", Json{{"v", json_number(c.display.v)}, {"k", json_number(c.display.k)}}},
      {"render", Json{{"v", json_number(c.render.v)}, {"k", json_number(c.render.k)}}},
      {"normalization",
       Json{{"rho_min", json_number(c.norm.rho_min)},
            {"rho_max", json_number(c.norm.rho_max)},
            {"display_min", json_number(c.norm.display_min)},
            {"display_max", json_number(c.norm.display_max)},
            {"render_min", json_number(c.norm.render_min)},
            {"render_max", json_number(c.norm.render_max)}}},
      {"diagnostics",
       Json{{"mre_display", json_number(c.diagnostics.mre_display)},
            {"mre_render", json_number(c.diagnostics.mre_render)},
            {"r2_display", json_number(c.diagnostics.r2_display)},
            {"r2_render", json_number(c.diagnostics.r2_render)}}}};
}

IsoQualityCurve curve_from_json(const Json& j) {
  IsoQualityCurve c;
  c.quality_constraint = j.at("quality_constraint").get<std::string>();
  c.display = {number_from_json(j.at("display").at("v")), number_from_json(j.at("display").at("k"))};
  c.render = {number_from_json(j.at("render").at("v")), number_from_json(j.at("render").at("k"))};
  const Json& n = j.at("normalization");
  c.norm.rho_min = number_from_json(n.at("rho_min"));
  c.norm.rho_max = number_from_json(n.at("rho_max"));
  c.norm.display_min = number_from_json(n.at("display_min"));
  c.norm.display_max = number_from_json(n.at("display_max"));
  c.norm.render_min = number_from_json(n.at("render_min"));
  c.norm.render_max = number_from_json(n.at("render_max"));
  const Json& d = j.at("diagnostics");
  c.diagnostics.mre_display = number_from_json(d.at("mre_display"));
  c.diagnostics.mre_render = number_from_json(d.at("mre_render"));
  c.diagnostics.r2_display = number_from_json(d.at("r2_display"));
  c.diagnostics.r2_render = number_from_json(d.at("r2_render"));
  return c;
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << body;
  if (!out) throw IoError(path.string() + ": write failure");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

Json read_json_file(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  write_text_file(path, out.str());
}

namespace {

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const SvgSeries& s : series)
    for (const Vec2& p : s.points) {
      x0 = std::min(x0, p.x());
      x1 = std::max(x1, p.x());
      y0 = std::min(y0, p.y());
      y1 = std::max(y1, p.y());
    }
  if (!(x1 >= x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;

  const double w = 640, h = 440, ml = 70, mr = 20, mt = 40, mb = 55;
  const auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  const auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double tx = x0 + (x1 - x0) * i / 4.0;
    const double ty = y0 + (y1 - y0) * i / 4.0;
    svg << "<text x=\"" << px(tx) << "\" y=\"" << h - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt2(tx) << "</text>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << py(ty) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt2(ty) << "</text>\n";
  }
  svg << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 14
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (mt + h - mb) / 2 << ")\">" << y_label << "</text>\n";

  double legend_y = mt + 6;
  for (const SvgSeries& s : series) {
    if (s.line && s.points.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (const Vec2& p : s.points) svg << fmt2(px(p.x())) << "," << fmt2(py(p.y())) << " ";
      svg << "\"/>\n";
    }
    if (s.markers)
      for (const Vec2& p : s.points)
        svg << "<circle cx=\"" << fmt2(px(p.x())) << "\" cy=\"" << fmt2(py(p.y()))
            << "\" r=\"3.5\" fill=\"" << s.color << "\"/>\n";
    if (!s.label.empty()) {
      svg << "<circle cx=\"" << w - mr - 130 << "\" cy=\"" << legend_y << "\" r=\"4\" fill=\""
          << s.color << "\"/>\n";
      svg << "<text x=\"" << w - mr - 120 << "\" y=\"" << legend_y + 4
          << "\" font-size=\"12\">" << s.label << "</text>\n";
      legend_y += 18;
    }
  }
  svg << "</svg>\n";
  write_text_file(path, svg.str());
}

std::vector<bool> pareto_front(const std::vector<Vec2>& quality_power) {
  const std::size_t n = quality_power.size();
  std::vector<bool> front(n, true);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n && front[i]; ++j) {
      if (i == j) continue;
      const bool geq_quality = quality_power[j].x() >= quality_power[i].x();
      const bool leq_power = quality_power[j].y() <= quality_power[i].y();
      const bool strict = quality_power[j].x() > quality_power[i].x() ||
                          quality_power[j].y() < quality_power[i].y();
      if (geq_quality && leq_power && strict) front[i] = false;
    }
  return front;
}

}  // namespace splatwatt
