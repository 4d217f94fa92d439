// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "splatwatt/curve.hpp"
#include "splatwatt/finetune.hpp"
#include "splatwatt/power.hpp"

namespace splatwatt {

using Json = nlohmann::ordered_json;

// JSON has no infinity literal; non-finite values round-trip as strings
// ("inf", "-inf", "nan"). Finite doubles round-trip exactly.
Json json_number(double x);
double number_from_json(const Json& j);
// The same textual form JSON emission uses; CSV cells reuse it so CSV and
// JSON sources are byte-equal.
std::string number_string(double x);

Json counters_to_json(const OpCounters& c);
OpCounters counters_from_json(const Json& j);

Json power_report_to_json(const PowerReport& r);

// Sample serialization excludes the model itself (stored as a scene file
// next to the sidecar).
Json sample_to_json(const IsoQualitySample& s);
IsoQualitySample sample_from_json(const Json& j);  // .model left empty

Json curve_to_json(const IsoQualityCurve& c);
IsoQualityCurve curve_from_json(const Json& j);

void write_text_file(const std::filesystem::path& path, const std::string& body);
std::string read_text_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

struct SvgSeries {
  std::vector<Vec2> points;
  std::string color = "#1f77b4";
  bool line = true;
  bool markers = false;
  std::string label;
};

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<SvgSeries>& series);

// Non-dominated rows under (quality higher-better, power lower-better).
std::vector<bool> pareto_front(const std::vector<Vec2>& quality_power);

}  // namespace splatwatt
