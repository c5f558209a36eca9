/*
 * Copyright 2026 The ecgx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecgx/attribution/attribution.hpp"
#include "ecgx/core/ecg_record.hpp"
#include "ecgx/tcav/tcav.hpp"

namespace ecgx::viz {

// SVG user units per millimetre of chart paper.
inline constexpr double kUnitsPerMm = 4.0;

struct ChartStyle {
  double paper_speed = 25.0;  // mm/s
  double gain = 10.0;         // mm/mV
  double small_box_s = 0.04, small_box_mv = 0.1;
  double large_box_s = 0.2, large_box_mv = 0.5;
  std::size_t columns = 4;
  double row_height_mv = 3.0;
  std::map<std::string, std::string> colors{
      {"trace", "#1f3b99"},       {"grid_minor", "#f6d0d0"},
      {"grid_major", "#e28c8c"},  {"text", "#202020"},
      {"calibration", "#202020"}, {"background", "#ffffff"}};
  std::string attribution_cmap = "viridis";
  std::string cf_color = "green";
  double cf_alpha = 0.6;

  void validate() const;
  const std::string& color(const std::string& role) const;
};

// "#rrggbb" for v in [0, 1] (clamped). Known maps: viridis, greys.
std::string colormap(const std::string& name, double v);

// One panel per lead (or just `lead`): waveform over a binned |score| strip
// sharing its time axis. Colours are min-max normalized over the figure.
void plot_attribution(const EcgRecord& record, const AttributionResult& scores,
                      std::int64_t bin_size, const std::filesystem::path& out,
                      std::optional<std::size_t> lead = std::nullopt);

void plot_counterfactual_overlay(const EcgRecord& original, const EcgRecord& cf,
                                 std::size_t lead_idx, double original_prob,
                                 double cf_prob, const std::filesystem::path& out);

// Concept x layer heatmap and a point-plus-interval chart against 0.5.
void plot_tcav(const TcavResult& results, const std::vector<std::string>& layers,
               const std::filesystem::path& heatmap_out,
               const std::filesystem::path& ci_out);

struct ChartOptions {
  ChartStyle style{};
  bool show_calibration = true;
  std::optional<EcgRecord> cf_ecg;
  std::optional<AttributionResult> attribution;
  std::int64_t attribution_bin_size = 25;
  std::string title;
  // Footer lines "concept: score [ci_low, ci_high]".
  std::optional<TcavResult> tcav;
};

// Clinical chart: L / columns rows, each column showing its share of the
// record's duration, leads laid out column by column.
void plot_ecg_chart(const EcgRecord& record, const ChartOptions& options,
                    const std::filesystem::path& out);

}  // namespace ecgx::viz
