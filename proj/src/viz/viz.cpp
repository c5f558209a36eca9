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

#include "ecgx/viz/viz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "ecgx/error.hpp"
#include "svg.hpp"

namespace ecgx::viz {

namespace {

using Point = std::pair<double, double>;

// matplotlib's viridis sampled at nine evenly spaced positions.
constexpr std::array<std::array<int, 3>, 9> kViridis{{{0x44, 0x01, 0x54},
                                                      {0x47, 0x2d, 0x7b},
                                                      {0x3b, 0x52, 0x8b},
                                                      {0x2c, 0x72, 0x8e},
                                                      {0x21, 0x91, 0x8c},
                                                      {0x28, 0xae, 0x80},
                                                      {0x5e, 0xc9, 0x62},
                                                      {0xad, 0xdc, 0x30},
                                                      {0xfd, 0xe7, 0x25}}};

std::string hex_color(double r, double g, double b) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(r)), static_cast<int>(std::lround(g)),
                static_cast<int>(std::lround(b)));
  return buf;
}

std::string fixed(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

struct Range {
  double lo, hi;
  double normalize(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }
};

Range min_max(std::span<const double> values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

// Binned |scores| as one row per lead; a (T,) map is shared by all leads.
Tensor binned_rows(const EcgRecord& record, const AttributionResult& result,
                   std::int64_t bin_size, ErrorCode mismatch) {
  const Tensor& s = result.scores;
  const bool per_lead = s.rank() == 2 && s.dim(0) == record.num_leads() &&
                        s.dim(1) == record.num_samples();
  const bool shared = s.rank() == 1 && s.dim(0) == record.num_samples();
  if (!per_lead && !shared) {
    throw Error(mismatch, "attribution shape " + shape_string(s.shape()) +
                              " does not match record " +
                              shape_string(record.signal().shape()));
  }
  Tensor binned = bin_attribution(s, bin_size);
  if (per_lead) return binned;
  const std::size_t bins = binned.dim(0);
  Tensor rows({record.num_leads(), bins});
  for (std::size_t l = 0; l < record.num_leads(); ++l) {
    for (std::size_t b = 0; b < bins; ++b) rows.at(l, b) = binned[b];
  }
  return rows;
}

Attrs stroke(const std::string& color, double width) {
  return {{"stroke", color}, {"stroke-width", num(width)}};
}

}  // namespace

void ChartStyle::validate() const {
  if (!(paper_speed > 0.0) || !(gain > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "paper_speed and gain must be positive");
  }
  if (!(small_box_s > 0.0 && small_box_mv > 0.0 && large_box_s > 0.0 &&
        large_box_mv > 0.0 && row_height_mv > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "grid boxes must be positive");
  }
  if (columns == 0) throw Error(ErrorCode::kInvalidParams, "columns must be >= 1");
  if (!(cf_alpha >= 0.0 && cf_alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "cf_alpha must lie in [0, 1]");
  }
  colormap(attribution_cmap, 0.0);
}

const std::string& ChartStyle::color(const std::string& role) const {
  const auto it = colors.find(role);
  if (it == colors.end()) {
    throw Error(ErrorCode::kInvalidParams, "no colour for role '" + role + "'");
  }
  return it->second;
}

std::string colormap(const std::string& name, double v) {
  v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
  if (name == "greys") {
    const double level = 255.0 * (1.0 - v);
    return hex_color(level, level, level);
  }
  if (name != "viridis") {
    throw Error(ErrorCode::kInvalidParams, "unknown colormap '" + name + "'");
  }
  const double pos = v * (kViridis.size() - 1);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(pos),
                                       kViridis.size() - 2);
  const double f = pos - k;
  std::array<double, 3> c{};
  for (int i = 0; i < 3; ++i) {
    c[i] = kViridis[k][i] + f * (kViridis[k + 1][i] - kViridis[k][i]);
  }
  return hex_color(c[0], c[1], c[2]);
}

void plot_attribution(const EcgRecord& record, const AttributionResult& scores,
                      std::int64_t bin_size, const std::filesystem::path& out,
                      std::optional<std::size_t> lead) {
  if (lead && *lead >= record.num_leads()) {
    throw Error(ErrorCode::kLeadOutOfRange,
                "lead " + std::to_string(*lead) + " of " +
                    std::to_string(record.num_leads()));
  }
  const Tensor binned =
      binned_rows(record, scores, bin_size, ErrorCode::kShapeMismatch);
  std::vector<std::size_t> leads;
  if (lead) {
    leads.push_back(*lead);
  } else {
    for (std::size_t l = 0; l < record.num_leads(); ++l) leads.push_back(l);
  }

  constexpr double kLeft = 70, kWidth = 1000, kTop = 40;
  constexpr double kWaveHeight = 100, kStripHeight = 18, kGap = 22;
  constexpr double kBarWidth = 18;
  const std::size_t samples = record.num_samples();
  const std::size_t bins = binned.dim(1);
  const double dx = kWidth / static_cast<double>(samples);
  auto x_of = [&](double t) { return kLeft + t * dx; };

  std::vector<double> shown;
  double amplitude = 0.0;
  for (std::size_t l : leads) {
    for (std::size_t b = 0; b < bins; ++b) shown.push_back(binned.at(l, b));
    for (double v : record.lead(l)) amplitude = std::max(amplitude, std::abs(v));
  }
  const Range range = min_max(shown);
  if (amplitude == 0.0) amplitude = 1.0;

  const double panel = kWaveHeight + kStripHeight + kGap;
  Svg svg(kLeft + kWidth + 100, kTop + panel * leads.size() + 20);
  svg.text(kLeft, 24,
           scores.method + " attribution, target " + std::to_string(scores.target) +
               ", bin " + std::to_string(bin_size),
           {{"class", "title"}});
  for (std::size_t i = 0; i < leads.size(); ++i) {
    const std::size_t l = leads[i];
    const double top = kTop + panel * i;
    const double mid = top + kWaveHeight / 2;
    const std::string& name = record.lead_names()[l];
    svg.text(8, mid + 4, name, {{"class", "lead-label"}});
    std::vector<Point> pts;
    pts.reserve(samples);
    for (std::size_t t = 0; t < samples; ++t) {
      pts.emplace_back(x_of(t), mid - record.value(l, t) / amplitude *
                                         (kWaveHeight / 2));
    }
    Attrs trace = stroke("#1f3b99", 1);
    trace.insert(trace.begin(), {{"class", "trace"}, {"data-lead", name}});
    svg.polyline(pts, trace);

    const double strip = top + kWaveHeight;
    for (std::size_t b = 0; b < bins; ++b) {
      const double start = static_cast<double>(b) * bin_size;
      const double stop =
          std::min(static_cast<double>(samples), start + bin_size);
      svg.rect(x_of(start), strip, x_of(stop) - x_of(start), kStripHeight,
               {{"class", "attr-cell"},
                {"data-lead", name},
                {"fill", colormap("viridis", range.normalize(binned.at(l, b)))}});
    }
  }

  constexpr int kBarSteps = 32;
  const double bar_x = kLeft + kWidth + 30;
  const double bar_h = std::min(200.0, panel * leads.size() - kGap);
  for (int k = 0; k < kBarSteps; ++k) {
    const double v = (k + 0.5) / kBarSteps;
    svg.rect(bar_x, kTop + bar_h * (1.0 - double(k + 1) / kBarSteps), kBarWidth,
             bar_h / kBarSteps,
             {{"class", "colorbar"}, {"fill", colormap("viridis", v)}});
  }
  svg.text(bar_x, kTop - 4, num(range.hi), {{"class", "colorbar-max"}});
  svg.text(bar_x, kTop + bar_h + 14, num(range.lo), {{"class", "colorbar-min"}});
  svg.write(out);
}

void plot_counterfactual_overlay(const EcgRecord& original, const EcgRecord& cf,
                                 std::size_t lead_idx, double original_prob,
                                 double cf_prob, const std::filesystem::path& out) {
  if (lead_idx >= original.num_leads()) {
    throw Error(ErrorCode::kLeadOutOfRange,
                "lead " + std::to_string(lead_idx) + " of " +
                    std::to_string(original.num_leads()));
  }
  if (original.signal().shape() != cf.signal().shape()) {
    throw Error(ErrorCode::kOverlayShapeMismatch,
                "counterfactual " + shape_string(cf.signal().shape()) +
                    " vs original " + shape_string(original.signal().shape()));
  }
  constexpr double kLeft = 60, kWidth = 1000, kTop = 50, kHeight = 260;
  const auto a = original.lead(lead_idx);
  const auto b = cf.lead(lead_idx);
  const Range ra = min_max(a), rb = min_max(b);
  double lo = std::min(ra.lo, rb.lo), hi = std::max(ra.hi, rb.hi);
  if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  lo -= pad, hi += pad;
  const double dx = kWidth / static_cast<double>(original.num_samples());
  auto trace = [&](std::span<const double> v) {
    std::vector<Point> pts;
    for (std::size_t t = 0; t < v.size(); ++t) {
      pts.emplace_back(kLeft + t * dx, kTop + (hi - v[t]) / (hi - lo) * kHeight);
    }
    return pts;
  };

  const std::string name = original.lead_names()[lead_idx];
  Svg svg(kLeft + kWidth + 20, kTop + kHeight + 50);
  svg.text(kLeft, 22, "Lead " + name + ": original vs counterfactual",
           {{"class", "title"}});
  svg.rect(kLeft, kTop, kWidth, kHeight,
           {{"class", "axes"}, {"fill", "none"}, {"stroke", "#888888"}});
  Attrs orig = stroke("blue", 1.2);
  orig.insert(orig.begin(), {"class", "original-trace"});
  svg.polyline(trace(a), orig);
  Attrs counter = stroke("red", 1.2);
  counter.insert(counter.begin(), {"class", "cf-trace"});
  svg.polyline(trace(b), counter);

  const double ly = kTop + kHeight + 24;
  svg.line(kLeft, ly - 4, kLeft + 24, ly - 4, stroke("blue", 2));
  svg.text(kLeft + 30, ly, "original (p = " + fixed(original_prob, 4) + ")",
           {{"class", "legend-original"}});
  svg.line(kLeft + 260, ly - 4, kLeft + 284, ly - 4, stroke("red", 2));
  svg.text(kLeft + 290, ly, "counterfactual (p = " + fixed(cf_prob, 4) + ")",
           {{"class", "legend-cf"}});
  svg.write(out);
}

void plot_tcav(const TcavResult& results, const std::vector<std::string>& layers,
               const std::filesystem::path& heatmap_out,
               const std::filesystem::path& ci_out) {
  if (results.entries.empty() || layers.empty()) {
    throw Error(ErrorCode::kEmptyResults, "no TCAV results to plot");
  }
  std::vector<std::string> concepts;
  for (const auto& e : results.entries) {
    if (std::find(concepts.begin(), concepts.end(), e.concept_name) ==
        concepts.end()) {
      concepts.push_back(e.concept_name);
    }
  }

  constexpr double kLabel = 140, kTop = 50, kCellW = 90, kCellH = 40;
  {
    Svg svg(kLabel + kCellW * layers.size() + 120, kTop + kCellH * concepts.size() + 20);
    svg.text(kLabel, 22, "TCAV scores", {{"class", "title"}});
    for (std::size_t j = 0; j < layers.size(); ++j) {
      svg.text(kLabel + kCellW * j + 8, kTop - 8, layers[j], {{"class", "layer-label"}});
    }
    for (std::size_t i = 0; i < concepts.size(); ++i) {
      const double y = kTop + kCellH * i;
      svg.text(8, y + kCellH / 2 + 4, concepts[i], {{"class", "concept-label"}});
      for (std::size_t j = 0; j < layers.size(); ++j) {
        const TcavEntry& e = results.at(layers[j], concepts[i]);
        const double x = kLabel + kCellW * j;
        svg.rect(x, y, kCellW, kCellH,
                 {{"class", "heat-cell"},
                  {"data-layer", layers[j]},
                  {"data-concept", concepts[i]},
                  {"fill", colormap("viridis", e.score)}});
        svg.text(x + 8, y + kCellH / 2 + 4, fixed(e.score, 2),
                 {{"class", "heat-value"}, {"fill", e.score > 0.6 ? "#000000" : "#ffffff"}});
      }
    }
    const double bar_x = kLabel + kCellW * layers.size() + 30;
    for (int k = 0; k < 20; ++k) {
      svg.rect(bar_x, kTop + 8.0 * (19 - k), 16, 8,
               {{"class", "colorbar"}, {"fill", colormap("viridis", (k + 0.5) / 20)}});
    }
    svg.text(bar_x + 20, kTop + 8, "1", {{"class", "colorbar-max"}});
    svg.text(bar_x + 20, kTop + 160, "0", {{"class", "colorbar-min"}});
    svg.write(heatmap_out);
  }

  constexpr double kLeft = 60, kPlotH = 300, kSlot = 36, kGroupGap = 30;
  const double width = kSlot * concepts.size();
  Svg svg(kLeft + (width + kGroupGap) * layers.size() + 20, kTop + kPlotH + 60);
  auto y_of = [&](double v) { return kTop + (1.0 - v) * kPlotH; };
  svg.text(kLeft, 22, "TCAV scores with " + fixed(100 * (1 - results.alpha), 0) +
                          "% confidence intervals",
           {{"class", "title"}});
  const double right = kLeft + (width + kGroupGap) * layers.size();
  svg.line(kLeft, y_of(0), right, y_of(0), stroke("#888888", 1));
  svg.line(kLeft, y_of(0), kLeft, y_of(1), stroke("#888888", 1));
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    svg.text(kLeft - 34, y_of(tick) + 4, fixed(tick, 2), {{"class", "tick"}});
  }
  Attrs ref = stroke("#d62728", 1);
  ref.insert(ref.begin(), {"class", "reference"});
  ref.emplace_back("stroke-dasharray", "6,4");
  svg.line(kLeft, y_of(0.5), right, y_of(0.5), ref);
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const double gx = kLeft + kGroupGap / 2 + (width + kGroupGap) * j;
    svg.text(gx, y_of(0) + 20, layers[j], {{"class", "layer-label"}});
    for (std::size_t i = 0; i < concepts.size(); ++i) {
      const TcavEntry& e = results.at(layers[j], concepts[i]);
      const double cx = gx + kSlot * (i + 0.5);
      const std::string color = colormap("viridis", double(i) / std::max<std::size_t>(1, concepts.size() - 1) * 0.8);
      Attrs ci = stroke(color, 2);
      ci.insert(ci.begin(), {{"class", "ci"}, {"data-layer", layers[j]}, {"data-concept", concepts[i]}});
      svg.line(cx, y_of(e.ci_high), cx, y_of(e.ci_low), ci);
      svg.circle(cx, y_of(e.score), 4,
                 {{"class", "score-point"},
                  {"data-layer", layers[j]},
                  {"data-concept", concepts[i]},
                  {"fill", color}});
    }
  }
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    svg.text(right - 180, kTop + 14 + 16 * i, concepts[i], {{"class", "legend"}});
  }
  svg.write(ci_out);
}

void plot_ecg_chart(const EcgRecord& record, const ChartOptions& options,
                    const std::filesystem::path& out) {
  const ChartStyle& style = options.style;
  style.validate();
  const std::size_t leads = record.num_leads();
  if (leads % style.columns != 0) {
    throw Error(ErrorCode::kGridMismatch,
                std::to_string(leads) + " leads do not fill " +
                    std::to_string(style.columns) + " columns");
  }
  if (options.cf_ecg &&
      options.cf_ecg->signal().shape() != record.signal().shape()) {
    throw Error(ErrorCode::kOverlayShapeMismatch,
                "counterfactual shape differs from the record");
  }
  std::optional<Tensor> shading;
  Range shade_range{0, 0};
  if (options.attribution) {
    shading = binned_rows(record, *options.attribution,
                          options.attribution_bin_size,
                          ErrorCode::kOverlayShapeMismatch);
    shade_range = min_max(shading->values());
  }

  const std::size_t rows = leads / style.columns;
  const std::size_t samples = record.num_samples();
  const double rate = record.sampling_rate();
  const double per_s = style.paper_speed * kUnitsPerMm;
  const double per_mv = style.gain * kUnitsPerMm;
  const double row_h = style.row_height_mv * per_mv;
  const double margin = 10.0;
  const double cal_w = options.show_calibration ? 0.4 * per_s : 0.0;
  const double x0 = margin + cal_w;
  const double top = 50.0;
  // Column c shows samples [c T / cols, (c + 1) T / cols).
  auto segment_start = [&](std::size_t c) {
    return c * samples / style.columns;
  };
  const double panel_w =
      static_cast<double>(segment_start(1)) / rate * per_s;
  const double grid_w = cal_w + panel_w * style.columns;
  const double grid_h = row_h * rows;

  std::vector<std::string> footer;
  if (options.tcav) {
    std::vector<std::string> seen;
    for (auto it = options.tcav->entries.rbegin();
         it != options.tcav->entries.rend(); ++it) {
      if (std::find(seen.begin(), seen.end(), it->concept_name) != seen.end()) continue;
      seen.push_back(it->concept_name);
      footer.push_back(it->concept_name + ": " + fixed(it->score, 3) + " [" +
                       fixed(it->ci_low, 3) + ", " + fixed(it->ci_high, 3) + "]");
    }
    std::reverse(footer.begin(), footer.end());
  }

  Svg svg(grid_w + 2 * margin, top + grid_h + 20 + 18.0 * footer.size() + 10);
  svg.rect(0, 0, grid_w + 2 * margin, top + grid_h + 30 + 18.0 * footer.size(),
           {{"class", "background"}, {"fill", style.color("background")}});
  svg.text(margin, 28, options.title, {{"class", "title"}, {"font-size", "16"}});

  if (shading) {
    for (std::size_t c = 0; c < style.columns; ++c) {
      const std::size_t s0 = segment_start(c), s1 = segment_start(c + 1);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t lead = c * rows + r;
        const double px = x0 + c * panel_w, py = top + r * row_h;
        const auto bin = static_cast<std::size_t>(options.attribution_bin_size);
        for (std::size_t b = s0 / bin; b * bin < s1; ++b) {
          const double from = std::max(b * bin, s0), to = std::min((b + 1) * bin, s1);
          svg.rect(px + (from - s0) / rate * per_s, py,
                   (to - from) / rate * per_s, row_h,
                   {{"class", "attr-shade"},
                    {"data-lead", record.lead_names()[lead]},
                    {"fill", colormap(style.attribution_cmap,
                                      shade_range.normalize(shading->at(lead, b)))},
                    {"fill-opacity", "0.35"}});
        }
      }
    }
  }

  auto grid_path = [&](double step_x, double step_y) {
    std::string d;
    const auto nx = static_cast<std::size_t>(std::floor(grid_w / step_x + 1e-9));
    for (std::size_t k = 0; k <= nx; ++k) {
      d += "M" + num(margin + k * step_x) + " " + num(top) + "V" + num(top + grid_h);
    }
    const auto ny = static_cast<std::size_t>(std::floor(grid_h / step_y + 1e-9));
    for (std::size_t k = 0; k <= ny; ++k) {
      d += "M" + num(margin) + " " + num(top + k * step_y) + "H" +
           num(margin + grid_w);
    }
    return d;
  };
  Attrs minor = stroke(style.color("grid_minor"), 0.5);
  minor.insert(minor.begin(), {"class", "grid-minor"});
  svg.path(grid_path(style.small_box_s * per_s, style.small_box_mv * per_mv), minor);
  Attrs major = stroke(style.color("grid_major"), 1);
  major.insert(major.begin(), {"class", "grid-major"});
  svg.path(grid_path(style.large_box_s * per_s, style.large_box_mv * per_mv), major);

  for (std::size_t r = 0; r < rows; ++r) {
    const double baseline = top + (r + 0.5) * row_h;
    if (options.show_calibration) {
      const double cx = margin + 0.1 * per_s;
      Attrs cal = stroke(style.color("calibration"), 1.5);
      cal.insert(cal.begin(), {"class", "calibration"});
      svg.polyline({{cx, baseline},
                    {cx + 0.05 * per_s, baseline},
                    {cx + 0.05 * per_s, baseline - per_mv},
                    {cx + 0.25 * per_s, baseline - per_mv},
                    {cx + 0.25 * per_s, baseline},
                    {cx + 0.3 * per_s, baseline}},
                   cal);
    }
    for (std::size_t c = 0; c < style.columns; ++c) {
      const std::size_t lead = c * rows + r;
      const std::size_t s0 = segment_start(c), s1 = segment_start(c + 1);
      const double px = x0 + c * panel_w;
      const std::string& name = record.lead_names()[lead];
      svg.rect(px, top + r * row_h, panel_w, row_h,
               {{"class", "panel"}, {"data-lead", name}, {"fill", "none"}});
      svg.text(px + 6, top + r * row_h + 16, name,
               {{"class", "lead-label"}, {"fill", style.color("text")}});
      auto trace = [&](const EcgRecord& rec) {
        std::vector<Point> pts;
        pts.reserve(s1 - s0);
        for (std::size_t t = s0; t < s1; ++t) {
          pts.emplace_back(px + (t - s0) / rate * per_s,
                           baseline - rec.value(lead, t) * per_mv);
        }
        return pts;
      };
      Attrs main = stroke(style.color("trace"), 1.2);
      main.insert(main.begin(), {{"class", "trace"}, {"data-lead", name}});
      svg.polyline(trace(record), main);
      if (options.cf_ecg) {
        Attrs cf = stroke(style.cf_color, 1.2);
        cf.insert(cf.begin(), {{"class", "cf-trace"}, {"data-lead", name}});
        cf.emplace_back("stroke-opacity", num(style.cf_alpha));
        svg.polyline(trace(*options.cf_ecg), cf);
      }
    }
  }

  for (std::size_t i = 0; i < footer.size(); ++i) {
    svg.text(margin, top + grid_h + 22 + 18.0 * i, footer[i],
             {{"class", "tcav-footer"}, {"fill", style.color("text")}});
  }
  svg.write(out);
}

}  // namespace ecgx::viz
