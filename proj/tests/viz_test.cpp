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

#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ecgx/viz/viz.hpp"
#include "svg_scan.hpp"
#include "test_util.hpp"

namespace ecgx::viz {
namespace {

using ::ecgx::testing::Attributes;
using ::ecgx::testing::code_of;
using ::ecgx::testing::elements;
using ::ecgx::testing::number;
using ::ecgx::testing::points;
using ::ecgx::testing::random_tensor;
using ::ecgx::testing::slurp;
using ::ecgx::testing::texts;

AttributionResult scores_of(Tensor scores) {
  AttributionResult result;
  result.scores = std::move(scores);
  result.method = "saliency";
  return result;
}

TcavEntry entry(std::string layer, std::string concept_name, double score,
                double lo, double hi) {
  TcavEntry e;
  e.layer = std::move(layer);
  e.concept_name = std::move(concept_name);
  e.score = score;
  e.ci_low = lo;
  e.ci_high = hi;
  e.n_runs = 10;
  return e;
}

TEST(ColormapTest, Endpoints) {
  EXPECT_EQ(colormap("viridis", 0.0), "#440154");
  EXPECT_EQ(colormap("viridis", 1.0), "#fde725");
  EXPECT_EQ(colormap("viridis", 7.0), "#fde725");
  EXPECT_EQ(colormap("greys", 0.0), "#ffffff");
  EXPECT_EQ(colormap("greys", 1.0), "#000000");
  EXPECT_EQ(code_of([] { colormap("jet", 0.5); }), ErrorCode::kInvalidParams);
}

TEST(PlotAttributionTest, HundredCellsPerLead) {
  const EcgRecord record = testing::random_record(12, 2500, 250, 1);
  const auto path = testing::scratch_dir("viz_attr") / "attr.svg";
  plot_attribution(record, scores_of(random_tensor({12, 2500}, 2)), 25, path);
  const std::string svg = slurp(path);
  const auto cells = elements(svg, "attr-cell");
  EXPECT_EQ(cells.size(), 1200u);
  std::map<std::string, int> per_lead;
  for (const auto& c : cells) ++per_lead[c.at("data-lead")];
  EXPECT_EQ(per_lead.size(), 12u);
  for (const auto& [lead, count] : per_lead) EXPECT_EQ(count, 100) << lead;
  EXPECT_EQ(elements(svg, "trace").size(), 12u);
}

TEST(PlotAttributionTest, ZeroScoresGiveUniformStrip) {
  const EcgRecord record = testing::random_record(2, 500, 250, 3);
  const auto path = testing::scratch_dir("viz_zero") / "attr.svg";
  plot_attribution(record, scores_of(Tensor({2, 500})), 25, path);
  std::set<std::string> fills;
  for (const auto& c : elements(slurp(path), "attr-cell")) fills.insert(c.at("fill"));
  EXPECT_EQ(fills.size(), 1u);
}

TEST(PlotAttributionTest, ByteIdenticalOutput) {
  const EcgRecord record = testing::random_record(3, 400, 250, 4);
  const auto scores = scores_of(random_tensor({400}, 5));
  const auto dir = testing::scratch_dir("viz_bytes");
  plot_attribution(record, scores, 25, dir / "a.svg");
  plot_attribution(record, scores, 25, dir / "b.svg");
  EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "b.svg"));
}

TEST(PlotAttributionTest, SpikeSharesAxisWithStrip) {
  constexpr std::size_t kSpike = 1234;
  Tensor signal({1, 2500});
  signal.at(0, kSpike) = 1.0;
  Tensor scores({1, 2500});
  scores.at(0, kSpike) = 5.0;
  const auto path = testing::scratch_dir("viz_axis") / "attr.svg";
  plot_attribution(EcgRecord(signal, 250), scores_of(scores), 25, path);
  const std::string svg = slurp(path);

  const auto trace = points(elements(svg, "trace").at(0));
  ASSERT_EQ(trace.size(), 2500u);
  std::size_t peak = 0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if (trace[t].second < trace[peak].second) peak = t;
  }
  EXPECT_EQ(peak, kSpike);
  // x(t) is affine: x(t) = x(0) + t * (x(1) - x(0)).
  const double x0 = trace[0].first;
  const double dx = trace[1].first - x0;
  EXPECT_NEAR(trace[kSpike].first, x0 + kSpike * dx, 1e-6);

  const auto cells = elements(svg, "attr-cell");
  ASSERT_EQ(cells.size(), 100u);
  EXPECT_NEAR(number(cells.front(), "x"), x0, 1e-6);
  const auto& last = cells.back();
  EXPECT_NEAR(number(last, "x") + number(last, "width"), x0 + 2500 * dx, 1e-6);
  const auto& hot = cells.at(kSpike / 25);
  EXPECT_EQ(hot.at("fill"), colormap("viridis", 1.0));
  EXPECT_NEAR(number(hot, "x"), x0 + (kSpike / 25) * 25 * dx, 1e-6);
  EXPECT_LE(number(hot, "x"), trace[kSpike].first);
  EXPECT_GE(number(hot, "x") + number(hot, "width"), trace[kSpike].first);
}

TEST(PlotAttributionTest, Errors) {
  const EcgRecord record = testing::random_record(2, 100, 250, 1);
  const auto path = testing::scratch_dir("viz_err") / "attr.svg";
  EXPECT_EQ(code_of([&] { plot_attribution(record, scores_of(Tensor({2, 99})), 25, path); }),
            ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([&] { plot_attribution(record, scores_of(Tensor({2, 100})), 25, path, 2); }),
            ErrorCode::kLeadOutOfRange);
  EXPECT_EQ(code_of([&] {
              plot_attribution(record, scores_of(Tensor({2, 100})), 25,
                               "/nonexistent-dir/x/attr.svg");
            }),
            ErrorCode::kUnwritablePath);
}

TEST(OverlayTest, LegendShowsFourDecimals) {
  const EcgRecord original = testing::random_record(12, 500, 250, 1);
  const EcgRecord cf = testing::random_record(12, 500, 250, 2);
  const auto path = testing::scratch_dir("viz_overlay") / "overlay.svg";
  plot_counterfactual_overlay(original, cf, 1, 0.0005, 0.7712, path);
  const std::string svg = slurp(path);
  EXPECT_EQ(texts(svg, "legend-original"), std::vector<std::string>{"original (p = 0.0005)"});
  EXPECT_EQ(texts(svg, "legend-cf"), std::vector<std::string>{"counterfactual (p = 0.7712)"});
}

TEST(OverlayTest, IdenticalTracesCoincide) {
  const EcgRecord original = testing::random_record(3, 200, 250, 3);
  const auto path = testing::scratch_dir("viz_same") / "overlay.svg";
  plot_counterfactual_overlay(original, original, 0, 0.2, 0.2, path);
  const std::string svg = slurp(path);
  EXPECT_EQ(points(elements(svg, "original-trace").at(0)),
            points(elements(svg, "cf-trace").at(0)));
}

TEST(OverlayTest, Errors) {
  const EcgRecord original = testing::random_record(3, 200, 250, 3);
  const auto path = testing::scratch_dir("viz_overlay_err") / "overlay.svg";
  EXPECT_EQ(code_of([&] { plot_counterfactual_overlay(original, original, 3, 0, 0, path); }),
            ErrorCode::kLeadOutOfRange);
  const EcgRecord shorter = testing::random_record(3, 100, 250, 3);
  EXPECT_EQ(code_of([&] { plot_counterfactual_overlay(original, shorter, 0, 0, 0, path); }),
            ErrorCode::kOverlayShapeMismatch);
}

TEST(PlotTcavTest, HeatmapHasCellPerPair) {
  TcavResult result;
  const std::vector<std::string> layers{"conv1", "conv2", "conv3"};
  for (const std::string concept_name : {"af", "sinus", "noise", "wide_qrs"}) {
    for (const auto& layer : layers) {
      result.entries.push_back(entry(layer, concept_name, 0.7, 0.6, 0.8));
    }
  }
  const auto dir = testing::scratch_dir("viz_tcav");
  plot_tcav(result, layers, dir / "heat.svg", dir / "ci.svg");
  EXPECT_EQ(elements(slurp(dir / "heat.svg"), "heat-cell").size(), 12u);
  EXPECT_EQ(elements(slurp(dir / "ci.svg"), "score-point").size(), 12u);
}

TEST(PlotTcavTest, ChanceScoreSitsOnReferenceLine) {
  TcavResult result;
  result.entries.push_back(entry("conv3", "null", 0.5, 0.5, 0.5));
  result.entries.push_back(entry("conv3", "af", 0.9, 0.85, 0.95));
  const auto dir = testing::scratch_dir("viz_chance");
  plot_tcav(result, {"conv3"}, dir / "heat.svg", dir / "ci.svg");
  const std::string svg = slurp(dir / "ci.svg");
  const auto reference = elements(svg, "reference").at(0);
  const double ref_y = number(reference, "y1");
  EXPECT_EQ(number(reference, "y2"), ref_y);
  for (const auto& point : elements(svg, "score-point")) {
    if (point.at("data-concept") == "null") {
      EXPECT_EQ(number(point, "cy"), ref_y);
    } else {
      EXPECT_LT(number(point, "cy"), ref_y);  // above the line
    }
  }
  for (const auto& ci : elements(svg, "ci")) {
    if (ci.at("data-concept") == "null") {
      EXPECT_EQ(number(ci, "y1"), ref_y);
      EXPECT_EQ(number(ci, "y2"), ref_y);
    }
  }
}

TEST(PlotTcavTest, EmptyResultsRejected) {
  const auto dir = testing::scratch_dir("viz_empty");
  EXPECT_EQ(code_of([&] { plot_tcav(TcavResult{}, {"conv3"}, dir / "h.svg", dir / "c.svg"); }),
            ErrorCode::kEmptyResults);
}

TEST(ChartTest, TwelveLeadsFormFourByThreeGrid) {
  const EcgRecord record = testing::random_record(12, 2500, 250, 6);
  const auto path = testing::scratch_dir("viz_chart") / "chart.svg";
  plot_ecg_chart(record, {}, path);
  const std::string svg = slurp(path);
  const auto panels = elements(svg, "panel");
  ASSERT_EQ(panels.size(), 12u);
  std::set<std::string> xs, ys;
  std::map<std::string, std::pair<std::string, std::string>> position;
  for (const auto& p : panels) {
    xs.insert(p.at("x"));
    ys.insert(p.at("y"));
    position[p.at("data-lead")] = {p.at("x"), p.at("y")};
  }
  EXPECT_EQ(xs.size(), 4u);
  EXPECT_EQ(ys.size(), 3u);
  // Leads run down each column: I, II, III share a column.
  EXPECT_EQ(position["I"].first, position["III"].first);
  EXPECT_NE(position["I"].second, position["II"].second);
  EXPECT_EQ(position["I"].second, position["aVR"].second);
  // 2.5 s per column at 25 mm/s.
  for (const auto& p : panels) {
    EXPECT_NEAR(number(p, "width"), 2.5 * 25 * kUnitsPerMm, 1e-9);
  }
  EXPECT_EQ(elements(svg, "trace").size(), 12u);
  EXPECT_EQ(elements(svg, "grid-minor").size(), 1u);
  EXPECT_EQ(elements(svg, "grid-major").size(), 1u);
}

TEST(ChartTest, CalibrationPulseMatchesOneMillivolt) {
  Tensor signal({12, 1000});
  for (std::size_t t = 0; t < 1000; ++t) signal.at(0, t) = 1.0;
  const auto path = testing::scratch_dir("viz_cal") / "chart.svg";
  plot_ecg_chart(EcgRecord(signal, 250), {}, path);
  const std::string svg = slurp(path);
  const auto pulses = elements(svg, "calibration");
  ASSERT_EQ(pulses.size(), 3u);
  const auto pulse = points(pulses[0]);
  ASSERT_EQ(pulse.size(), 6u);
  const double baseline = pulse[0].second;
  const double pulse_height = baseline - pulse[2].second;
  EXPECT_NEAR(pulse_height, 10.0 * kUnitsPerMm, 1e-9);
  EXPECT_NEAR(pulse[3].first - pulse[2].first, 0.2 * 25 * kUnitsPerMm, 1e-9);

  const double panel_height = number(elements(svg, "panel").at(0), "height");
  for (const auto& trace : elements(svg, "trace")) {
    if (trace.at("data-lead") != "I") continue;
    for (const auto& [x, y] : points(trace)) {
      EXPECT_NEAR(baseline - y, pulse_height, 1e-6 * panel_height);
    }
  }
  // The pulse precedes the first waveform of its row.
  EXPECT_LT(pulse.back().first, number(elements(svg, "panel").at(0), "x") + 1e-9);
}

TEST(ChartTest, ZeroSignalDrawsFlatTracesOnGrid) {
  const auto path = testing::scratch_dir("viz_flat") / "chart.svg";
  plot_ecg_chart(EcgRecord(Tensor({12, 500}), 250), {}, path);
  const std::string svg = slurp(path);
  ASSERT_TRUE(std::filesystem::exists(path));
  EXPECT_FALSE(elements(svg, "grid-minor").empty());
  for (const auto& trace : elements(svg, "trace")) {
    const auto pts = points(trace);
    for (const auto& p : pts) EXPECT_EQ(p.second, pts.front().second);
  }
}

TEST(ChartTest, OverlaysAndFooter) {
  const EcgRecord record = testing::random_record(12, 500, 250, 7);
  ChartOptions options;
  options.cf_ecg = testing::random_record(12, 500, 250, 8);
  options.attribution = scores_of(random_tensor({12, 500}, 9));
  options.title = "AF & sinus";
  TcavResult tcav;
  tcav.entries.push_back(entry("conv2", "af", 0.5, 0.4, 0.6));
  tcav.entries.push_back(entry("conv3", "af", 0.91, 0.875, 0.95));
  options.tcav = tcav;
  const auto path = testing::scratch_dir("viz_overlays") / "chart.svg";
  plot_ecg_chart(record, options, path);
  const std::string svg = slurp(path);
  const auto cf = elements(svg, "cf-trace");
  ASSERT_EQ(cf.size(), 12u);
  EXPECT_EQ(cf[0].at("stroke"), "green");
  EXPECT_EQ(cf[0].at("stroke-opacity"), "0.6");
  EXPECT_EQ(elements(svg, "attr-shade").size(), 12u * 5u);
  EXPECT_EQ(texts(svg, "tcav-footer"), std::vector<std::string>{"af: 0.910 [0.875, 0.950]"});
  EXPECT_EQ(texts(svg, "title"), std::vector<std::string>{"AF &amp; sinus"});
}

TEST(ChartTest, Errors) {
  const auto path = testing::scratch_dir("viz_chart_err") / "chart.svg";
  const EcgRecord ten = testing::random_record(10, 200, 250, 1);
  EXPECT_EQ(code_of([&] { plot_ecg_chart(ten, {}, path); }), ErrorCode::kGridMismatch);
  const EcgRecord record = testing::random_record(12, 200, 250, 1);
  ChartOptions options;
  options.cf_ecg = testing::random_record(12, 100, 250, 2);
  EXPECT_EQ(code_of([&] { plot_ecg_chart(record, options, path); }),
            ErrorCode::kOverlayShapeMismatch);
  ChartOptions bad_style;
  bad_style.style.columns = 0;
  EXPECT_EQ(code_of([&] { plot_ecg_chart(record, bad_style, path); }),
            ErrorCode::kInvalidParams);
}

TEST(ChartTest, ByteIdenticalOutput) {
  const EcgRecord record = testing::random_record(12, 300, 250, 3);
  const auto dir = testing::scratch_dir("viz_chart_bytes");
  plot_ecg_chart(record, {}, dir / "a.svg");
  plot_ecg_chart(record, {}, dir / "b.svg");
  EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "b.svg"));
}

}  // namespace
}  // namespace ecgx::viz
