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

#include "svg.hpp"

#include <cstdio>
#include <fstream>

#include "ecgx/error.hpp"

namespace ecgx::viz {

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Svg::Svg(double width, double height) : width_(width), height_(height) {}

void Svg::open(const std::string& tag, const Attrs& geometry,
               const Attrs& attrs) {
  body_ += "<" + tag;
  for (const auto& [k, v] : geometry) body_ += " " + k + "=\"" + v + "\"";
  for (const auto& [k, v] : attrs) {
    body_ += " " + k + "=\"" + escape_xml(v) + "\"";
  }
}

void Svg::rect(double x, double y, double w, double h, const Attrs& attrs) {
  open("rect",
       {{"x", num(x)}, {"y", num(y)}, {"width", num(w)}, {"height", num(h)}},
       attrs);
  body_ += "/>\n";
}

void Svg::line(double x1, double y1, double x2, double y2, const Attrs& attrs) {
  open("line",
       {{"x1", num(x1)}, {"y1", num(y1)}, {"x2", num(x2)}, {"y2", num(y2)}},
       attrs);
  body_ += "/>\n";
}

void Svg::circle(double cx, double cy, double r, const Attrs& attrs) {
  open("circle", {{"cx", num(cx)}, {"cy", num(cy)}, {"r", num(r)}}, attrs);
  body_ += "/>\n";
}

void Svg::polyline(const std::vector<std::pair<double, double>>& points,
                   const Attrs& attrs) {
  std::string pts;
  for (const auto& [x, y] : points) {
    if (!pts.empty()) pts += ' ';
    pts += num(x) + "," + num(y);
  }
  open("polyline", {{"points", pts}}, attrs);
  body_ += " fill=\"none\"/>\n";
}

void Svg::path(const std::string& d, const Attrs& attrs) {
  open("path", {{"d", d}}, attrs);
  body_ += " fill=\"none\"/>\n";
}

void Svg::text(double x, double y, const std::string& content,
               const Attrs& attrs) {
  open("text", {{"x", num(x)}, {"y", num(y)}}, attrs);
  body_ += ">" + escape_xml(content) + "</text>\n";
}

std::string Svg::str() const {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(width_) + "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " +
         num(width_) + " " + num(height_) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n" + body_ +
         "</svg>\n";
}

void Svg::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kUnwritablePath, "cannot write " + path.string());
  const std::string bytes = str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kUnwritablePath, "cannot write " + path.string());
}

}  // namespace ecgx::viz
