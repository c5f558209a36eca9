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

#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace ecgx::viz {

// Fixed-precision (6 significant digits) number formatting; -0 prints as 0.
std::string num(double v);

std::string escape_xml(const std::string& text);

using Attrs = std::vector<std::pair<std::string, std::string>>;

// Append-only SVG document. Element order is emission order, so identical
// call sequences give identical bytes.
class Svg {
 public:
  Svg(double width, double height);

  void rect(double x, double y, double w, double h, const Attrs& attrs);
  void line(double x1, double y1, double x2, double y2, const Attrs& attrs);
  void circle(double cx, double cy, double r, const Attrs& attrs);
  void polyline(const std::vector<std::pair<double, double>>& points,
                const Attrs& attrs);
  void path(const std::string& d, const Attrs& attrs);
  void text(double x, double y, const std::string& content, const Attrs& attrs);

  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  void open(const std::string& tag, const Attrs& geometry, const Attrs& attrs);

  double width_, height_;
  std::string body_;
};

}  // namespace ecgx::viz
