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

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ecgx::testing {

using Attributes = std::map<std::string, std::string>;

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// Attributes of every element carrying class="<cls>"; the element name is
// stored under "tag" and text content under "text".
inline std::vector<Attributes> elements(const std::string& svg, const std::string& cls) {
  std::vector<Attributes> out;
  for (std::size_t open = svg.find('<'); open != std::string::npos;
       open = svg.find('<', open + 1)) {
    const std::size_t close = svg.find('>', open);
    std::size_t pos = open + 1;
    Attributes attrs;
    while (pos < close && std::isalpha(static_cast<unsigned char>(svg[pos]))) ++pos;
    attrs["tag"] = svg.substr(open + 1, pos - open - 1);
    for (;;) {
      const std::size_t eq = svg.find("=\"", pos);
      if (eq == std::string::npos || eq > close) break;
      const std::size_t name_start = svg.rfind(' ', eq) + 1;
      const std::size_t value_end = svg.find('"', eq + 2);
      attrs[svg.substr(name_start, eq - name_start)] =
          svg.substr(eq + 2, value_end - eq - 2);
      pos = value_end + 1;
    }
    if (attrs["tag"] == "text") {
      attrs["text"] = svg.substr(close + 1, svg.find('<', close) - close - 1);
    }
    if (attrs.count("class") && attrs["class"] == cls) out.push_back(attrs);
  }
  return out;
}

inline std::vector<std::string> texts(const std::string& svg, const std::string& cls) {
  std::vector<std::string> out;
  for (const auto& e : elements(svg, cls)) out.push_back(e.at("text"));
  return out;
}

inline std::vector<std::pair<double, double>> points(const Attributes& polyline) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(polyline.at("points"));
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    out.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
  }
  return out;
}

inline double number(const Attributes& attrs, const std::string& key) {
  return std::stod(attrs.at(key));
}

}  // namespace ecgx::testing
