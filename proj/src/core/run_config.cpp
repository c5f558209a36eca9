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

#include "ecgx/core/run_config.hpp"

#include <fstream>
#include <utility>

#include "ecgx/core/hash.hpp"
#include "ecgx/error.hpp"

namespace ecgx {

nlohmann::json RunConfig::to_json() const {
  return {{"seed", seed},
          {"method_name", method_name},
          {"method_params", method_params},
          {"model_id", model_id},
          {"input_fingerprint", input_fingerprint}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.method_name = j.at("method_name").get<std::string>();
    c.method_params = j.at("method_params");
    c.model_id = j.at("model_id").get<std::string>();
    c.input_fingerprint = j.at("input_fingerprint").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid,
                std::string("run config: ") + e.what());
  }
}

ExplanationManifest::ExplanationManifest(RunConfig run_config)
    : run_config_(std::move(run_config)) {}

void ExplanationManifest::add_output(const std::string& kind,
                                     const std::filesystem::path& root,
                                     const std::filesystem::path& path) {
  const auto relative = std::filesystem::relative(path, root);
  if (relative.empty() || *relative.begin() == "..") {
    throw Error(ErrorCode::kUnwritablePath,
                path.string() + " is outside " + root.string());
  }
  outputs_.push_back({kind, relative.generic_string(), sha256_file(path)});
}

nlohmann::json ExplanationManifest::to_json() const {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& o : outputs_) {
    outputs.push_back({{"kind", o.kind}, {"path", o.path}, {"sha256", o.sha256}});
  }
  return {{"run_config", run_config_.to_json()},
          {"outputs", outputs},
          {"toolkit_version", version_},
          {"wall_time_s", wall_time_s_},
          {"resolved_config", resolved_},
          {"notes", notes_}};
}

ExplanationManifest ExplanationManifest::from_json(const nlohmann::json& j) {
  try {
    ExplanationManifest m(RunConfig::from_json(j.at("run_config")));
    for (const auto& o : j.at("outputs")) {
      m.outputs_.push_back({o.at("kind").get<std::string>(),
                            o.at("path").get<std::string>(),
                            o.at("sha256").get<std::string>()});
    }
    m.version_ = j.at("toolkit_version").get<std::string>();
    m.wall_time_s_ = j.at("wall_time_s").get<double>();
    m.resolved_ = j.value("resolved_config", nlohmann::json::object());
    m.notes_ = j.value("notes", std::vector<std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("manifest: ") + e.what());
  }
}

void ExplanationManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kUnwritablePath, path.string());
  out << to_json().dump(2) << "\n";
}

ExplanationManifest ExplanationManifest::read(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("manifest: ") + e.what());
  }
}

std::vector<std::string> ExplanationManifest::stale_outputs(
    const std::filesystem::path& root) const {
  std::vector<std::string> stale;
  for (const auto& o : outputs_) {
    const auto file = root / o.path;
    if (!std::filesystem::exists(file) || sha256_file(file) != o.sha256) {
      stale.push_back(o.kind);
    }
  }
  return stale;
}

}  // namespace ecgx
