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
#include <string>
#include <vector>

#include "json.hpp"

namespace ecgx {

// Everything needed to regenerate an explanation: seed, method, its
// parameters, model identity and a content hash of the inputs.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string method_name;
  nlohmann::json method_params = nlohmann::json::object();
  std::string model_id;
  std::string input_fingerprint;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ManifestOutput {
  std::string kind;
  std::string path;  // relative to the manifest directory
  std::string sha256;

  friend bool operator==(const ManifestOutput&, const ManifestOutput&) = default;
};

inline constexpr const char* kToolkitVersion = "0.3.0";

// One per run directory. Written as pretty-printed JSON with sorted keys.
class ExplanationManifest {
 public:
  explicit ExplanationManifest(RunConfig run_config);

  const RunConfig& run_config() const noexcept { return run_config_; }
  const std::vector<ManifestOutput>& outputs() const noexcept {
    return outputs_;
  }
  const std::string& toolkit_version() const noexcept { return version_; }
  double wall_time_s() const noexcept { return wall_time_s_; }
  const nlohmann::json& resolved_config() const noexcept { return resolved_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }

  // Hashes the file as it is on disk now. `path` must live under `root`.
  void add_output(const std::string& kind, const std::filesystem::path& root,
                  const std::filesystem::path& path);
  void set_wall_time(double seconds) { wall_time_s_ = seconds; }
  void set_resolved_config(nlohmann::json config) {
    resolved_ = std::move(config);
  }
  void add_note(std::string note) { notes_.push_back(std::move(note)); }

  nlohmann::json to_json() const;
  static ExplanationManifest from_json(const nlohmann::json& j);

  void write(const std::filesystem::path& path) const;
  static ExplanationManifest read(const std::filesystem::path& path);

  // Kinds of outputs whose current file hash differs from the recorded one.
  std::vector<std::string> stale_outputs(
      const std::filesystem::path& root) const;

 private:
  RunConfig run_config_;
  std::vector<ManifestOutput> outputs_;
  std::string version_ = kToolkitVersion;
  double wall_time_s_ = 0.0;
  nlohmann::json resolved_ = nlohmann::json::object();
  std::vector<std::string> notes_;
};

}  // namespace ecgx
