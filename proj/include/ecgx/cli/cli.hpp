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
#include <optional>
#include <string>

#include "json.hpp"

namespace ecgx::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigInvalid = 2,
  kExitModelLoadFailed = 3,
  kExitExplainerFailed = 4,
};

// Global overrides. The output root is chosen as: out_dir flag, then
// $EXECG_OUT_DIR, then the config's "out_dir", then "./runs".
struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  // Merged into the explain config's "params" (e.g. lambda_prox, tol).
  nlohmann::json param_overrides = nlohmann::json::object();
};

struct CommandResult {
  int exit_code = kExitOk;
  std::filesystem::path run_dir;  // empty unless the command got that far
  std::string message;
};

// Each command reads a JSON config, fills in defaults, resolves relative paths
// against the config's directory and runs in
// <out root>/<command>-<first 16 hex of sha256(resolved config)>. The manifest
// in that directory embeds the resolved config.
CommandResult cmd_explain(const std::filesystem::path& config,
                          const GlobalOptions& options = {});
CommandResult cmd_chart(const std::filesystem::path& config,
                        const GlobalOptions& options = {});
CommandResult cmd_synth(const std::filesystem::path& config,
                        const GlobalOptions& options = {});
CommandResult cmd_tcav(const std::filesystem::path& config,
                       const GlobalOptions& options = {});

// Applies defaults and validates; throws Error(kConfigInvalid) on schema
// violations. `base` anchors relative paths.
nlohmann::json resolve_config(const std::string& command,
                              const nlohmann::json& raw,
                              const std::filesystem::path& base,
                              const GlobalOptions& options);

std::string config_hash(const nlohmann::json& resolved);

// Entry point for the ecgx executable.
int run(int argc, char** argv);

}  // namespace ecgx::cli
