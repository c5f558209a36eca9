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

#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ecgx/cli/cli.hpp"
#include "ecgx/core/io.hpp"
#include "ecgx/core/run_config.hpp"
#include "ecgx/synth/synth.hpp"
#include "ecgx/tcav/tcav.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace ecgx::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path write_config(const fs::path& dir, const std::string& name, const json& config) {
  const fs::path path = dir / name;
  std::ofstream(path) << config.dump(2);
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Restores an environment variable on scope exit.
class ScopedEnv {
 public:
  ScopedEnv(const char* name, const std::string& value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    setenv(name, value.c_str(), 1);
  }
  ~ScopedEnv() {
    if (old_) setenv(name_, old_->c_str(), 1);
    else unsetenv(name_);
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

// One small trained model shared by the suite.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(testing::scratch_dir("cli"));
    const json synth = {{"n_per_class", 10}, {"epochs", 2},   {"batch_size", 4},
                        {"samples", 500},    {"rate", 250},   {"out_dir", "runs"}};
    const auto result = cmd_synth(write_config(*root_, "synth.json", synth));
    ASSERT_EQ(result.exit_code, kExitOk) << result.message;
    synth_dir_ = new fs::path(result.run_dir);
  }
  static void TearDownTestSuite() {
    delete root_;
    delete synth_dir_;
  }

  static fs::path model() { return *synth_dir_ / "model.ckpt"; }
  static fs::path record(int i) {
    char name[32];
    std::snprintf(name, sizeof(name), "record_%04d.bin", i);
    return *synth_dir_ / "dataset" / name;
  }
  static json explain_config(const std::string& method) {
    return {{"model", model().string()},
            {"inputs", {record(0).string(), record(1).string()}},
            {"method", method},
            {"target", 1},
            {"out_dir", "runs"}};
  }

  static fs::path* root_;
  static fs::path* synth_dir_;
};
fs::path* CliTest::root_ = nullptr;
fs::path* CliTest::synth_dir_ = nullptr;

TEST_F(CliTest, SynthWritesCheckpointDatasetAndManifest) {
  EXPECT_TRUE(fs::exists(model()));
  EXPECT_TRUE(fs::exists(*synth_dir_ / "dataset" / "labels.csv"));
  EXPECT_TRUE(fs::exists(record(19)));
  EXPECT_TRUE(fs::exists(*synth_dir_ / "training.json"));
  const auto manifest = ExplanationManifest::read(*synth_dir_ / "manifest.json");
  EXPECT_EQ(manifest.run_config().method_name, "synth");
  EXPECT_EQ(manifest.resolved_config().at("n_per_class"), 10);
  EXPECT_TRUE(manifest.stale_outputs(*synth_dir_).empty());
  EXPECT_EQ(synth_dir_->parent_path(), *root_ / "runs");
  EXPECT_EQ(synth_dir_->filename().string().rfind("synth-", 0), 0u);
}

TEST_F(CliTest, GradcamExplainWritesArtifacts) {
  json config = explain_config("gradcam");
  config["params"] = {{"layer", "conv3"}};
  const auto result = cmd_explain(write_config(*root_, "gradcam.json", config));
  ASSERT_EQ(result.exit_code, kExitOk) << result.message;
  for (const char* name : {"attribution_0.bin", "attribution_0.svg",
                           "attribution_1.bin", "attribution_1.svg", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(result.run_dir / name)) << name;
  }
  const Tensor map = load_array_f32(result.run_dir / "attribution_0.bin");
  EXPECT_EQ(map.size(), 500u);
  const auto manifest = ExplanationManifest::read(result.run_dir / "manifest.json");
  EXPECT_EQ(manifest.run_config().method_name, "gradcam");
  EXPECT_EQ(manifest.run_config().method_params.at("layer"), "conv3");
  EXPECT_EQ(manifest.outputs().size(), 4u);
}

TEST_F(CliTest, SameConfigSameRunDirectoryAndBytes) {
  const auto path = write_config(*root_, "saliency.json", explain_config("saliency"));
  const auto first = cmd_explain(path);
  ASSERT_EQ(first.exit_code, kExitOk) << first.message;
  const std::string bytes = slurp(first.run_dir / "attribution_0.bin");
  const auto second = cmd_explain(path);
  ASSERT_EQ(second.exit_code, kExitOk) << second.message;
  EXPECT_EQ(first.run_dir, second.run_dir);
  EXPECT_EQ(slurp(second.run_dir / "attribution_0.bin"), bytes);
}

TEST_F(CliTest, EmbeddedConfigReproducesRun) {
  json config = explain_config("smoothgrad");
  config["params"] = {{"n_samples", 3}};
  config["seed"] = 7;
  const auto original = cmd_explain(write_config(*root_, "smooth.json", config));
  ASSERT_EQ(original.exit_code, kExitOk) << original.message;
  const auto manifest = ExplanationManifest::read(original.run_dir / "manifest.json");

  const fs::path elsewhere = testing::scratch_dir("cli_replay");
  json replay = manifest.resolved_config();
  replay["out_dir"] = "replayed";
  const auto again = cmd_explain(write_config(elsewhere, "replay.json", replay));
  ASSERT_EQ(again.exit_code, kExitOk) << again.message;
  EXPECT_EQ(again.run_dir.filename(), original.run_dir.filename());
  const auto replayed = ExplanationManifest::read(again.run_dir / "manifest.json");
  EXPECT_EQ(replayed.run_config(), manifest.run_config());
  ASSERT_EQ(replayed.outputs().size(), manifest.outputs().size());
  for (std::size_t i = 0; i < manifest.outputs().size(); ++i) {
    EXPECT_EQ(replayed.outputs()[i], manifest.outputs()[i]);
  }
}

TEST_F(CliTest, OutputRootPrecedence) {
  json config = explain_config("saliency");
  config.erase("out_dir");
  const auto path = write_config(*root_, "precedence.json", config);
  const fs::path env_root = *root_ / "from_env";
  {
    ScopedEnv env("EXECG_OUT_DIR", env_root.string());
    const auto from_env = cmd_explain(path);
    ASSERT_EQ(from_env.exit_code, kExitOk) << from_env.message;
    EXPECT_EQ(from_env.run_dir.parent_path(), env_root);

    GlobalOptions flag;
    flag.out_dir = *root_ / "from_flag";
    const auto from_flag = cmd_explain(path, flag);
    ASSERT_EQ(from_flag.exit_code, kExitOk);
    EXPECT_EQ(from_flag.run_dir.parent_path(), *root_ / "from_flag");
  }
  config["out_dir"] = "from_config";
  ScopedEnv unset("EXECG_OUT_DIR", "");
  unsetenv("EXECG_OUT_DIR");
  const auto from_config = cmd_explain(write_config(*root_, "precedence2.json", config));
  ASSERT_EQ(from_config.exit_code, kExitOk);
  EXPECT_EQ(from_config.run_dir.parent_path(), *root_ / "from_config");
}

TEST_F(CliTest, ExitCodes) {
  json unknown_method = explain_config("lime");
  const auto bad_method = cmd_explain(write_config(*root_, "lime.json", unknown_method));
  EXPECT_EQ(bad_method.exit_code, kExitConfigInvalid);
  EXPECT_NE(bad_method.message.find("integrated_gradients"), std::string::npos);

  json unknown_key = explain_config("saliency");
  unknown_key["colour"] = "red";
  EXPECT_EQ(cmd_explain(write_config(*root_, "key.json", unknown_key)).exit_code,
            kExitConfigInvalid);

  json missing = explain_config("saliency");
  missing.erase("target");
  EXPECT_EQ(cmd_explain(write_config(*root_, "missing.json", missing)).exit_code,
            kExitConfigInvalid);

  EXPECT_EQ(cmd_explain(*root_ / "no-such-config.json").exit_code, kExitConfigInvalid);

  json no_model = explain_config("saliency");
  no_model["model"] = (*root_ / "absent.ckpt").string();
  EXPECT_EQ(cmd_explain(write_config(*root_, "nomodel.json", no_model)).exit_code,
            kExitModelLoadFailed);

  std::ofstream(*root_ / "garbage.ckpt") << "not a checkpoint";
  json garbage = explain_config("saliency");
  garbage["model"] = (*root_ / "garbage.ckpt").string();
  EXPECT_EQ(cmd_explain(write_config(*root_, "garbage.json", garbage)).exit_code,
            kExitModelLoadFailed);

  // A 3-lead input cannot go through a 12-lead model.
  save_ecg(testing::random_record(3, 500, 250, 1), *root_ / "three.bin",
           EcgFormat::kBinaryFloat32);
  json wrong_leads = explain_config("saliency");
  wrong_leads["inputs"] = {(*root_ / "three.bin").string()};
  const auto failed = cmd_explain(write_config(*root_, "leads.json", wrong_leads));
  EXPECT_EQ(failed.exit_code, kExitExplainerFailed);
  EXPECT_EQ(failed.message.rfind("explain: ", 0), 0u) << failed.message;

  json bad_param = explain_config("saliency");
  bad_param["params"] = {{"steps", 4}};
  EXPECT_EQ(cmd_explain(write_config(*root_, "param.json", bad_param)).exit_code,
            kExitConfigInvalid);
}

TEST_F(CliTest, CounterfactualExplain) {
  json config = explain_config("counterfactual");
  config["inputs"] = {record(0).string()};
  config["params"] = {{"max_steps", 5}, {"inversion_restarts", 1}, {"inversion_steps", 50}};
  const auto result = cmd_explain(write_config(*root_, "cf.json", config));
  ASSERT_EQ(result.exit_code, kExitOk) << result.message;
  for (const char* name : {"original_0.csv", "counterfactual_0.csv", "loss_trace_0.csv",
                           "summary_0.json", "overlay_0.svg"}) {
    EXPECT_TRUE(fs::exists(result.run_dir / name)) << name;
  }
  const json summary = json::parse(slurp(result.run_dir / "summary_0.json"));
  EXPECT_TRUE(summary.contains("cf_pred"));
  EXPECT_EQ(summary.at("target_value"), 1.0);
}

TEST_F(CliTest, ChartCommand) {
  json config = {{"input", record(2).string()}, {"title", "record 2"}, {"out_dir", "runs"}};
  const auto result = cmd_chart(write_config(*root_, "chart.json", config));
  ASSERT_EQ(result.exit_code, kExitOk) << result.message;
  EXPECT_TRUE(fs::exists(result.run_dir / "chart.svg"));

  config["style"] = {{"columns", 5}};
  EXPECT_EQ(cmd_chart(write_config(*root_, "chart5.json", config)).exit_code,
            kExitExplainerFailed);
  config["style"] = {{"speed", 50}};
  EXPECT_EQ(cmd_chart(write_config(*root_, "chart_bad.json", config)).exit_code,
            kExitConfigInvalid);
}

TEST_F(CliTest, TcavCommand) {
  const fs::path concepts = *root_ / "concepts";
  fs::create_directories(concepts / "af");
  fs::create_directories(concepts / "random");
  const synth::DatasetShape shape{12, 500, 250};
  const auto af = synth::make_concept_records(synth::ConceptKind::kAf, 10, 1, shape);
  const auto pool = synth::make_concept_records(synth::ConceptKind::kMixed, 14, 2, shape);
  for (std::size_t i = 0; i < af.size(); ++i) {
    save_ecg(af[i], concepts / "af" / ("a" + std::to_string(i) + ".bin"),
             EcgFormat::kBinaryFloat32);
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    save_ecg(pool[i], concepts / "random" / ("r" + std::to_string(i) + ".bin"),
             EcgFormat::kBinaryFloat32);
  }
  json config = {{"model", model().string()},
                 {"concept_dir", "concepts"},
                 {"inputs", {record(0).string(), record(1).string(), record(3).string()}},
                 {"target", 1},
                 {"layers", {"conv2", "conv3"}},
                 {"n_runs", 3},
                 {"out_dir", "runs"}};
  const auto result = cmd_tcav(write_config(*root_, "tcav.json", config));
  ASSERT_EQ(result.exit_code, kExitOk) << result.message;
  const TcavResult tcav = read_tcav_csv(result.run_dir / "tcav.csv");
  EXPECT_EQ(tcav.entries.size(), 2u);
  EXPECT_TRUE(fs::exists(result.run_dir / "tcav_heatmap.svg"));
  EXPECT_TRUE(fs::exists(result.run_dir / "tcav_ci.svg"));

  config["layers"] = {"conv9"};
  EXPECT_EQ(cmd_tcav(write_config(*root_, "tcav_bad.json", config)).exit_code,
            kExitConfigInvalid);
}

TEST_F(CliTest, CommandLineEntryPoint) {
  const auto path = write_config(*root_, "entry.json", explain_config("saliency"));
  std::string exe = "ecgx", sub = "explain", cfg = path.string(), flag = "--seed", seed = "3";
  char* argv[] = {exe.data(), sub.data(), cfg.data(), flag.data(), seed.data()};
  EXPECT_EQ(run(5, argv), kExitOk);

  std::string bogus = "--bogus";
  char* bad[] = {exe.data(), sub.data(), cfg.data(), bogus.data()};
  EXPECT_EQ(run(4, bad), kExitConfigInvalid);
  char* none[] = {exe.data()};
  EXPECT_EQ(run(1, none), kExitConfigInvalid);
}

TEST(ResolveConfigTest, DefaultsPathsAndOverrides) {
  json raw;
  raw["model"] = "m.ckpt";
  raw["inputs"] = json::array({"a.csv"});
  raw["method"] = "saliency";
  raw["target"] = 0;
  GlobalOptions options;
  options.seed = 9;
  const json resolved = resolve_config("explain", raw, "/data/cfg", options);
  EXPECT_EQ(resolved.at("model"), "/data/cfg/m.ckpt");
  EXPECT_EQ(resolved.at("inputs")[0], "/data/cfg/a.csv");
  EXPECT_EQ(resolved.at("seed"), 9);
  EXPECT_EQ(resolved.at("bin_size"), 25);
  EXPECT_EQ(resolved.at("params"), json::object());
  EXPECT_EQ(config_hash(resolved).size(), 16u);
  EXPECT_EQ(config_hash(resolved), config_hash(resolve_config("explain", raw, "/data/cfg", options)));
  options.seed = 10;
  EXPECT_NE(config_hash(resolved), config_hash(resolve_config("explain", raw, "/data/cfg", options)));

  options.param_overrides = {{"lambda_prox", 0.5}};
  EXPECT_EQ(resolve_config("explain", raw, "/data/cfg", options).at("params").at("lambda_prox"),
            0.5);
  EXPECT_THROW(resolve_config("explain", json::array(), "/", {}), Error);
}

}  // namespace
}  // namespace ecgx::cli
