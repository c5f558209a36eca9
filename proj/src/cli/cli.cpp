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

#include "ecgx/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "ecgx/attribution/attribution.hpp"
#include "ecgx/core/hash.hpp"
#include "ecgx/core/io.hpp"
#include "ecgx/core/run_config.hpp"
#include "ecgx/counterfactual/counterfactual.hpp"
#include "ecgx/error.hpp"
#include "ecgx/synth/synth.hpp"
#include "ecgx/tcav/tcav.hpp"
#include "ecgx/viz/viz.hpp"

namespace ecgx::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Failure tagged with its exit code and the stage that raised it.
struct CommandFailure {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
  throw CommandFailure{code, message};
}

enum class Kind { kString, kPath, kPathList, kStringList, kUint, kNumber, kBool, kObject };

struct Field {
  std::string name;
  Kind kind;
  bool required = false;
  json fallback = nullptr;  // null: optional without default
};

const std::vector<Field>& schema(const std::string& command) {
  static const std::map<std::string, std::vector<Field>> schemas{
      {"explain",
       {{"model", Kind::kPath, true},
        {"inputs", Kind::kPathList, true},
        {"method", Kind::kString, true},
        {"target", Kind::kUint, true},
        {"params", Kind::kObject, false, json::object()},
        {"seed", Kind::kUint, false, 0},
        {"bin_size", Kind::kUint, false, 25},
        {"lead", Kind::kUint, false, 1}}},
      {"chart",
       {{"input", Kind::kPath, true},
        {"cf", Kind::kPath},
        {"attribution", Kind::kPath},
        {"tcav_csv", Kind::kPath},
        {"bin_size", Kind::kUint, false, 25},
        {"show_calibration", Kind::kBool, false, true},
        {"title", Kind::kString, false, ""},
        {"style", Kind::kObject, false, json::object()},
        {"seed", Kind::kUint, false, 0}}},
      {"synth",
       {{"n_per_class", Kind::kUint, false, 150},
        {"dataset_seed", Kind::kUint, false, 42},
        {"seed", Kind::kUint, false, 1},
        {"epochs", Kind::kUint, false, 8},
        {"batch_size", Kind::kUint, false, 16},
        {"learning_rate", Kind::kNumber, false, 3e-3},
        {"weight_decay", Kind::kNumber, false, 1e-4},
        {"label_smoothing", Kind::kNumber, false, 0.02},
        {"leads", Kind::kUint, false, 12},
        {"samples", Kind::kUint, false, 2500},
        {"rate", Kind::kUint, false, 250}}},
      {"tcav",
       {{"model", Kind::kPath, true},
        {"concept_dir", Kind::kPath, true},
        {"inputs", Kind::kPathList, true},
        {"layers", Kind::kStringList, false, json::array({"conv3"})},
        {"target", Kind::kUint, true},
        {"n_runs", Kind::kUint, false, 10},
        {"alpha", Kind::kNumber, false, 0.05},
        {"random_set_size", Kind::kUint, false, 0},
        {"input_duration", Kind::kNumber},
        {"pool_time", Kind::kBool, false, false},
        {"seed", Kind::kUint, false, 0}}},
  };
  const auto it = schemas.find(command);
  if (it == schemas.end()) {
    throw Error(ErrorCode::kConfigInvalid, "unknown command '" + command + "'");
  }
  return it->second;
}

bool kind_matches(Kind kind, const json& v) {
  auto all = [&](auto pred) {
    return v.is_array() && std::all_of(v.begin(), v.end(), pred);
  };
  switch (kind) {
    case Kind::kString:
    case Kind::kPath: return v.is_string();
    case Kind::kPathList:
    case Kind::kStringList:
      return all([](const json& e) { return e.is_string(); });
    case Kind::kUint: return v.is_number_integer() && v.get<std::int64_t>() >= 0;
    case Kind::kNumber: return v.is_number();
    case Kind::kBool: return v.is_boolean();
    case Kind::kObject: return v.is_object();
  }
  return false;
}

std::string resolve_path(const std::string& p, const fs::path& base) {
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return fs::absolute(path).lexically_normal().string();
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(kExitConfigInvalid, "config: cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(kExitConfigInvalid, "config: " + path.string() + ": " + e.what());
  }
}

// Flag and environment paths are taken relative to the working directory,
// a config "out_dir" relative to the config file.
fs::path output_root(const json& raw, const fs::path& base,
                     const GlobalOptions& options) {
  if (options.out_dir) return *options.out_dir;
  if (const char* env = std::getenv("EXECG_OUT_DIR"); env && *env) return env;
  if (raw.contains("out_dir")) {
    if (!raw["out_dir"].is_string()) fail(kExitConfigInvalid, "config: out_dir must be a string");
    return base / raw["out_dir"].get<std::string>();
  }
  return "runs";
}

struct Run {
  json config;
  fs::path dir;
  ExplanationManifest manifest{RunConfig{}};
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  fs::path file(const std::string& name) const { return dir / name; }
  void record(const std::string& kind, const std::string& name) {
    manifest.add_output(kind, dir, file(name));
  }
  void finish() {
    manifest.set_resolved_config(config);
    manifest.set_wall_time(std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count());
    manifest.write(file("manifest.json"));
  }
};

Run open_run(const std::string& command, const fs::path& config_path,
             const GlobalOptions& options) {
  const json raw = read_json(config_path);
  Run run;
  try {
    run.config = resolve_config(command, raw, config_path.parent_path(), options);
  } catch (const Error& e) {
    fail(kExitConfigInvalid, e.what());
  }
  run.dir = output_root(raw, config_path.parent_path(), options) /
            (command + "-" + config_hash(run.config));
  return run;
}

void create_run_dir(const Run& run) {
  std::error_code ec;
  fs::create_directories(run.dir, ec);
  if (ec) fail(kExitExplainerFailed, "setup: cannot create " + run.dir.string());
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) {
    fail(kExitConfigInvalid, "config: " + what + " not found: " + path);
  }
}

EcgRecord load_record(const std::string& path) {
  require_file(path, "input");
  const auto format = format_from_extension(path);
  if (!format) fail(kExitConfigInvalid, "config: unsupported input format: " + path);
  try {
    return load_ecg(path, *format);
  } catch (const Error& e) {
    fail(kExitConfigInvalid, std::string("config: input ") + path + ": " + e.what());
  }
}

WrappedModel load_model(const std::string& path) {
  try {
    return load_checkpoint(path);
  } catch (const std::exception& e) {
    fail(kExitModelLoadFailed, std::string("model: ") + e.what());
  }
}

std::vector<EcgRecord> load_inputs(const json& paths) {
  std::vector<EcgRecord> records;
  for (const auto& p : paths) records.push_back(load_record(p.get<std::string>()));
  return records;
}

std::string combined_fingerprint(const std::vector<EcgRecord>& records) {
  if (records.size() == 1) return fingerprint(records.front());
  std::string all;
  for (const auto& r : records) all += fingerprint(r);
  return sha256_hex(all);
}

// Runs `body` with library errors mapped to `stage`; parameter errors count
// as configuration problems.
template <typename Fn>
auto stage(const std::string& name, Fn&& body) {
  try {
    return body();
  } catch (const CommandFailure&) {
    throw;
  } catch (const Error& e) {
    const bool config = e.code() == ErrorCode::kInvalidParams ||
                        e.code() == ErrorCode::kUnknownLayer ||
                        e.code() == ErrorCode::kConfigInvalid;
    fail(config ? kExitConfigInvalid : kExitExplainerFailed,
         name + ": " + e.what());
  } catch (const std::exception& e) {
    fail(kExitExplainerFailed, name + ": " + e.what());
  }
}

const std::vector<std::string> kCounterfactualParams{
    "target_value", "lambda_prox", "max_steps",        "tol",
    "step_size",    "patience",    "inversion_restarts", "inversion_steps",
    "inversion_lr", "latent_dim"};

CounterfactualOptions counterfactual_options(const json& params,
                                             std::uint64_t seed) {
  for (const auto& [key, value] : params.items()) {
    if (std::find(kCounterfactualParams.begin(), kCounterfactualParams.end(),
                  key) == kCounterfactualParams.end()) {
      fail(kExitConfigInvalid, "config: unknown counterfactual param '" + key + "'");
    }
    if (!value.is_number()) {
      fail(kExitConfigInvalid, "config: counterfactual param '" + key + "' must be a number");
    }
  }
  CounterfactualOptions o;
  o.inversion.seed = seed;
  o.target_value = params.value("target_value", o.target_value);
  o.lambda_prox = params.value("lambda_prox", o.lambda_prox);
  o.max_steps = params.value("max_steps", o.max_steps);
  o.tol = params.value("tol", o.tol);
  o.step_size = params.value("step_size", o.step_size);
  o.patience = params.value("patience", o.patience);
  o.inversion.restarts = params.value("inversion_restarts", o.inversion.restarts);
  o.inversion.steps = params.value("inversion_steps", o.inversion.steps);
  o.inversion.learning_rate = params.value("inversion_lr", o.inversion.learning_rate);
  return o;
}

std::vector<std::string> explain_methods() {
  auto names = attribution_methods();
  names.push_back("counterfactual");
  return names;
}

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

template <typename Body>
CommandResult guarded(Body&& body) {
  CommandResult result;
  try {
    body(result);
  } catch (const CommandFailure& f) {
    result.exit_code = f.code;
    result.message = f.message;
  } catch (const std::exception& e) {
    result.exit_code = kExitExplainerFailed;
    result.message = std::string("internal: ") + e.what();
  }
  return result;
}

viz::ChartStyle chart_style(const json& style) {
  viz::ChartStyle s;
  for (const auto& [key, value] : style.items()) {
    const bool text = key == "cf_color" || key == "attribution_cmap";
    const bool known = text || key == "paper_speed" || key == "gain" ||
                       key == "columns" || key == "row_height_mv" ||
                       key == "cf_alpha";
    if (!known) fail(kExitConfigInvalid, "config: unknown style key '" + key + "'");
    if (text ? !value.is_string() : !value.is_number()) {
      fail(kExitConfigInvalid, "config: style key '" + key + "' has the wrong type");
    }
  }
  s.paper_speed = style.value("paper_speed", s.paper_speed);
  s.gain = style.value("gain", s.gain);
  s.columns = style.value("columns", s.columns);
  s.row_height_mv = style.value("row_height_mv", s.row_height_mv);
  s.cf_alpha = style.value("cf_alpha", s.cf_alpha);
  s.cf_color = style.value("cf_color", s.cf_color);
  s.attribution_cmap = style.value("attribution_cmap", s.attribution_cmap);
  try {
    s.validate();
  } catch (const Error& e) {
    fail(kExitConfigInvalid, std::string("config: style: ") + e.what());
  }
  return s;
}

}  // namespace

json resolve_config(const std::string& command, const json& raw,
                    const fs::path& base, const GlobalOptions& options) {
  if (!raw.is_object()) {
    throw Error(ErrorCode::kConfigInvalid, "config must be a JSON object");
  }
  const auto& fields = schema(command);
  for (const auto& [key, value] : raw.items()) {
    if (key == "out_dir") continue;
    const bool known = std::any_of(fields.begin(), fields.end(),
                                   [&](const Field& f) { return f.name == key; });
    if (!known) {
      throw Error(ErrorCode::kConfigInvalid,
                  "unknown key '" + key + "' for command " + command);
    }
  }
  json resolved = json::object();
  for (const Field& f : fields) {
    if (!raw.contains(f.name)) {
      if (f.required) {
        throw Error(ErrorCode::kConfigInvalid, "missing required key '" + f.name + "'");
      }
      if (!f.fallback.is_null()) resolved[f.name] = f.fallback;
      continue;
    }
    const json& v = raw.at(f.name);
    if (!kind_matches(f.kind, v)) {
      throw Error(ErrorCode::kConfigInvalid, "key '" + f.name + "' has the wrong type");
    }
    if (f.kind == Kind::kPath) {
      resolved[f.name] = resolve_path(v.get<std::string>(), base);
    } else if (f.kind == Kind::kPathList) {
      if (v.empty()) {
        throw Error(ErrorCode::kConfigInvalid, "'" + f.name + "' must not be empty");
      }
      json list = json::array();
      for (const auto& p : v) list.push_back(resolve_path(p.get<std::string>(), base));
      resolved[f.name] = list;
    } else {
      resolved[f.name] = v;
    }
  }
  if (options.seed) resolved["seed"] = *options.seed;
  if (!options.param_overrides.empty()) {
    if (!resolved.contains("params")) {
      throw Error(ErrorCode::kConfigInvalid,
                  "command " + command + " takes no method parameters");
    }
    resolved["params"].update(options.param_overrides);
  }
  return resolved;
}

std::string config_hash(const json& resolved) {
  return sha256_hex(resolved.dump()).substr(0, 16);
}

CommandResult cmd_explain(const fs::path& config_path, const GlobalOptions& options) {
  return guarded([&](CommandResult& result) {
    Run run = open_run("explain", config_path, options);
    const json& cfg = run.config;
    const std::string method = cfg["method"];
    const auto methods = explain_methods();
    if (std::find(methods.begin(), methods.end(), method) == methods.end()) {
      fail(kExitConfigInvalid, "config: unknown method '" + method +
                                   "'; valid methods: " + joined(methods));
    }
    const std::vector<EcgRecord> inputs = load_inputs(cfg["inputs"]);
    const std::uint64_t seed = cfg["seed"];
    const std::size_t target = cfg["target"];
    const json& params = cfg["params"];
    std::optional<CounterfactualOptions> cf_options;
    if (method == "counterfactual") cf_options = counterfactual_options(params, seed);

    WrappedModel model = load_model(cfg["model"]);
    create_run_dir(run);
    result.run_dir = run.dir;
    run.manifest = ExplanationManifest(
        {seed, method, params, model.model_id(), combined_fingerprint(inputs)});

    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const std::string tag = std::to_string(i);
      const EcgRecord& record = inputs[i];
      if (cf_options) {
        const auto generator = synth::toy_generator(params.value("latent_dim", 8));
        const CounterfactualResult cf = stage("explain", [&] {
          return explain_cf(model, generator, record, target, *cf_options);
        });
        stage("write", [&] {
          save_ecg(cf.original, run.file("original_" + tag + ".csv"), EcgFormat::kCsv);
          run.record("original", "original_" + tag + ".csv");
          save_ecg(cf.counterfactual, run.file("counterfactual_" + tag + ".csv"),
                   EcgFormat::kCsv);
          run.record("counterfactual", "counterfactual_" + tag + ".csv");
          write_loss_trace(cf, run.file("loss_trace_" + tag + ".csv"));
          run.record("loss_trace", "loss_trace_" + tag + ".csv");
          json summary = {{"original_pred", cf.original_pred},
                          {"cf_pred", cf.cf_pred},
                          {"target_value", cf.target_value},
                          {"inversion_mse", cf.inversion_mse},
                          {"converged", cf.converged},
                          {"stop_reason", cf.stop_reason},
                          {"z_init", cf.z_init},
                          {"z_final", cf.z_final}};
          std::ofstream(run.file("summary_" + tag + ".json")) << summary.dump(2) << "\n";
          run.record("summary", "summary_" + tag + ".json");
        });
        stage("render", [&] {
          viz::plot_counterfactual_overlay(cf.original, cf.counterfactual,
                                           cfg["lead"], cf.original_pred,
                                           cf.cf_pred, run.file("overlay_" + tag + ".svg"));
          run.record("overlay_plot", "overlay_" + tag + ".svg");
        });
        continue;
      }
      const AttributionResult attribution = stage("explain", [&] {
        return explain(model, record, method, target, params, seed);
      });
      stage("write", [&] {
        save_array_f32(attribution.scores, run.file("attribution_" + tag + ".bin"),
                       record.sampling_rate());
        run.record("attribution", "attribution_" + tag + ".bin");
      });
      stage("render", [&] {
        const std::size_t lead = cfg["lead"];
        viz::plot_attribution(record, attribution,
                              cfg["bin_size"].get<std::int64_t>(),
                              run.file("attribution_" + tag + ".svg"),
                              attribution.scores.rank() == 2
                                  ? std::optional<std::size_t>(lead)
                                  : std::nullopt);
        run.record("attribution_plot", "attribution_" + tag + ".svg");
      });
    }
    stage("write", [&] { run.finish(); });
    result.message = "wrote " + run.dir.string();
  });
}

CommandResult cmd_chart(const fs::path& config_path, const GlobalOptions& options) {
  return guarded([&](CommandResult& result) {
    Run run = open_run("chart", config_path, options);
    const json& cfg = run.config;
    viz::ChartOptions chart;
    chart.style = chart_style(cfg["style"]);
    chart.show_calibration = cfg["show_calibration"];
    chart.title = cfg["title"];
    chart.attribution_bin_size = cfg["bin_size"].get<std::int64_t>();
    const EcgRecord record = load_record(cfg["input"]);
    if (cfg.contains("cf")) chart.cf_ecg = load_record(cfg["cf"]);
    if (cfg.contains("attribution")) {
      require_file(cfg["attribution"], "attribution");
      AttributionResult a;
      a.scores = stage("config", [&] { return load_array_f32(cfg["attribution"].get<std::string>()); });
      if (a.scores.rank() == 2 && a.scores.dim(0) == 1) {
        a.scores = a.scores.reshaped({a.scores.dim(1)});
      }
      a.method = "file";
      chart.attribution = std::move(a);
    }
    if (cfg.contains("tcav_csv")) {
      require_file(cfg["tcav_csv"], "tcav_csv");
      chart.tcav = stage("config", [&] { return read_tcav_csv(cfg["tcav_csv"].get<std::string>()); });
    }
    create_run_dir(run);
    result.run_dir = run.dir;
    run.manifest = ExplanationManifest(
        {cfg["seed"], "chart", cfg["style"], "none", fingerprint(record)});
    stage("render", [&] {
      viz::plot_ecg_chart(record, chart, run.file("chart.svg"));
      run.record("chart", "chart.svg");
    });
    stage("write", [&] { run.finish(); });
    result.message = "wrote " + run.file("chart.svg").string();
  });
}

CommandResult cmd_synth(const fs::path& config_path, const GlobalOptions& options) {
  return guarded([&](CommandResult& result) {
    Run run = open_run("synth", config_path, options);
    const json& cfg = run.config;
    synth::TrainOptions train;
    train.epochs = cfg["epochs"];
    train.batch_size = cfg["batch_size"];
    train.learning_rate = cfg["learning_rate"];
    train.weight_decay = cfg["weight_decay"];
    train.label_smoothing = cfg["label_smoothing"];
    train.seed = cfg["seed"];
    const synth::DatasetShape shape{cfg["leads"], cfg["samples"], cfg["rate"]};
    const std::size_t n_per_class = cfg["n_per_class"];
    if (n_per_class < 1) fail(kExitConfigInvalid, "config: n_per_class must be >= 1");
    create_run_dir(run);
    result.run_dir = run.dir;

    const auto dataset = stage("synth", [&] {
      return synth::make_af_dataset(n_per_class, cfg["dataset_seed"], shape);
    });
    auto model = stage("synth", [&] {
      return synth::make_reference_model(TaskType::binary(), shape.leads, train.seed);
    });
    const auto report = stage("train", [&] {
      return synth::train_reference_model(model, dataset, train);
    });
    stage("write", [&] {
      save_checkpoint(model, run.file("model.ckpt"));
      run.manifest = ExplanationManifest({train.seed, "synth", cfg,
                                          sha256_file(run.file("model.ckpt")),
                                          "synthetic"});
      run.record("checkpoint", "model.ckpt");
      synth::save_dataset(dataset, run.file("dataset"));
      run.record("labels", "dataset/labels.csv");
      json r = {{"epoch_loss", report.epoch_loss},
                {"val_accuracy", report.val_accuracy},
                {"test_accuracy", report.test_accuracy}};
      std::ofstream(run.file("training.json")) << r.dump(2) << "\n";
      run.record("training_report", "training.json");
    });
    char acc[64];
    std::snprintf(acc, sizeof(acc), "test accuracy %.4f", report.test_accuracy);
    run.manifest.add_note(acc);
    stage("write", [&] { run.finish(); });
    result.message = std::string("wrote ") + run.dir.string() + " (" + acc + ")";
  });
}

CommandResult cmd_tcav(const fs::path& config_path, const GlobalOptions& options) {
  return guarded([&](CommandResult& result) {
    Run run = open_run("tcav", config_path, options);
    const json& cfg = run.config;
    const std::string concept_dir = cfg["concept_dir"];
    if (!fs::is_directory(concept_dir)) {
      fail(kExitConfigInvalid, "config: concept_dir not found: " + concept_dir);
    }
    const auto inputs = load_inputs(cfg["inputs"]);
    std::vector<EcgRecord> random_pool;
    const auto concepts = stage("config", [&] {
      return load_concept_directory(concept_dir, random_pool);
    });
    TcavOptions opts;
    opts.n_runs = cfg["n_runs"];
    opts.alpha = cfg["alpha"];
    opts.seed = cfg["seed"];
    opts.random_set_size = cfg["random_set_size"];
    opts.cav.pool_time = cfg["pool_time"];
    if (cfg.contains("input_duration")) opts.input_duration_s = cfg["input_duration"].get<double>();
    const auto layers = cfg["layers"].get<std::vector<std::string>>();

    WrappedModel model = load_model(cfg["model"]);
    create_run_dir(run);
    result.run_dir = run.dir;
    run.manifest = ExplanationManifest(
        {opts.seed, "tcav", cfg, model.model_id(), combined_fingerprint(inputs)});
    const TcavResult tcav = stage("explain", [&] {
      return run_tcav(model, layers, concepts, random_pool, inputs, cfg["target"], opts);
    });
    for (const auto& note : tcav.notes) run.manifest.add_note(note);
    stage("write", [&] {
      write_tcav_csv(tcav, run.file("tcav.csv"));
      run.record("tcav_scores", "tcav.csv");
    });
    stage("render", [&] {
      viz::plot_tcav(tcav, layers, run.file("tcav_heatmap.svg"), run.file("tcav_ci.svg"));
      run.record("tcav_heatmap", "tcav_heatmap.svg");
      run.record("tcav_ci", "tcav_ci.svg");
    });
    stage("write", [&] { run.finish(); });
    result.message = "wrote " + run.dir.string();
  });
}

int run(int argc, char** argv) {
  CLI::App app{"ECG explainability toolkit"};
  app.require_subcommand(1);
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::string config;
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out-dir", out_dir, "Output root (overrides EXECG_OUT_DIR)");
  app.add_option("--config", config, "JSON config file");

  using Command = std::function<CommandResult(const fs::path&, const GlobalOptions&)>;
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"explain", "Run an attribution or counterfactual explainer", cmd_explain},
      {"chart", "Render a 12-lead chart with overlays", cmd_chart},
      {"synth", "Build the synthetic dataset and reference model", cmd_synth},
      {"tcav", "Concept sensitivity scores", cmd_tcav}};
  std::optional<double> lambda_prox, tol;
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("config", config, "JSON config file");
    if (name == "explain") {
      sub->add_option("--lambda-prox", lambda_prox, "Counterfactual proximity weight");
      sub->add_option("--tol", tol, "Counterfactual target tolerance");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigInvalid;
  }
  if (config.empty()) {
    std::cerr << "error: a config file is required (--config)\n";
    return kExitConfigInvalid;
  }
  GlobalOptions options{seed, out_dir ? std::optional<fs::path>(*out_dir) : std::nullopt};
  if (lambda_prox) options.param_overrides["lambda_prox"] = *lambda_prox;
  if (tol) options.param_overrides["tol"] = *tol;
  for (const auto& [name, help, fn] : commands) {
    if (!app.got_subcommand(name)) continue;
    const CommandResult r = fn(config, options);
    (r.exit_code == kExitOk ? std::cout : std::cerr) << r.message << "\n";
    return r.exit_code;
  }
  return kExitConfigInvalid;
}

}  // namespace ecgx::cli
