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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ecgx/core/task.hpp"
#include "ecgx/nn/network.hpp"
#include "ecgx/tensor.hpp"
#include "json.hpp"

namespace ecgx {

// Maps the standardized (B, L, T) batch to the layout the inner model
// consumes. Carries its adjoint so input gradients flow back through it.
class InputAdapter {
 public:
  using Fn = std::function<Tensor(const Tensor&)>;

  InputAdapter(std::string name, Fn forward, Fn adjoint)
      : name_(std::move(name)),
        forward_(std::move(forward)),
        adjoint_(std::move(adjoint)) {}

  static InputAdapter identity();
  // (B, L, T) -> (B, T, L).
  static InputAdapter transpose();
  static InputAdapter from_name(const std::string& name);

  const std::string& name() const noexcept { return name_; }
  Tensor operator()(const Tensor& x) const { return forward_(x); }
  Tensor adjoint(const Tensor& g) const { return adjoint_(g); }

 private:
  std::string name_;
  Fn forward_;
  Fn adjoint_;
};

enum class OutputTransform { kIdentity, kSoftmax, kSigmoid };

std::string output_transform_name(OutputTransform t);
OutputTransform output_transform_from_name(const std::string& name);
// softmax for binary/multiclass, sigmoid for multilabel, identity for
// regression.
OutputTransform default_output_transform(const TaskType& task);

Tensor apply_output_transform(OutputTransform t, const Tensor& raw);
// Vector-Jacobian product of the transform at the point where it produced
// `output`.
Tensor output_transform_vjp(OutputTransform t, const Tensor& output,
                            const Tensor& grad_output);

// Which output a gradient is taken of: the postprocessed (probability or
// regression) value or the raw model output (logits).
enum class GradSpace { kPostprocessed, kRaw };

struct GradOptions {
  GradSpace space = GradSpace::kPostprocessed;
  nn::BackwardMode mode = nn::BackwardMode::kStandard;
};

struct FeatureCapture {
  std::string layer_name;
  Tensor activations;               // (B, C, T')
  std::optional<Tensor> gradients;  // same shape as activations
};

// Adapts a differentiable network to the standardized I/O convention:
// (B, L, T) in, (B, N) out with N fixed by the task, plus named-layer access
// to activations and gradients.
//
// Not reentrant: predict/backward/get_features share per-call capture
// buffers, which are cleared at the start of every call.
class WrappedModel {
 public:
  WrappedModel(nn::Network network, TaskType task,
               std::vector<std::string> layer_names = {},
               InputAdapter preprocess = InputAdapter::identity(),
               std::optional<OutputTransform> postprocess = std::nullopt);

  const TaskType& task() const noexcept { return task_; }
  const std::vector<std::string>& layer_names() const noexcept {
    return registry_;
  }
  const InputAdapter& input_adapter() const noexcept { return preprocess_; }
  OutputTransform output_transform() const noexcept { return postprocess_; }
  nn::Network& network() noexcept { return network_; }
  const nn::Network& network() const noexcept { return network_; }

  // Adds a named layer; rejected unless it yields a (B, C, T') activation.
  void register_layer(const std::string& name);

  // Free-form description (e.g. expected leads/rate) stored in checkpoints.
  const nlohmann::json& metadata() const noexcept { return metadata_; }
  void set_metadata(nlohmann::json metadata) { metadata_ = std::move(metadata); }
  const std::string& model_id() const noexcept { return model_id_; }
  void set_model_id(std::string id) { model_id_ = std::move(id); }

  Tensor preprocess(const Tensor& batch) const;
  Tensor postprocess(const Tensor& raw) const;

  // Raw inner-model output for a standardized batch.
  Tensor forward_raw(const Tensor& batch);

  // Standardized prediction: (B, N), or (B, 1) when `output_idx` is given.
  // With `requires_grad`, the call state is retained so backward() can
  // differentiate the returned value w.r.t. the batch.
  Tensor predict(const Tensor& batch,
                 std::optional<std::size_t> output_idx = std::nullopt,
                 bool requires_grad = false);

  // Gradient of <grad_output, prediction> w.r.t. the batch of the last
  // predict(requires_grad = true). grad_output has the shape of that
  // prediction. With GradSpace::kRaw the seed is applied to the raw output
  // columns instead of the postprocessed ones.
  Tensor backward(const Tensor& grad_output, GradOptions options = {});

  // d(sum_b output[b, target]) / d batch.
  Tensor input_gradient(const Tensor& batch, std::size_t target,
                        GradOptions options = {});

  // One capture per requested layer, in request order. Gradients are of
  // output[:, target].sum() in the requested space.
  std::vector<FeatureCapture> get_features(
      const Tensor& batch, const std::vector<std::string>& layer_names,
      std::size_t target, bool want_gradients, GradOptions options = {});

  bool has_rectifier() const { return network_.has_rectifier(); }

 private:
  void check_target(std::size_t target) const;
  Tensor run_network(const Tensor& model_input,
                     std::span<const std::string> capture);
  Tensor backward_from_output(const Tensor& grad_post, GradOptions options,
                              std::span<const std::string> capture,
                              bool to_input);

  nn::Network network_;
  TaskType task_;
  InputAdapter preprocess_;
  OutputTransform postprocess_;
  std::vector<std::string> registry_;
  nlohmann::json metadata_ = nlohmann::json::object();
  std::string model_id_ = "in-memory";

  // Per-call state for predict(requires_grad) -> backward().
  bool grad_ready_ = false;
  std::optional<std::size_t> grad_output_idx_;
  Tensor last_output_;
  Tensor::Shape last_input_shape_;
};

// Checkpoint: "EXCK", u32 header length, JSON header (task, adapters,
// registry, architecture, metadata), then every parameter as float64 LE.
void save_checkpoint(WrappedModel& model, const std::filesystem::path& path);
WrappedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace ecgx
