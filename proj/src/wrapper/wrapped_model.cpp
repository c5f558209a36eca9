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

#include "ecgx/wrapper/wrapped_model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ecgx/error.hpp"

namespace ecgx {

InputAdapter InputAdapter::identity() {
  auto same = [](const Tensor& x) { return x; };
  return InputAdapter("identity", same, same);
}

InputAdapter InputAdapter::transpose() {
  return InputAdapter("transpose", nn::transpose12, nn::transpose12);
}

InputAdapter InputAdapter::from_name(const std::string& name) {
  if (name == "identity") return identity();
  if (name == "transpose") return transpose();
  throw Error(ErrorCode::kInvalidArgument,
              "unknown input adapter '" + name + "'");
}

std::string output_transform_name(OutputTransform t) {
  switch (t) {
    case OutputTransform::kIdentity: return "identity";
    case OutputTransform::kSoftmax: return "softmax";
    case OutputTransform::kSigmoid: return "sigmoid";
  }
  return "identity";
}

OutputTransform output_transform_from_name(const std::string& name) {
  if (name == "identity") return OutputTransform::kIdentity;
  if (name == "softmax") return OutputTransform::kSoftmax;
  if (name == "sigmoid") return OutputTransform::kSigmoid;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown output transform '" + name + "'");
}

OutputTransform default_output_transform(const TaskType& task) {
  switch (task.kind()) {
    case TaskKind::kBinaryClassification:
    case TaskKind::kMulticlassClassification:
      return OutputTransform::kSoftmax;
    case TaskKind::kMultilabelClassification:
      return OutputTransform::kSigmoid;
    case TaskKind::kRegression:
      return OutputTransform::kIdentity;
  }
  return OutputTransform::kIdentity;
}

Tensor apply_output_transform(OutputTransform t, const Tensor& raw) {
  Tensor out = raw;
  switch (t) {
    case OutputTransform::kIdentity:
      break;
    case OutputTransform::kSigmoid:
      for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
      break;
    case OutputTransform::kSoftmax: {
      const std::size_t n = raw.dim(1);
      for (std::size_t b = 0; b < raw.dim(0); ++b) {
        double* row = out.data() + b * n;
        const double top = *std::max_element(row, row + n);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          row[j] = std::exp(row[j] - top);
          total += row[j];
        }
        for (std::size_t j = 0; j < n; ++j) row[j] /= total;
      }
      break;
    }
  }
  return out;
}

Tensor output_transform_vjp(OutputTransform t, const Tensor& output,
                            const Tensor& grad_output) {
  Tensor g = grad_output;
  switch (t) {
    case OutputTransform::kIdentity:
      break;
    case OutputTransform::kSigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] *= output[i] * (1.0 - output[i]);
      }
      break;
    case OutputTransform::kSoftmax: {
      const std::size_t n = output.dim(1);
      for (std::size_t b = 0; b < output.dim(0); ++b) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          dot += grad_output.at(b, j) * output.at(b, j);
        }
        for (std::size_t j = 0; j < n; ++j) {
          g.at(b, j) = output.at(b, j) * (grad_output.at(b, j) - dot);
        }
      }
      break;
    }
  }
  return g;
}

WrappedModel::WrappedModel(nn::Network network, TaskType task,
                           std::vector<std::string> layer_names,
                           InputAdapter preprocess,
                           std::optional<OutputTransform> postprocess)
    : network_(std::move(network)),
      task_(task),
      preprocess_(std::move(preprocess)),
      postprocess_(postprocess.value_or(default_output_transform(task))) {
  for (const auto& name : layer_names) register_layer(name);
}

void WrappedModel::register_layer(const std::string& name) {
  if (std::find(registry_.begin(), registry_.end(), name) != registry_.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "layer '" + name + "' registered twice");
  }
  // Adapters keep rank 3, so the network sees a rank-3 input.
  const std::size_t rank = network_.output_rank_of(name, 3);
  if (rank != 3) {
    throw Error(ErrorCode::kLayerRankMismatch,
                "layer '" + name + "' produces rank-" + std::to_string(rank) +
                    " activations; (B, C, T') required");
  }
  registry_.push_back(name);
}

Tensor WrappedModel::preprocess(const Tensor& batch) const {
  if (batch.rank() != 3) {
    throw Error(ErrorCode::kShapeMismatch,
                "standardized input is (B, L, T), got " +
                    shape_string(batch.shape()));
  }
  if (!batch.all_finite()) {
    throw Error(ErrorCode::kNonFiniteValues, "input batch has NaN/Inf");
  }
  return preprocess_(batch);
}

Tensor WrappedModel::postprocess(const Tensor& raw) const {
  if (raw.rank() != 2 || raw.dim(1) != task_.num_outputs()) {
    throw Error(ErrorCode::kShapeMismatch,
                "raw output " + shape_string(raw.shape()) + " does not match " +
                    std::string(task_kind_name(task_.kind())) + " with N = " +
                    std::to_string(task_.num_outputs()));
  }
  return apply_output_transform(postprocess_, raw);
}

void WrappedModel::check_target(std::size_t target) const {
  if (target >= task_.num_outputs()) {
    throw Error(ErrorCode::kOutputIdxOutOfRange,
                "output index " + std::to_string(target) + " not in [0, " +
                    std::to_string(task_.num_outputs()) + ")");
  }
}

Tensor WrappedModel::run_network(const Tensor& model_input,
                                 std::span<const std::string> capture) {
  try {
    return network_.forward(model_input, capture);
  } catch (const Error& e) {
    throw Error(ErrorCode::kModelForwardFailure,
                std::string("inner model forward failed: ") + e.what());
  }
}

Tensor WrappedModel::forward_raw(const Tensor& batch) {
  grad_ready_ = false;
  network_.clear_captures();
  return run_network(preprocess(batch), {});
}

Tensor WrappedModel::predict(const Tensor& batch,
                             std::optional<std::size_t> output_idx,
                             bool requires_grad) {
  if (output_idx) check_target(*output_idx);
  Tensor output = postprocess(forward_raw(batch));
  if (requires_grad) {
    grad_ready_ = true;
    grad_output_idx_ = output_idx;
    last_output_ = output;
    last_input_shape_ = batch.shape();
  }
  if (!output_idx) return output;
  Tensor column({output.dim(0), 1});
  for (std::size_t b = 0; b < output.dim(0); ++b) {
    column.at(b, 0) = output.at(b, *output_idx);
  }
  return column;
}

Tensor WrappedModel::backward_from_output(const Tensor& grad_post,
                                          GradOptions options,
                                          std::span<const std::string> capture,
                                          bool to_input) {
  const Tensor grad_raw =
      options.space == GradSpace::kRaw
          ? grad_post
          : output_transform_vjp(postprocess_, last_output_, grad_post);
  Tensor g = network_.backward(grad_raw, options.mode, capture, to_input);
  if (!to_input) return g;
  return preprocess_.adjoint(g);
}

Tensor WrappedModel::backward(const Tensor& grad_output, GradOptions options) {
  if (!grad_ready_) {
    throw Error(ErrorCode::kGradientUnavailable,
                "backward() needs a preceding predict(requires_grad = true)");
  }
  const std::size_t batch = last_output_.dim(0);
  const std::size_t n = last_output_.dim(1);
  Tensor seed({batch, n});
  if (grad_output_idx_) {
    if (grad_output.shape() != Tensor::Shape{batch, 1}) {
      throw Error(ErrorCode::kShapeMismatch, "gradient seed must be (B, 1)");
    }
    for (std::size_t b = 0; b < batch; ++b) {
      seed.at(b, *grad_output_idx_) = grad_output.at(b, 0);
    }
  } else {
    if (grad_output.shape() != seed.shape()) {
      throw Error(ErrorCode::kShapeMismatch, "gradient seed must be (B, N)");
    }
    seed = grad_output;
  }
  Tensor g = backward_from_output(seed, options, {}, true);
  grad_ready_ = false;
  return g;
}

Tensor WrappedModel::input_gradient(const Tensor& batch, std::size_t target,
                                    GradOptions options) {
  const Tensor out = predict(batch, target, true);
  return backward(Tensor(out.shape(), 1.0), options);
}

std::vector<FeatureCapture> WrappedModel::get_features(
    const Tensor& batch, const std::vector<std::string>& layer_names,
    std::size_t target, bool want_gradients, GradOptions options) {
  for (const auto& name : layer_names) {
    if (std::find(registry_.begin(), registry_.end(), name) ==
        registry_.end()) {
      throw Error(ErrorCode::kUnknownLayer,
                  "layer '" + name + "' is not registered");
    }
  }
  check_target(target);
  grad_ready_ = false;
  network_.clear_captures();
  const Tensor raw = run_network(preprocess(batch), layer_names);
  last_output_ = postprocess(raw);

  std::vector<FeatureCapture> captures;
  for (const auto& name : layer_names) {
    captures.push_back({name, network_.captured_activation(name), std::nullopt});
  }
  if (want_gradients) {
    Tensor seed(last_output_.shape());
    for (std::size_t b = 0; b < seed.dim(0); ++b) seed.at(b, target) = 1.0;
    try {
      backward_from_output(seed, options, layer_names, false);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kGradientUnavailable) throw;
      throw Error(ErrorCode::kGradientUnavailable, e.what());
    }
    for (auto& capture : captures) {
      capture.gradients = network_.captured_gradient(capture.layer_name);
    }
  }
  network_.clear_captures();
  return captures;
}

}  // namespace ecgx
