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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecgx/nn/layer.hpp"

namespace ecgx::nn {

// A sequential stack of layers with optional capture of the output (and of
// the gradient w.r.t. the output) of named top-level layers.
class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    add(std::move(layer));
    return ref;
  }
  void add(std::unique_ptr<Layer> layer);

  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }
  std::optional<std::size_t> find(const std::string& name) const;

  // Rank of the named layer's output for an input of the given rank.
  std::size_t output_rank_of(const std::string& name,
                             std::size_t input_rank) const;

  // Runs all layers; stores the outputs of `capture` layers.
  Tensor forward(const Tensor& x, std::span<const std::string> capture = {});

  // Runs layers after `name` on a replacement for that layer's output.
  Tensor forward_from(const std::string& name, const Tensor& activation);

  // Backpropagates `grad_out` (w.r.t. the network output) to the input and
  // stores gradients w.r.t. the outputs of `capture` layers. Must follow a
  // forward() on the same input. With `to_input` false the pass stops once
  // every captured gradient is recorded and an empty tensor is returned.
  Tensor backward(const Tensor& grad_out, BackwardMode mode,
                  std::span<const std::string> capture = {},
                  bool to_input = true);

  const Tensor& captured_activation(const std::string& name) const;
  const Tensor& captured_gradient(const std::string& name) const;
  void clear_captures();

  std::vector<Parameter> parameters();
  std::size_t num_parameters();
  void set_param_grads(bool enabled);
  void zero_grads();

  bool has_rectifier() const;
  bool differentiable() const;

  nlohmann::json architecture() const;
  static Network from_architecture(const nlohmann::json& layers);

  // Flat copy of every parameter in `parameters()` order.
  std::vector<double> flat_parameters();
  void set_flat_parameters(std::span<const double> values);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  std::map<std::string, Tensor> activations_;
  std::map<std::string, Tensor> gradients_;
};

}  // namespace ecgx::nn
