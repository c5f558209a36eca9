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

#include "ecgx/nn/network.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "ecgx/error.hpp"

namespace ecgx::nn {
namespace {

bool contains(std::span<const std::string> names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace

Network::Network(const Network& other) {
  for (const auto& layer : other.layers_) layers_.push_back(layer->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Network::add(std::unique_ptr<Layer> layer) {
  if (find(layer->name())) {
    throw Error(ErrorCode::kInvalidArgument,
                "duplicate layer name '" + layer->name() + "'");
  }
  layers_.push_back(std::move(layer));
}

std::optional<std::size_t> Network::find(const std::string& name) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i]->name() == name) return i;
  }
  return std::nullopt;
}

std::size_t Network::output_rank_of(const std::string& name,
                                    std::size_t input_rank) const {
  const auto index = find(name);
  if (!index) {
    throw Error(ErrorCode::kUnknownLayer, "no layer named '" + name + "'");
  }
  std::size_t rank = input_rank;
  for (std::size_t i = 0; i <= *index; ++i) {
    rank = layers_[i]->output_rank(rank);
  }
  return rank;
}

Tensor Network::forward(const Tensor& x,
                        std::span<const std::string> capture) {
  activations_.clear();
  gradients_.clear();
  Tensor h = x;
  for (auto& layer : layers_) {
    h = layer->forward(h);
    if (contains(capture, layer->name())) activations_[layer->name()] = h;
  }
  return h;
}

Tensor Network::forward_from(const std::string& name,
                             const Tensor& activation) {
  const auto index = find(name);
  if (!index) {
    throw Error(ErrorCode::kUnknownLayer, "no layer named '" + name + "'");
  }
  Tensor h = activation;
  for (std::size_t i = *index + 1; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h);
  }
  return h;
}

Tensor Network::backward(const Tensor& grad_out, BackwardMode mode,
                         std::span<const std::string> capture,
                         bool to_input) {
  Tensor g = grad_out;
  std::size_t remaining = 0;
  for (const auto& layer : layers_) {
    if (contains(capture, layer->name())) ++remaining;
  }
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    if (contains(capture, (*it)->name())) {
      gradients_[(*it)->name()] = g;
      --remaining;
    }
    if (!to_input && remaining == 0) return Tensor();
    g = (*it)->backward(g, mode);
  }
  return g;
}

const Tensor& Network::captured_activation(const std::string& name) const {
  auto it = activations_.find(name);
  if (it == activations_.end()) {
    throw Error(ErrorCode::kUnknownLayer,
                "no captured activation for '" + name + "'");
  }
  return it->second;
}

const Tensor& Network::captured_gradient(const std::string& name) const {
  auto it = gradients_.find(name);
  if (it == gradients_.end()) {
    throw Error(ErrorCode::kGradientUnavailable,
                "no captured gradient for '" + name + "'");
  }
  return it->second;
}

void Network::clear_captures() {
  activations_.clear();
  gradients_.clear();
}

std::vector<Parameter> Network::parameters() {
  std::vector<Parameter> params;
  for (auto& layer : layers_) {
    for (auto& p : layer->parameters()) params.push_back(p);
  }
  return params;
}

std::size_t Network::num_parameters() {
  std::size_t n = 0;
  for (auto& p : parameters()) n += p.value->size();
  return n;
}

void Network::set_param_grads(bool enabled) {
  for (auto& layer : layers_) layer->set_param_grads(enabled);
}

void Network::zero_grads() {
  for (auto& p : parameters()) {
    std::fill(p.grad->values().begin(), p.grad->values().end(), 0.0);
  }
}

bool Network::has_rectifier() const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [](const auto& l) { return l->has_rectifier(); });
}

bool Network::differentiable() const {
  return std::all_of(layers_.begin(), layers_.end(),
                     [](const auto& l) { return l->differentiable(); });
}

nlohmann::json Network::architecture() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_) layers.push_back(layer->config());
  return layers;
}

Network Network::from_architecture(const nlohmann::json& layers) {
  if (!layers.is_array()) {
    throw Error(ErrorCode::kModelLoadFailed, "architecture must be a list");
  }
  Network net;
  for (const auto& config : layers) net.add(layer_from_config(config));
  return net;
}

std::vector<double> Network::flat_parameters() {
  std::vector<double> flat;
  for (auto& p : parameters()) {
    flat.insert(flat.end(), p.value->values().begin(), p.value->values().end());
  }
  return flat;
}

void Network::set_flat_parameters(std::span<const double> values) {
  std::size_t offset = 0;
  for (auto& p : parameters()) {
    if (offset + p.value->size() > values.size()) {
      throw Error(ErrorCode::kModelLoadFailed, "too few parameter values");
    }
    std::copy(values.begin() + offset, values.begin() + offset + p.value->size(),
              p.value->values().begin());
    offset += p.value->size();
  }
  if (offset != values.size()) {
    throw Error(ErrorCode::kModelLoadFailed, "too many parameter values");
  }
}

}  // namespace ecgx::nn
