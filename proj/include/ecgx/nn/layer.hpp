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
#include <memory>
#include <string>
#include <vector>

#include "ecgx/core/rng.hpp"
#include "ecgx/tensor.hpp"
#include "json.hpp"

namespace ecgx::nn {

// kGuided applies the guided-backpropagation rule at every rectifier: the
// backward signal is zeroed where the forward input was negative or where the
// incoming signal is negative. Other layers backpropagate normally.
enum class BackwardMode { kStandard, kGuided };

struct Parameter {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

// A differentiable stage. forward() caches whatever backward() needs, so a
// layer serves one forward/backward pair at a time.
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const noexcept { return name_; }
  virtual std::string type() const = 0;

  // Rank of the output for an input of the given rank; throws
  // kShapeMismatch for unsupported ranks.
  virtual std::size_t output_rank(std::size_t input_rank) const = 0;

  virtual Tensor forward(const Tensor& x) = 0;
  virtual Tensor backward(const Tensor& grad_out, BackwardMode mode) = 0;

  virtual std::vector<Parameter> parameters() { return {}; }
  virtual bool has_rectifier() const { return false; }
  virtual bool differentiable() const { return true; }

  // Parameter gradients are only accumulated while enabled (training).
  virtual void set_param_grads(bool enabled) { param_grads_ = enabled; }
  bool param_grads() const noexcept { return param_grads_; }

  virtual nlohmann::json config() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

 protected:
  bool param_grads_ = false;

 private:
  std::string name_;
};

class Conv1d final : public Layer {
 public:
  Conv1d(std::string name, std::size_t in_channels, std::size_t out_channels,
         std::size_t kernel, std::size_t stride = 1, std::size_t padding = 0);

  std::string type() const override { return "conv1d"; }
  std::size_t output_rank(std::size_t input_rank) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, BackwardMode mode) override;
  std::vector<Parameter> parameters() override;
  nlohmann::json config() const override;
  std::unique_ptr<Layer> clone() const override;

  // He-normal weights, zero bias.
  void init(Rng& rng);
  std::size_t output_length(std::size_t input_length) const;

  Tensor& weight() { return weight_; }  // (out, in, kernel)
  Tensor& bias() { return bias_; }      // (out)

 private:
  std::size_t in_, out_, kernel_, stride_, padding_;
  Tensor weight_, bias_, weight_grad_, bias_grad_;
  Tensor input_;
};

class Relu final : public Layer {
 public:
  using Layer::Layer;
  std::string type() const override { return "relu"; }
  std::size_t output_rank(std::size_t input_rank) const override {
    return input_rank;
  }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, BackwardMode mode) override;
  bool has_rectifier() const override { return true; }
  nlohmann::json config() const override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Tensor input_;
};

class Tanh final : public Layer {
 public:
  using Layer::Layer;
  std::string type() const override { return "tanh"; }
  std::size_t output_rank(std::size_t input_rank) const override {
    return input_rank;
  }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, BackwardMode mode) override;
  nlohmann::json config() const override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Tensor output_;
};

// Hard threshold x > 0 ? 1 : 0. Has no usable gradient.
class Step final : public Layer {
 public:
  using Layer::Layer;
  std::string type() const override { return "step"; }
  std::size_t output_rank(std::size_t input_rank) const override {
    return input_rank;
  }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, BackwardMode mode) override;
  bool differentiable() const override { return false; }
  nlohmann::json config() const override;
  std::unique_ptr<Layer> clone() const override;
};

// relu(conv_b(relu(conv_a(x))) + skip(x)); skip is a strided 1x1
// convolution when the channel count or the stride changes.
class ResidualBlock final : public Layer {
 public:
  ResidualBlock(std::string name, std::size_t in_channels,
                std::size_t out_channels, std::size_t kernel,
                std::size_t stride);
  ResidualBlock(const ResidualBlock& other);

  std::string type() const override { return "residual_block"; }
  std::size_t output_rank(std::size_t input_rank) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, BackwardMode mode) override;
  std::vector<Parameter> parameters() override;
  bool has_rectifier() const override { return true; }
  void set_param_grads(bool enabled) override;
  nlohmann::json config() const override;
  std::unique_ptr<Layer> clone() const override;

  void init(Rng& rng);

 private:
  std::size_t in_, out_, kernel_, stride_;
  Conv1d conv_a_;
  Relu relu_a_;
  Conv1d conv_b_;
  std::unique_ptr<Conv1d> skip_;
  Relu relu_out_;
};

// (B, C, T) -> (B, C), mean over time; with keep_dims the output is
// (B, C, 1) so a 1x1 convolution head stays registrable.
class GlobalAvgPool final : public Layer {
 public:
  explicit GlobalAvgPool(std::string name, bool keep_dims = false)
      : Layer(std::move(name)), keep_dims_(keep_dims) {}
  std::string type() const override { return "global_avg_pool"; }
  std::size_t output_rank(std::size_t input_rank) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, BackwardMode mode) override;
  nlohmann::json config() const override;
  std::unique_ptr<Layer> clone() const override;

 private:
  bool keep_dims_;
  std::size_t length_ = 0;
};

// (B, ...) -> (B, F).
class Flatten final : public Layer {
 public:
  using Layer::Layer;
  std::string type() const override { return "flatten"; }
  std::size_t output_rank(std::size_t) const override { return 2; }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, BackwardMode mode) override;
  nlohmann::json config() const override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Tensor::Shape input_shape_;
};

// Fully connected layer over the flattened non-batch axes: (B, ...) -> (B, out).
class Dense final : public Layer {
 public:
  Dense(std::string name, std::size_t in_features, std::size_t out_features);

  std::string type() const override { return "dense"; }
  std::size_t output_rank(std::size_t) const override { return 2; }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, BackwardMode mode) override;
  std::vector<Parameter> parameters() override;
  nlohmann::json config() const override;
  std::unique_ptr<Layer> clone() const override;

  void init(Rng& rng);
  Tensor& weight() { return weight_; }  // (out, in)
  Tensor& bias() { return bias_; }      // (out)

 private:
  std::size_t in_, out_;
  Tensor weight_, bias_, weight_grad_, bias_grad_;
  Tensor input_;
};

// (B, X, Y) -> (B, Y, X).
class Transpose12 final : public Layer {
 public:
  using Layer::Layer;
  std::string type() const override { return "transpose12"; }
  std::size_t output_rank(std::size_t input_rank) const override;
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, BackwardMode mode) override;
  nlohmann::json config() const override;
  std::unique_ptr<Layer> clone() const override;
};

Tensor transpose12(const Tensor& x);

std::unique_ptr<Layer> layer_from_config(const nlohmann::json& config);

}  // namespace ecgx::nn
