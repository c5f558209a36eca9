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

#include "ecgx/nn/layer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "ecgx/error.hpp"

namespace ecgx::nn {
namespace {

void require_rank(const Tensor& x, std::size_t rank, const std::string& who) {
  if (x.rank() != rank) {
    throw Error(ErrorCode::kShapeMismatch,
                who + " expects rank " + std::to_string(rank) + ", got " +
                    shape_string(x.shape()));
  }
}

void he_normal(Tensor& w, std::size_t fan_in, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
  for (double& v : w.values()) v = normal(rng);
}

}  // namespace

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::string name, std::size_t in_channels,
               std::size_t out_channels, std::size_t kernel,
               std::size_t stride, std::size_t padding)
    : Layer(std::move(name)),
      in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      weight_({out_channels, in_channels, kernel}),
      bias_({out_channels}),
      weight_grad_({out_channels, in_channels, kernel}),
      bias_grad_({out_channels}) {
  if (in_ == 0 || out_ == 0 || kernel_ == 0 || stride_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "conv1d dimensions must be > 0");
  }
}

std::size_t Conv1d::output_rank(std::size_t input_rank) const {
  if (input_rank != 3) {
    throw Error(ErrorCode::kShapeMismatch, name() + " needs (B, C, T) input");
  }
  return 3;
}

std::size_t Conv1d::output_length(std::size_t input_length) const {
  const std::size_t padded = input_length + 2 * padding_;
  if (padded < kernel_) {
    throw Error(ErrorCode::kShapeMismatch,
                name() + ": input length " + std::to_string(input_length) +
                    " shorter than kernel");
  }
  return (padded - kernel_) / stride_ + 1;
}

void Conv1d::init(Rng& rng) {
  he_normal(weight_, in_ * kernel_, rng);
  std::fill(bias_.values().begin(), bias_.values().end(), 0.0);
}

Tensor Conv1d::forward(const Tensor& x) {
  require_rank(x, 3, name());
  if (x.dim(1) != in_) {
    throw Error(ErrorCode::kShapeMismatch,
                name() + " expects " + std::to_string(in_) +
                    " channels, got " + shape_string(x.shape()));
  }
  input_ = x;
  const std::size_t batch = x.dim(0);
  const std::size_t t_in = x.dim(2);
  const std::size_t t_out = output_length(t_in);
  Tensor y({batch, out_, t_out});
  const auto pad = static_cast<long>(padding_);
  const auto s = static_cast<long>(stride_);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_; ++o) {
      double* yrow = &y.at(b, o, 0);
      std::fill(yrow, yrow + t_out, bias_[o]);
      for (std::size_t i = 0; i < in_; ++i) {
        const double* xrow = &x.at(b, i, 0);
        for (std::size_t k = 0; k < kernel_; ++k) {
          const double w = weight_.at(o, i, k);
          const long offset = static_cast<long>(k) - pad;
          // Valid u: 0 <= u*s + offset < t_in.
          const long lo = offset >= 0 ? 0 : (-offset + s - 1) / s;
          const long hi_excl = std::min<long>(
              static_cast<long>(t_out),
              (static_cast<long>(t_in) - 1 - offset) / s + 1);
          if (s == 1) {
            const double* src = xrow + offset;
            for (long u = lo; u < hi_excl; ++u) yrow[u] += w * src[u];
          } else {
            for (long u = lo; u < hi_excl; ++u) {
              yrow[u] += w * xrow[u * s + offset];
            }
          }
        }
      }
    }
  }
  return y;
}

Tensor Conv1d::backward(const Tensor& grad_out, BackwardMode) {
  const Tensor& x = input_;
  const std::size_t batch = x.dim(0);
  const std::size_t t_in = x.dim(2);
  const std::size_t t_out = grad_out.dim(2);
  Tensor gx(x.shape());
  const auto pad = static_cast<long>(padding_);
  const auto s = static_cast<long>(stride_);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_; ++o) {
      const double* grow = &grad_out.at(b, o, 0);
      if (param_grads_) {
        double acc = 0.0;
        for (std::size_t u = 0; u < t_out; ++u) acc += grow[u];
        bias_grad_[o] += acc;
      }
      for (std::size_t i = 0; i < in_; ++i) {
        const double* xrow = &x.at(b, i, 0);
        double* gxrow = &gx.at(b, i, 0);
        for (std::size_t k = 0; k < kernel_; ++k) {
          const double w = weight_.at(o, i, k);
          const long offset = static_cast<long>(k) - pad;
          const long lo = offset >= 0 ? 0 : (-offset + s - 1) / s;
          const long hi_excl = std::min<long>(
              static_cast<long>(t_out),
              (static_cast<long>(t_in) - 1 - offset) / s + 1);
          double wacc = 0.0;
          if (s == 1) {
            double* dst = gxrow + offset;
            const double* src = xrow + offset;
            for (long u = lo; u < hi_excl; ++u) {
              dst[u] += w * grow[u];
              wacc += grow[u] * src[u];
            }
          } else {
            for (long u = lo; u < hi_excl; ++u) {
              gxrow[u * s + offset] += w * grow[u];
              wacc += grow[u] * xrow[u * s + offset];
            }
          }
          if (param_grads_) weight_grad_.at(o, i, k) += wacc;
        }
      }
    }
  }
  return gx;
}

std::vector<Parameter> Conv1d::parameters() {
  return {{name() + ".weight", &weight_, &weight_grad_},
          {name() + ".bias", &bias_, &bias_grad_}};
}

nlohmann::json Conv1d::config() const {
  return {{"type", type()},       {"name", name()},
          {"in", in_},            {"out", out_},
          {"kernel", kernel_},    {"stride", stride_},
          {"padding", padding_}};
}

std::unique_ptr<Layer> Conv1d::clone() const {
  auto copy = std::make_unique<Conv1d>(*this);
  copy->input_ = Tensor();
  return copy;
}

// ---------------------------------------------------------------- Relu

Tensor Relu::forward(const Tensor& x) {
  input_ = x;
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor Relu::backward(const Tensor& grad_out, BackwardMode mode) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool pass = input_[i] > 0.0 &&
                      (mode == BackwardMode::kStandard || g[i] > 0.0);
    if (!pass) g[i] = 0.0;
  }
  return g;
}

nlohmann::json Relu::config() const {
  return {{"type", type()}, {"name", name()}};
}

std::unique_ptr<Layer> Relu::clone() const {
  return std::make_unique<Relu>(name());
}

// ---------------------------------------------------------------- Tanh

Tensor Tanh::forward(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = std::tanh(v);
  output_ = y;
  return y;
}

Tensor Tanh::backward(const Tensor& grad_out, BackwardMode) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] *= 1.0 - output_[i] * output_[i];
  }
  return g;
}

nlohmann::json Tanh::config() const {
  return {{"type", type()}, {"name", name()}};
}

std::unique_ptr<Layer> Tanh::clone() const {
  return std::make_unique<Tanh>(name());
}

// ---------------------------------------------------------------- Step

Tensor Step::forward(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? 1.0 : 0.0;
  return y;
}

Tensor Step::backward(const Tensor&, BackwardMode) {
  throw Error(ErrorCode::kGradientUnavailable,
              "layer '" + name() + "' (step) is not differentiable");
}

nlohmann::json Step::config() const {
  return {{"type", type()}, {"name", name()}};
}

std::unique_ptr<Layer> Step::clone() const {
  return std::make_unique<Step>(name());
}

// ---------------------------------------------------------------- ResidualBlock

ResidualBlock::ResidualBlock(std::string name, std::size_t in_channels,
                             std::size_t out_channels, std::size_t kernel,
                             std::size_t stride)
    : Layer(name),
      in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride),
      conv_a_(name + ".conv_a", in_channels, out_channels, kernel, stride,
              kernel / 2),
      relu_a_(name + ".relu_a"),
      conv_b_(name + ".conv_b", out_channels, out_channels, kernel, 1,
              kernel / 2),
      relu_out_(name + ".relu_out") {
  if (kernel % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "residual block kernel must be odd");
  }
  if (in_channels != out_channels || stride != 1) {
    skip_ = std::make_unique<Conv1d>(name + ".skip", in_channels, out_channels,
                                     1, stride, 0);
  }
}

ResidualBlock::ResidualBlock(const ResidualBlock& other)
    : Layer(other.name()),
      in_(other.in_),
      out_(other.out_),
      kernel_(other.kernel_),
      stride_(other.stride_),
      conv_a_(other.conv_a_),
      relu_a_(other.relu_a_),
      conv_b_(other.conv_b_),
      skip_(other.skip_ ? std::make_unique<Conv1d>(*other.skip_) : nullptr),
      relu_out_(other.relu_out_) {
  param_grads_ = other.param_grads_;
}

std::size_t ResidualBlock::output_rank(std::size_t input_rank) const {
  return conv_a_.output_rank(input_rank);
}

void ResidualBlock::init(Rng& rng) {
  conv_a_.init(rng);
  conv_b_.init(rng);
  if (skip_) skip_->init(rng);
}

Tensor ResidualBlock::forward(const Tensor& x) {
  Tensor h = relu_a_.forward(conv_a_.forward(x));
  Tensor y = conv_b_.forward(h);
  y += skip_ ? skip_->forward(x) : x;
  return relu_out_.forward(y);
}

Tensor ResidualBlock::backward(const Tensor& grad_out, BackwardMode mode) {
  Tensor g = relu_out_.backward(grad_out, mode);
  Tensor gx = skip_ ? skip_->backward(g, mode) : g;
  gx += conv_a_.backward(relu_a_.backward(conv_b_.backward(g, mode), mode),
                         mode);
  return gx;
}

std::vector<Parameter> ResidualBlock::parameters() {
  auto params = conv_a_.parameters();
  for (auto& p : conv_b_.parameters()) params.push_back(p);
  if (skip_) {
    for (auto& p : skip_->parameters()) params.push_back(p);
  }
  return params;
}

void ResidualBlock::set_param_grads(bool enabled) {
  Layer::set_param_grads(enabled);
  conv_a_.set_param_grads(enabled);
  conv_b_.set_param_grads(enabled);
  if (skip_) skip_->set_param_grads(enabled);
}

nlohmann::json ResidualBlock::config() const {
  return {{"type", type()},    {"name", name()},     {"in", in_},
          {"out", out_},       {"kernel", kernel_},  {"stride", stride_}};
}

std::unique_ptr<Layer> ResidualBlock::clone() const {
  return std::make_unique<ResidualBlock>(*this);
}

// ---------------------------------------------------------------- GlobalAvgPool

std::size_t GlobalAvgPool::output_rank(std::size_t input_rank) const {
  if (input_rank != 3) {
    throw Error(ErrorCode::kShapeMismatch, name() + " needs (B, C, T) input");
  }
  return keep_dims_ ? 3 : 2;
}

Tensor GlobalAvgPool::forward(const Tensor& x) {
  require_rank(x, 3, name());
  length_ = x.dim(2);
  Tensor y = keep_dims_ ? Tensor({x.dim(0), x.dim(1), 1})
                        : Tensor({x.dim(0), x.dim(1)});
  for (std::size_t b = 0; b < x.dim(0); ++b) {
    for (std::size_t c = 0; c < x.dim(1); ++c) {
      const double* row = &x.at(b, c, 0);
      double acc = 0.0;
      for (std::size_t t = 0; t < length_; ++t) acc += row[t];
      y[b * x.dim(1) + c] = acc / static_cast<double>(length_);
    }
  }
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out, BackwardMode) {
  Tensor g({grad_out.dim(0), grad_out.dim(1), length_});
  const double scale = 1.0 / static_cast<double>(length_);
  for (std::size_t b = 0; b < g.dim(0); ++b) {
    for (std::size_t c = 0; c < g.dim(1); ++c) {
      const double v = grad_out[b * g.dim(1) + c] * scale;
      double* row = &g.at(b, c, 0);
      std::fill(row, row + length_, v);
    }
  }
  return g;
}

nlohmann::json GlobalAvgPool::config() const {
  return {{"type", type()}, {"name", name()}, {"keep_dims", keep_dims_}};
}

std::unique_ptr<Layer> GlobalAvgPool::clone() const {
  return std::make_unique<GlobalAvgPool>(name(), keep_dims_);
}

// ---------------------------------------------------------------- Flatten

Tensor Flatten::forward(const Tensor& x) {
  if (x.rank() < 1) {
    throw Error(ErrorCode::kShapeMismatch, name() + " needs a batch axis");
  }
  input_shape_ = x.shape();
  return x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

Tensor Flatten::backward(const Tensor& grad_out, BackwardMode) {
  return grad_out.reshaped(input_shape_);
}

nlohmann::json Flatten::config() const {
  return {{"type", type()}, {"name", name()}};
}

std::unique_ptr<Layer> Flatten::clone() const {
  return std::make_unique<Flatten>(name());
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::string name, std::size_t in_features,
             std::size_t out_features)
    : Layer(std::move(name)),
      in_(in_features),
      out_(out_features),
      weight_({out_features, in_features}),
      bias_({out_features}),
      weight_grad_({out_features, in_features}),
      bias_grad_({out_features}) {}

void Dense::init(Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / in_));
  for (double& v : weight_.values()) v = normal(rng);
  std::fill(bias_.values().begin(), bias_.values().end(), 0.0);
}

Tensor Dense::forward(const Tensor& x) {
  if (x.rank() < 2 || x.size() / x.dim(0) != in_) {
    throw Error(ErrorCode::kShapeMismatch,
                name() + " expects " + std::to_string(in_) +
                    " features per item, got " + shape_string(x.shape()));
  }
  input_ = x;
  const std::size_t batch = x.dim(0);
  Tensor y({batch, out_});
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xrow = x.data() + b * in_;
    for (std::size_t o = 0; o < out_; ++o) {
      const double* wrow = &weight_.at(o, 0);
      double acc = bias_[o];
      for (std::size_t i = 0; i < in_; ++i) acc += wrow[i] * xrow[i];
      y.at(b, o) = acc;
    }
  }
  return y;
}

Tensor Dense::backward(const Tensor& grad_out, BackwardMode) {
  Tensor gx(input_.shape());
  const std::size_t batch = input_.dim(0);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xrow = input_.data() + b * in_;
    double* gxrow = gx.data() + b * in_;
    for (std::size_t o = 0; o < out_; ++o) {
      const double g = grad_out.at(b, o);
      const double* wrow = &weight_.at(o, 0);
      for (std::size_t i = 0; i < in_; ++i) gxrow[i] += g * wrow[i];
      if (param_grads_) {
        double* gwrow = &weight_grad_.at(o, 0);
        for (std::size_t i = 0; i < in_; ++i) gwrow[i] += g * xrow[i];
        bias_grad_[o] += g;
      }
    }
  }
  return gx;
}

std::vector<Parameter> Dense::parameters() {
  return {{name() + ".weight", &weight_, &weight_grad_},
          {name() + ".bias", &bias_, &bias_grad_}};
}

nlohmann::json Dense::config() const {
  return {{"type", type()}, {"name", name()}, {"in", in_}, {"out", out_}};
}

std::unique_ptr<Layer> Dense::clone() const {
  auto copy = std::make_unique<Dense>(*this);
  copy->input_ = Tensor();
  return copy;
}

// ---------------------------------------------------------------- Transpose12

Tensor transpose12(const Tensor& x) {
  require_rank(x, 3, "transpose");
  Tensor y({x.dim(0), x.dim(2), x.dim(1)});
  for (std::size_t b = 0; b < x.dim(0); ++b) {
    for (std::size_t i = 0; i < x.dim(1); ++i) {
      for (std::size_t j = 0; j < x.dim(2); ++j) {
        y.at(b, j, i) = x.at(b, i, j);
      }
    }
  }
  return y;
}

std::size_t Transpose12::output_rank(std::size_t input_rank) const {
  if (input_rank != 3) {
    throw Error(ErrorCode::kShapeMismatch, name() + " needs rank-3 input");
  }
  return 3;
}

Tensor Transpose12::forward(const Tensor& x) { return transpose12(x); }

Tensor Transpose12::backward(const Tensor& grad_out, BackwardMode) {
  return transpose12(grad_out);
}

nlohmann::json Transpose12::config() const {
  return {{"type", type()}, {"name", name()}};
}

std::unique_ptr<Layer> Transpose12::clone() const {
  return std::make_unique<Transpose12>(name());
}

// ---------------------------------------------------------------- factory

std::unique_ptr<Layer> layer_from_config(const nlohmann::json& c) {
  try {
    const auto type = c.at("type").get<std::string>();
    const auto name = c.at("name").get<std::string>();
    if (type == "conv1d") {
      return std::make_unique<Conv1d>(
          name, c.at("in").get<std::size_t>(), c.at("out").get<std::size_t>(),
          c.at("kernel").get<std::size_t>(), c.at("stride").get<std::size_t>(),
          c.at("padding").get<std::size_t>());
    }
    if (type == "residual_block") {
      return std::make_unique<ResidualBlock>(
          name, c.at("in").get<std::size_t>(), c.at("out").get<std::size_t>(),
          c.at("kernel").get<std::size_t>(),
          c.at("stride").get<std::size_t>());
    }
    if (type == "dense") {
      return std::make_unique<Dense>(name, c.at("in").get<std::size_t>(),
                                     c.at("out").get<std::size_t>());
    }
    if (type == "relu") return std::make_unique<Relu>(name);
    if (type == "tanh") return std::make_unique<Tanh>(name);
    if (type == "step") return std::make_unique<Step>(name);
    if (type == "global_avg_pool") {
      return std::make_unique<GlobalAvgPool>(name,
                                             c.value("keep_dims", false));
    }
    if (type == "flatten") return std::make_unique<Flatten>(name);
    if (type == "transpose12") return std::make_unique<Transpose12>(name);
    throw Error(ErrorCode::kModelLoadFailed, "unknown layer type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kModelLoadFailed,
                std::string("bad layer config: ") + e.what());
  }
}

}  // namespace ecgx::nn
