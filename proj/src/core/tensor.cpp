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

#include "ecgx/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <utility>

#include "ecgx/error.hpp"

namespace ecgx {

std::size_t shape_size(const Tensor::Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Tensor::Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_size(shape_)) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor of shape " + shape_string(shape_) + " given " +
                    std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), values_);
}

Tensor Tensor::slice0(std::size_t index) const {
  Shape inner(shape_.begin() + 1, shape_.end());
  const std::size_t stride = shape_size(inner);
  std::vector<double> out(values_.begin() + index * stride,
                          values_.begin() + (index + 1) * stride);
  return Tensor(std::move(inner), std::move(out));
}

void Tensor::set_slice0(std::size_t index, const Tensor& value) {
  const std::size_t stride = size() / shape_[0];
  if (value.size() != stride) {
    throw Error(ErrorCode::kShapeMismatch, "slice size mismatch");
  }
  std::copy(value.values_.begin(), value.values_.end(),
            values_.begin() + index * stride);
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) {
    throw Error(ErrorCode::kShapeMismatch,
                shape_string(shape_) + " += " + shape_string(other.shape_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

Tensor& Tensor::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  return *this;
}

Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot stack zero tensors");
  }
  Tensor::Shape shape = items.front().shape();
  shape.insert(shape.begin(), items.size());
  Tensor out(shape);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].shape() != items.front().shape()) {
      throw Error(ErrorCode::kShapeMismatch, "stack of unequal shapes");
    }
    out.set_slice0(i, items[i]);
  }
  return out;
}

}  // namespace ecgx
