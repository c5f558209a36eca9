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

#include <cstddef>
#include <string>
#include <string_view>

#include "ecgx/tensor.hpp"

namespace ecgx {

enum class TaskKind {
  kBinaryClassification,
  kMulticlassClassification,
  kMultilabelClassification,
  kRegression,
};

// Task type plus output count N. Binary tasks always report N = 2 columns and
// regression N = 1.
class TaskType {
 public:
  static TaskType binary() { return TaskType(TaskKind::kBinaryClassification, 2); }
  static TaskType multiclass(std::size_t n);
  static TaskType multilabel(std::size_t n);
  static TaskType regression() { return TaskType(TaskKind::kRegression, 1); }

  TaskKind kind() const noexcept { return kind_; }
  std::size_t num_outputs() const noexcept { return num_outputs_; }

  // Standardized output shape (B, N).
  Tensor::Shape output_shape(std::size_t batch) const {
    return {batch, num_outputs_};
  }
  bool is_classification() const noexcept {
    return kind_ != TaskKind::kRegression;
  }

  friend bool operator==(const TaskType&, const TaskType&) = default;

 private:
  TaskType(TaskKind kind, std::size_t n) : kind_(kind), num_outputs_(n) {}

  TaskKind kind_;
  std::size_t num_outputs_;
};

std::string_view task_kind_name(TaskKind kind);
TaskKind task_kind_from_name(std::string_view name);
TaskType make_task(TaskKind kind, std::size_t num_outputs);

}  // namespace ecgx
