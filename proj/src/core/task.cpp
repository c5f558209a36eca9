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

#include "ecgx/core/task.hpp"

#include <string>

#include "ecgx/error.hpp"

namespace ecgx {

TaskType TaskType::multiclass(std::size_t n) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "multiclass task needs N >= 2, got " + std::to_string(n));
  }
  return TaskType(TaskKind::kMulticlassClassification, n);
}

TaskType TaskType::multilabel(std::size_t n) {
  if (n < 1) {
    throw Error(ErrorCode::kInvalidArgument, "multilabel task needs N >= 1");
  }
  return TaskType(TaskKind::kMultilabelClassification, n);
}

std::string_view task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::kBinaryClassification: return "binary_classification";
    case TaskKind::kMulticlassClassification: return "multiclass_classification";
    case TaskKind::kMultilabelClassification: return "multilabel_classification";
    case TaskKind::kRegression: return "regression";
  }
  return "unknown";
}

TaskKind task_kind_from_name(std::string_view name) {
  for (auto kind : {TaskKind::kBinaryClassification,
                    TaskKind::kMulticlassClassification,
                    TaskKind::kMultilabelClassification,
                    TaskKind::kRegression}) {
    if (task_kind_name(kind) == name) return kind;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown task type '" + std::string(name) + "'");
}

TaskType make_task(TaskKind kind, std::size_t num_outputs) {
  switch (kind) {
    case TaskKind::kBinaryClassification:
      if (num_outputs != 2) {
        throw Error(ErrorCode::kInvalidArgument, "binary task has N = 2");
      }
      return TaskType::binary();
    case TaskKind::kMulticlassClassification:
      return TaskType::multiclass(num_outputs);
    case TaskKind::kMultilabelClassification:
      return TaskType::multilabel(num_outputs);
    case TaskKind::kRegression:
      if (num_outputs != 1) {
        throw Error(ErrorCode::kInvalidArgument, "regression task has N = 1");
      }
      return TaskType::regression();
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown task kind");
}

}  // namespace ecgx
