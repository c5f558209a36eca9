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

#include <stdexcept>
#include <string>
#include <string_view>

namespace ecgx {

enum class ErrorCode {
  kInvalidArgument,
  kFileNotFound,
  kShapeMismatch,
  kNonFiniteValues,
  kOutputIdxOutOfRange,
  kModelForwardFailure,
  kUnknownLayer,
  kGradientUnavailable,
  kLayerRankMismatch,
  kBinSizeNonpositive,
  kNonpositiveRate,
  kNonFiniteLoss,
  kInversionFailed,
  kDegenerateActivations,
  kInsufficientRandomPool,
  kInvalidParams,
  kTrainingDivergence,
  kGridMismatch,
  kOverlayShapeMismatch,
  kLeadOutOfRange,
  kEmptyResults,
  kUnwritablePath,
  kConfigInvalid,
  kModelLoadFailed,
};

std::string_view error_code_name(ErrorCode code);

// All toolkit failures are reported through this exception; `code()` is the
// stable machine-readable category, `what()` carries the context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ecgx
