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

#include "ecgx/error.hpp"

namespace ecgx {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kFileNotFound: return "file-not-found";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kNonFiniteValues: return "non-finite-values";
    case ErrorCode::kOutputIdxOutOfRange: return "output-idx-out-of-range";
    case ErrorCode::kModelForwardFailure: return "model-forward-failure";
    case ErrorCode::kUnknownLayer: return "unknown-layer";
    case ErrorCode::kGradientUnavailable: return "gradient-unavailable";
    case ErrorCode::kLayerRankMismatch: return "layer-rank-mismatch";
    case ErrorCode::kBinSizeNonpositive: return "bin-size-nonpositive";
    case ErrorCode::kNonpositiveRate: return "nonpositive-rate";
    case ErrorCode::kNonFiniteLoss: return "non-finite-loss";
    case ErrorCode::kInversionFailed: return "inversion-failed";
    case ErrorCode::kDegenerateActivations: return "degenerate-activations";
    case ErrorCode::kInsufficientRandomPool: return "insufficient-random-pool";
    case ErrorCode::kInvalidParams: return "invalid-params";
    case ErrorCode::kTrainingDivergence: return "training-divergence";
    case ErrorCode::kGridMismatch: return "grid-mismatch";
    case ErrorCode::kOverlayShapeMismatch: return "overlay-shape-mismatch";
    case ErrorCode::kLeadOutOfRange: return "lead-out-of-range";
    case ErrorCode::kEmptyResults: return "empty-results";
    case ErrorCode::kUnwritablePath: return "unwritable-path";
    case ErrorCode::kConfigInvalid: return "config-invalid";
    case ErrorCode::kModelLoadFailed: return "model-load-failed";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

}  // namespace ecgx
