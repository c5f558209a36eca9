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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecgx/core/ecg_record.hpp"
#include "ecgx/core/run_config.hpp"
#include "ecgx/tensor.hpp"
#include "ecgx/wrapper/wrapped_model.hpp"
#include "json.hpp"

namespace ecgx {

struct AttributionResult {
  // (L, T) for input-space methods, (T,) for the Grad-CAM family.
  Tensor scores;
  std::string method;
  std::size_t target = 0;
  nlohmann::json params = nlohmann::json::object();
  RunConfig run_config;
};

// |d F_target / d x| in postprocessed space.
AttributionResult saliency(WrappedModel& model, const EcgRecord& record,
                           std::size_t target);

struct SmoothGradOptions {
  std::size_t n_samples = 25;
  double noise_level = 0.1;
  std::uint64_t seed = 0;
};
AttributionResult smoothgrad(WrappedModel& model, const EcgRecord& record,
                             std::size_t target,
                             const SmoothGradOptions& options = {});

// Right-Riemann path integral from `baseline` (zeros when absent).
AttributionResult integrated_gradients(
    WrappedModel& model, const EcgRecord& record, std::size_t target,
    const std::optional<EcgRecord>& baseline = std::nullopt,
    std::size_t steps = 50);

enum class CamVariant { kGradCam, kGradCamPlusPlus };

// Class-activation map of a registered layer from logit-space gradients,
// linearly upsampled to the record length.
AttributionResult gradcam(WrappedModel& model, const EcgRecord& record,
                          std::size_t target, const std::string& layer,
                          CamVariant variant = CamVariant::kGradCam);

// Guided backpropagation times the upsampled Grad-CAM map.
AttributionResult guided_gradcam(WrappedModel& model, const EcgRecord& record,
                                 std::size_t target, const std::string& layer);

// Channel weighting of one (C, T') capture, before upsampling.
std::vector<double> cam_map(const Tensor& activations, const Tensor& gradients,
                            CamVariant variant);

// Endpoint-aligned linear interpolation to `length` samples.
std::vector<double> upsample_linear(std::span<const double> values,
                                    std::size_t length);

// Mean of |scores| over consecutive time windows; a trailing partial window
// is averaged over its own length. (L, T) -> (L, ceil(T / bin)),
// (T,) -> (ceil(T / bin),).
Tensor bin_attribution(const Tensor& scores, std::int64_t bin_size);

// Per-sample profile of a result along time: one lead or the mean over leads
// of |scores|. Grad-CAM maps pass through unchanged.
struct LeadReduction {
  bool mean_over_leads = false;
  std::size_t lead = 1;  // lead II in the standard order
};
std::vector<double> time_profile(const Tensor& scores,
                                 LeadReduction reduction = {});

inline const std::vector<std::string>& attribution_methods() {
  static const std::vector<std::string> names{
      "saliency",  "smoothgrad", "integrated_gradients",
      "gradcam",   "gradcampp",  "guided_gradcam"};
  return names;
}

// Runs a method by name with parameters from JSON, filling in defaults and
// recording the resolved parameters in the result's RunConfig. Throws
// kInvalidParams for unknown methods or parameters.
AttributionResult explain(WrappedModel& model, const EcgRecord& record,
                          const std::string& method, std::size_t target,
                          const nlohmann::json& params, std::uint64_t seed);

}  // namespace ecgx
