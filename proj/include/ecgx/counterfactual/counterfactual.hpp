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
#include <filesystem>
#include <vector>

#include "ecgx/core/ecg_record.hpp"
#include "ecgx/counterfactual/generator.hpp"
#include "ecgx/wrapper/wrapped_model.hpp"

namespace ecgx {

// Linear-interpolation resampling to round(T * new_rate / old_rate) samples.
EcgRecord resample(const EcgRecord& record, int new_rate);

// Resamples an (L, T) signal onto `length` samples at `new_rate`; positions
// past the last input sample hold its value.
Tensor resample_signal(const Tensor& signal, int old_rate, int new_rate,
                       std::size_t length);
// Adjoint of resample_signal for an input of `input_length` samples.
Tensor resample_signal_adjoint(const Tensor& grad, int old_rate, int new_rate,
                               std::size_t input_length);

struct InvertOptions {
  std::size_t restarts = 4;
  std::size_t steps = 500;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

struct Inversion {
  std::vector<double> z;
  double mse = 0.0;
};

// Adam on the mean squared reconstruction error from standard-normal
// restarts; keeps the best restart. The record must already be at the
// generator's rate and length.
Inversion invert(const EcgGenerator& generator, const EcgRecord& record,
                 const InvertOptions& options = {});

struct LossPoint {
  std::size_t step;
  double total;
  double pred_term;
  double proximity_term;
};

struct CounterfactualResult {
  EcgRecord original;
  EcgRecord counterfactual;
  double original_pred = 0.0;
  double cf_pred = 0.0;
  double target_value = 0.0;
  std::vector<double> z_init{};
  std::vector<double> z_final{};
  double inversion_mse = 0.0;
  // Accepted iterates only; `total` is non-increasing.
  std::vector<LossPoint> loss_trace{};
  bool converged = false;
  std::string stop_reason{};
};

struct CounterfactualOptions {
  double target_value = 1.0;
  double lambda_prox = 0.1;
  std::size_t max_steps = 300;
  double tol = 0.05;
  double step_size = 10.0;
  // Stop when the loss has not improved for this many steps.
  std::size_t patience = 50;
  // Its seed drives the inversion restarts.
  InvertOptions inversion{};
};

// Minimizes (F_target(G(z)) - target_value)^2 + lambda * |z - z0|^2 by
// gradient descent from the inverted latent z0. A step that would raise the
// loss is rejected and the step size halved.
CounterfactualResult explain_cf(WrappedModel& model,
                                const EcgGenerator& generator,
                                const EcgRecord& record, std::size_t target,
                                const CounterfactualOptions& options = {});

void write_loss_trace(const CounterfactualResult& result,
                      const std::filesystem::path& path);

}  // namespace ecgx
