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

#include <span>
#include <vector>

#include "ecgx/core/ecg_record.hpp"
#include "ecgx/tensor.hpp"

namespace ecgx {

// A differentiable latent-to-ECG map. generate() must be deterministic in z.
class EcgGenerator {
 public:
  virtual ~EcgGenerator() = default;

  virtual std::size_t latent_dim() const = 0;
  virtual int sampling_rate() const = 0;
  virtual std::size_t num_leads() const = 0;
  virtual std::size_t num_samples() const = 0;

  // (L, T_g) signal in millivolts.
  virtual Tensor generate(std::span<const double> z) const = 0;

  // J(z)^T * grad_output, with grad_output shaped like generate(z).
  virtual std::vector<double> vjp(std::span<const double> z,
                                  const Tensor& grad_output) const = 0;

  EcgRecord generate_record(std::span<const double> z) const {
    return EcgRecord(generate(z), sampling_rate());
  }
};

}  // namespace ecgx
