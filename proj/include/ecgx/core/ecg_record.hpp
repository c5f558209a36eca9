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
#include <string>
#include <vector>

#include "ecgx/tensor.hpp"

namespace ecgx {

// The standard 12-lead order: I, II, III, aVR, aVL, aVF, V1..V6.
const std::vector<std::string>& standard_lead_names();

// Default names for an L-lead record: the first L standard names, then
// "lead13", "lead14", ... for L > 12.
std::vector<std::string> default_lead_names(std::size_t num_leads);

// A multi-lead ECG signal in millivolts, shape (L, T). Immutable once built;
// the constructor enforces every invariant (L >= 1, T >= 2, finite values,
// unique lead names, positive sampling rate).
class EcgRecord {
 public:
  EcgRecord(Tensor signal, int sampling_rate,
            std::vector<std::string> lead_names = {});

  const Tensor& signal() const noexcept { return signal_; }
  int sampling_rate() const noexcept { return sampling_rate_; }
  const std::vector<std::string>& lead_names() const noexcept {
    return lead_names_;
  }
  std::size_t num_leads() const noexcept { return signal_.dim(0); }
  std::size_t num_samples() const noexcept { return signal_.dim(1); }
  double duration_s() const noexcept {
    return static_cast<double>(num_samples()) / sampling_rate_;
  }
  double value(std::size_t lead, std::size_t t) const {
    return signal_.at(lead, t);
  }
  std::span<const double> lead(std::size_t index) const;

  // (1, L, T) view for the wrapper boundary.
  Tensor as_batch() const;

  // Same rate and lead names, new samples.
  EcgRecord with_signal(Tensor signal) const;

  friend bool operator==(const EcgRecord&, const EcgRecord&) = default;

 private:
  Tensor signal_;
  int sampling_rate_;
  std::vector<std::string> lead_names_;
};

// Stacks records with identical (L, T) into a (B, L, T) batch.
Tensor make_batch(std::span<const EcgRecord> records);

// Zero-valued record with the same shape, rate and lead names.
EcgRecord zeros_like(const EcgRecord& record);

}  // namespace ecgx
