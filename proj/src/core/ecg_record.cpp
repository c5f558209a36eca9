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

#include "ecgx/core/ecg_record.hpp"

#include <set>
#include <utility>

#include "ecgx/error.hpp"

namespace ecgx {

const std::vector<std::string>& standard_lead_names() {
  static const std::vector<std::string> kNames = {
      "I", "II", "III", "aVR", "aVL", "aVF",
      "V1", "V2", "V3", "V4", "V5", "V6"};
  return kNames;
}

std::vector<std::string> default_lead_names(std::size_t num_leads) {
  std::vector<std::string> names;
  const auto& standard = standard_lead_names();
  for (std::size_t i = 0; i < num_leads; ++i) {
    names.push_back(i < standard.size() ? standard[i]
                                        : "lead" + std::to_string(i + 1));
  }
  return names;
}

EcgRecord::EcgRecord(Tensor signal, int sampling_rate,
                     std::vector<std::string> lead_names)
    : signal_(std::move(signal)),
      sampling_rate_(sampling_rate),
      lead_names_(std::move(lead_names)) {
  if (signal_.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch,
                "ECG signal must be (L, T), got " +
                    shape_string(signal_.shape()));
  }
  if (signal_.dim(0) < 1 || signal_.dim(1) < 2) {
    throw Error(ErrorCode::kShapeMismatch,
                "ECG signal needs L >= 1 and T >= 2, got " +
                    shape_string(signal_.shape()));
  }
  if (sampling_rate_ <= 0) {
    throw Error(ErrorCode::kNonpositiveRate,
                "sampling rate " + std::to_string(sampling_rate_));
  }
  if (!signal_.all_finite()) {
    throw Error(ErrorCode::kNonFiniteValues, "ECG signal contains NaN/Inf");
  }
  if (lead_names_.empty()) lead_names_ = default_lead_names(signal_.dim(0));
  if (lead_names_.size() != signal_.dim(0)) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(lead_names_.size()) + " lead names for " +
                    std::to_string(signal_.dim(0)) + " leads");
  }
  std::set<std::string> unique(lead_names_.begin(), lead_names_.end());
  if (unique.size() != lead_names_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "lead names must be unique");
  }
}

std::span<const double> EcgRecord::lead(std::size_t index) const {
  return signal_.values().subspan(index * num_samples(), num_samples());
}

Tensor EcgRecord::as_batch() const {
  return signal_.reshaped({1, num_leads(), num_samples()});
}

EcgRecord EcgRecord::with_signal(Tensor signal) const {
  return EcgRecord(std::move(signal), sampling_rate_, lead_names_);
}

Tensor make_batch(std::span<const EcgRecord> records) {
  std::vector<Tensor> signals;
  signals.reserve(records.size());
  for (const auto& r : records) signals.push_back(r.signal());
  return stack(signals);
}

EcgRecord zeros_like(const EcgRecord& record) {
  return record.with_signal(Tensor(record.signal().shape(), 0.0));
}

}  // namespace ecgx
