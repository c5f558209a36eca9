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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "ecgx/core/io.hpp"
#include "ecgx/core/rng.hpp"
#include "ecgx/error.hpp"
#include "ecgx/synth/synth.hpp"

namespace ecgx::synth {

void BeatParams::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidParams, msg);
  };
  if (!(heart_rate_bpm >= 20.0 && heart_rate_bpm <= 300.0)) {
    fail("heart rate must lie in [20, 300] bpm");
  }
  for (const Wave* w : {&p, &q, &r, &s, &t}) {
    if (!(w->width_s > 0.0) || !std::isfinite(w->amplitude_mv) ||
        !std::isfinite(w->center_s)) {
      fail("wave widths must be positive and parameters finite");
    }
  }
  if (!(rr_jitter >= 0.0) || !(noise_mv >= 0.0) || !(wander_mv >= 0.0) ||
      !(wander_hz >= 0.0)) {
    fail("rr_jitter, noise and wander must be non-negative");
  }
}

const std::array<double, 12>& lead_projection() {
  // I II III aVR aVL aVF V1 V2 V3 V4 V5 V6
  static const std::array<double, 12> gains{
      0.6, 1.0, 0.4, -0.8, 0.2, 0.7, -0.5, 0.3, 0.8, 1.1, 1.0, 0.8};
  return gains;
}

double lead_gain(std::size_t lead) {
  return lead_projection()[lead % lead_projection().size()];
}

SynthRecord synth_ecg_with_peaks(const BeatParams& params, std::size_t leads,
                                 std::size_t samples, int rate,
                                 std::uint64_t seed) {
  params.validate();
  if (rate <= 0) throw Error(ErrorCode::kNonpositiveRate, "rate must be > 0");
  if (leads == 0 || samples == 0) {
    throw Error(ErrorCode::kInvalidParams, "leads and samples must be > 0");
  }
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double rr = 60.0 / params.heart_rate_bpm;
  const double duration = static_cast<double>(samples) / rate;
  std::vector<double> beats{-rr / 2.0};
  double r_time = rr / 2.0;
  while (r_time < duration + rr) {
    beats.push_back(r_time);
    const double factor = std::max(0.3, 1.0 + params.rr_jitter * normal(rng));
    r_time += rr * factor;
  }

  std::vector<Wave> waves{params.q, params.r, params.s, params.t};
  if (params.p_wave_present) waves.push_back(params.p);

  std::vector<double> base(samples, 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / rate;
    double v = 0.0;
    for (double r : beats) {
      for (const Wave& w : waves) {
        const double d = (t - r - w.center_s) / w.width_s;
        v += w.amplitude_mv * std::exp(-0.5 * d * d);
      }
    }
    base[i] = v;
  }

  Tensor signal({leads, samples});
  for (std::size_t l = 0; l < leads; ++l) {
    const double gain = lead_gain(l);
    for (std::size_t i = 0; i < samples; ++i) {
      signal.at(l, i) = gain * base[i];
    }
  }
  if (params.wander_mv > 0.0) {
    Rng phase_rng = make_rng(seed, 2);
    const double phase =
        std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(phase_rng);
    for (std::size_t i = 0; i < samples; ++i) {
      const double t = static_cast<double>(i) / rate;
      const double w =
          params.wander_mv * std::sin(2.0 * M_PI * params.wander_hz * t + phase);
      for (std::size_t l = 0; l < leads; ++l) signal.at(l, i) += w;
    }
  }
  if (params.noise_mv > 0.0) {
    Rng noise_rng = make_rng(seed, 1);
    for (double& v : signal.values()) v += params.noise_mv * normal(noise_rng);
  }

  std::vector<double> peaks;
  for (double r : beats) {
    if (r >= 0.0 && r < duration) peaks.push_back(r);
  }
  return {EcgRecord(std::move(signal), rate), std::move(peaks)};
}

EcgRecord synth_ecg(const BeatParams& params, std::size_t leads,
                    std::size_t samples, int rate, std::uint64_t seed) {
  return synth_ecg_with_peaks(params, leads, samples, rate, seed).record;
}

std::vector<bool> p_window_mask(std::span<const double> r_peaks_s,
                                std::size_t samples, int rate) {
  std::vector<bool> mask(samples, false);
  for (double r : r_peaks_s) {
    const double lo = (r + kPWindowStart) * rate;
    const double hi = (r + kPWindowEnd) * rate;
    const auto first = static_cast<long>(std::ceil(lo));
    const auto last = static_cast<long>(std::floor(hi));
    for (long i = std::max(0L, first);
         i <= last && i < static_cast<long>(samples); ++i) {
      mask[static_cast<std::size_t>(i)] = true;
    }
  }
  return mask;
}

double windowed_energy(std::span<const double> lead,
                       const std::vector<bool>& mask, bool inside) {
  double total = 0.0;
  for (std::size_t i = 0; i < lead.size(); ++i) {
    if (mask[i] == inside) total += lead[i] * lead[i];
  }
  return total;
}

namespace {

BeatParams draw_params(int label, Rng& rng) {
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  BeatParams p;
  p.heart_rate_bpm = uniform(60.0, 90.0);
  p.r.amplitude_mv = uniform(0.8, 1.2);
  p.t.amplitude_mv = uniform(0.2, 0.4);
  p.s.amplitude_mv = -uniform(0.1, 0.3);
  p.q.amplitude_mv = -uniform(0.05, 0.15);
  p.noise_mv = 0.02;
  p.wander_mv = uniform(0.0, 0.1);
  p.wander_hz = uniform(0.1, 0.5);
  if (label == 0) {
    p.p_wave_present = true;
    p.p.amplitude_mv = uniform(0.1, 0.3);
    p.rr_jitter = uniform(0.0, 0.06);
  } else {
    p.p_wave_present = false;
    p.rr_jitter = uniform(0.04, 0.15);
  }
  return p;
}

LabeledRecord draw_record(int label, std::uint64_t seed,
                          const DatasetShape& shape) {
  Rng rng = make_rng(seed, 0);
  const BeatParams params = draw_params(label, rng);
  auto synth = synth_ecg_with_peaks(params, shape.leads, shape.samples,
                                    shape.rate, derive_seed(seed, 1));
  return {std::move(synth.record), label, std::move(synth.r_peaks_s)};
}

}  // namespace

std::vector<EcgRecord> AfDataset::records(
    std::span<const std::size_t> indices) const {
  std::vector<EcgRecord> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(items.at(i).record);
  return out;
}

AfDataset make_af_dataset(std::size_t n_per_class, std::uint64_t seed,
                          DatasetShape shape) {
  if (n_per_class == 0) {
    throw Error(ErrorCode::kInvalidParams, "n_per_class must be > 0");
  }
  AfDataset ds;
  const std::size_t n = 2 * n_per_class;
  for (std::size_t i = 0; i < n; ++i) {
    ds.items.push_back(
        draw_record(static_cast<int>(i % 2), derive_seed(seed, 100 + i), shape));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, 1);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::lround(0.70 * n));
  const auto n_val = static_cast<std::size_t>(std::lround(0.15 * n));
  ds.train.assign(order.begin(), order.begin() + n_train);
  ds.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  ds.test.assign(order.begin() + n_train + n_val, order.end());
  return ds;
}

void save_dataset(const AfDataset& dataset,
                  const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  std::vector<std::string> split(dataset.items.size(), "train");
  for (std::size_t i : dataset.val) split[i] = "val";
  for (std::size_t i : dataset.test) split[i] = "test";
  std::ofstream labels(directory / "labels.csv");
  if (!labels) {
    throw Error(ErrorCode::kUnwritablePath,
                "cannot write " + (directory / "labels.csv").string());
  }
  labels << "file,label,split\n";
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "record_%04zu.bin", i);
    save_ecg(dataset.items[i].record, directory / name, EcgFormat::kBinaryFloat32);
    labels << name << ',' << dataset.items[i].label << ',' << split[i] << '\n';
  }
}

std::vector<EcgRecord> make_concept_records(ConceptKind kind, std::size_t n,
                                            std::uint64_t seed,
                                            DatasetShape shape) {
  std::vector<EcgRecord> out;
  out.reserve(n);
  Rng pick = make_rng(seed, 2);
  for (std::size_t i = 0; i < n; ++i) {
    int label = 0;
    switch (kind) {
      case ConceptKind::kAf: label = 1; break;
      case ConceptKind::kSinus: label = 0; break;
      case ConceptKind::kMixed:
        label = std::bernoulli_distribution(0.5)(pick) ? 1 : 0;
        break;
    }
    out.push_back(draw_record(label, derive_seed(seed, 1000 + i), shape).record);
  }
  return out;
}

}  // namespace ecgx::synth
