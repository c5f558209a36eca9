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

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "ecgx/core/ecg_record.hpp"
#include "ecgx/counterfactual/generator.hpp"
#include "ecgx/wrapper/wrapped_model.hpp"

namespace ecgx::synth {

// One Gaussian deflection of a beat. `center_s` is relative to the R peak,
// `width_s` is the Gaussian standard deviation.
struct Wave {
  double amplitude_mv;
  double center_s;
  double width_s;
};

struct BeatParams {
  double heart_rate_bpm = 72.0;
  Wave p{0.15, -0.070, 0.015};
  Wave q{-0.10, -0.025, 0.006};
  Wave r{1.00, 0.000, 0.010};
  Wave s{-0.20, 0.025, 0.007};
  Wave t{0.30, 0.250, 0.040};
  // Fractional standard deviation of RR intervals.
  double rr_jitter = 0.0;
  bool p_wave_present = true;
  // Additive white noise, standard deviation in mV.
  double noise_mv = 0.0;
  // Sinusoidal baseline wander with a seeded phase, same on every lead.
  double wander_mv = 0.0;
  double wander_hz = 0.3;

  // Throws kInvalidParams: widths must be > 0, heart rate in [20, 300],
  // jitter, noise and wander >= 0.
  void validate() const;
};

// Fixed per-lead gain applied to the single-lead beat morphology, in the
// standard 12-lead order. Leads beyond 12 reuse the vector cyclically.
const std::array<double, 12>& lead_projection();
double lead_gain(std::size_t lead);

struct SynthRecord {
  EcgRecord record;
  std::vector<double> r_peaks_s;  // R-peak times inside the record
};

// Sum of Gaussian waves at RR-jittered beat positions, scaled per lead;
// deterministic given the seed.
SynthRecord synth_ecg_with_peaks(const BeatParams& params, std::size_t leads,
                                 std::size_t samples, int rate,
                                 std::uint64_t seed);
EcgRecord synth_ecg(const BeatParams& params, std::size_t leads,
                    std::size_t samples, int rate, std::uint64_t seed);

// Oracle window where P waves live: [R - 110 ms, R - 30 ms] per beat.
inline constexpr double kPWindowStart = -0.110;
inline constexpr double kPWindowEnd = -0.030;
std::vector<bool> p_window_mask(std::span<const double> r_peaks_s,
                                std::size_t samples, int rate);

// Sum of squared samples of one lead restricted to (or outside) a mask.
double windowed_energy(std::span<const double> lead,
                       const std::vector<bool>& mask, bool inside);

struct DatasetShape {
  std::size_t leads = 12;
  std::size_t samples = 2500;
  int rate = 250;
};

struct LabeledRecord {
  EcgRecord record;
  int label;  // 1 = AF proxy (no P waves, irregular RR)
  std::vector<double> r_peaks_s;
};

struct AfDataset {
  std::vector<LabeledRecord> items;
  std::vector<std::size_t> train, val, test;

  std::vector<EcgRecord> records(std::span<const std::size_t> indices) const;
};

// Balanced AF-proxy dataset. Class 0: P waves present, mild RR jitter.
// Class 1: no P waves, larger RR jitter. The jitter ranges overlap, so the
// P wave is the only fully separating cue. Split 70/15/15 after a seeded
// shuffle.
AfDataset make_af_dataset(std::size_t n_per_class, std::uint64_t seed,
                          DatasetShape shape = {});

// Stores records as core binary files plus labels.csv ("file,label,split").
void save_dataset(const AfDataset& dataset,
                  const std::filesystem::path& directory);

// Desk-scale 1-D ResNet: stem conv (stride 2), three stride-2 residual blocks
// named conv1..conv3, global average pooling and a 1x1
// convolution head "fc". Registered layers: conv1, conv2, conv3, fc.
WrappedModel make_reference_model(const TaskType& task, std::size_t leads,
                                  std::uint64_t seed);

struct TrainOptions {
  std::size_t epochs = 8;
  std::size_t batch_size = 16;
  double learning_rate = 3e-3;
  double weight_decay = 1e-4;
  // Targets become (1 - eps) on the label and eps / (N - 1) elsewhere, which
  // bounds the logit margin and keeps gradients away from saturation.
  double label_smoothing = 0.02;
  // Mixup: each example is blended with a partner from the same batch using
  // a Beta(alpha, alpha) weight, labels likewise. 0 disables.
  double mixup_alpha = 0.0;
  std::uint64_t seed = 0;
  // Train on a label-permuted copy (control experiment).
  bool shuffle_labels = false;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

// Adam on softmax cross-entropy with a fixed, seeded data order. Throws
// kTrainingDivergence when the loss becomes non-finite.
TrainReport train_reference_model(WrappedModel& model,
                                  const AfDataset& dataset,
                                  const TrainOptions& options);

double accuracy(WrappedModel& model, const AfDataset& dataset,
                std::span<const std::size_t> indices,
                const std::vector<int>* labels = nullptr);

// Differentiable stand-in for a learned ECG generator. Latent coordinates
// are squashed into valid beat parameters:
//   z0 P amplitude, z1 RR jitter, z2 R amplitude, z3 T amplitude,
//   z4 QRS width scale, z5 S amplitude, z6 Q amplitude, z7 T width scale.
// Coordinates past the eighth do not affect the output. Heart rate is fixed
// and beats are displaced independently by jitter * RR * eta_k with a fixed
// pattern eta_k in [-1, 1], which keeps beat placement differentiable.
class ToyGenerator final : public EcgGenerator {
 public:
  explicit ToyGenerator(std::size_t latent_dim = 8, std::size_t leads = 12,
                        int rate = 125, double duration_s = 10.0);

  std::size_t latent_dim() const override { return latent_dim_; }
  int sampling_rate() const override { return rate_; }
  std::size_t num_leads() const override { return leads_; }
  std::size_t num_samples() const override { return samples_; }

  Tensor generate(std::span<const double> z) const override;
  std::vector<double> vjp(std::span<const double> z,
                          const Tensor& grad_output) const override;

  // Beat parameters the latent maps to (heart rate is fixed).
  BeatParams params_for(std::span<const double> z) const;
  std::vector<double> r_peaks_s(std::span<const double> z) const;

  static constexpr double kHeartRateBpm = 75.0;

 private:
  static constexpr double kSupportWidths = 8.0;
  // Sample range [first, last) where a bump centred at `center` is evaluated.
  std::pair<std::size_t, std::size_t> support(double center,
                                              double width) const;

  std::size_t latent_dim_;
  std::size_t leads_;
  int rate_;
  std::size_t samples_;
};

ToyGenerator toy_generator(std::size_t latent_dim = 8);

// Concept examples for TCAV fixtures.
enum class ConceptKind {
  kAf,     // label-1 records
  kSinus,  // label-0 records
  kMixed,  // 50/50 draw from both classes: no concept information
};
std::vector<EcgRecord> make_concept_records(ConceptKind kind, std::size_t n,
                                            std::uint64_t seed,
                                            DatasetShape shape = {});

}  // namespace ecgx::synth
