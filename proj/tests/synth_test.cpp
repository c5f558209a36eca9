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
#include <vector>

#include <gtest/gtest.h>

#include "ecgx/core/io.hpp"
#include "ecgx/synth/synth.hpp"
#include "test_util.hpp"

namespace ecgx::synth {
namespace {

using ::ecgx::testing::code_of;

TEST(SynthEcgTest, AbsentPWaveLeavesLittlePWindowEnergy) {
  BeatParams with_p;
  BeatParams without_p;
  without_p.p_wave_present = false;
  const auto a = synth_ecg_with_peaks(with_p, 12, 2500, 250, 3);
  const auto b = synth_ecg_with_peaks(without_p, 12, 2500, 250, 3);
  ASSERT_EQ(a.r_peaks_s, b.r_peaks_s);
  const auto mask = p_window_mask(a.r_peaks_s, 2500, 250);
  for (std::size_t l : {0u, 1u, 6u}) {
    const double present = windowed_energy(a.record.lead(l), mask, true);
    const double absent = windowed_energy(b.record.lead(l), mask, true);
    ASSERT_GT(present, 0.0);
    EXPECT_LE(absent, 0.1 * present) << "lead " << l;
  }
}

TEST(SynthEcgTest, ZeroAmplitudesGiveZeroSignal) {
  BeatParams params;
  for (Wave* w : {&params.p, &params.q, &params.r, &params.s, &params.t}) {
    w->amplitude_mv = 0.0;
  }
  params.rr_jitter = 0.1;
  const EcgRecord record = synth_ecg(params, 12, 1000, 250, 5);
  for (double v : record.signal().values()) ASSERT_EQ(v, 0.0);
}

TEST(SynthEcgTest, SixtyBpmGivesTenPeaksInTenSeconds) {
  BeatParams params;
  params.heart_rate_bpm = 60.0;
  const auto synth = synth_ecg_with_peaks(params, 12, 2500, 250, 0);
  EXPECT_EQ(synth.r_peaks_s.size(), 10u);
  for (std::size_t i = 1; i < synth.r_peaks_s.size(); ++i) {
    EXPECT_NEAR(synth.r_peaks_s[i] - synth.r_peaks_s[i - 1], 1.0, 1e-12);
  }
}

TEST(SynthEcgTest, LeadsFollowProjection) {
  const EcgRecord record = synth_ecg({}, 12, 500, 250, 1);
  const auto ref = record.lead(0);
  const auto lead2 = record.lead(1);
  for (std::size_t t = 0; t < ref.size(); ++t) {
    EXPECT_NEAR(lead2[t] * lead_gain(0), ref[t] * lead_gain(1), 1e-12);
  }
}

TEST(SynthEcgTest, DeterministicUnderSeed) {
  BeatParams params;
  params.rr_jitter = 0.1;
  params.noise_mv = 0.02;
  const auto a = synth_ecg(params, 12, 1000, 250, 9);
  const auto b = synth_ecg(params, 12, 1000, 250, 9);
  const auto c = synth_ecg(params, 12, 1000, 250, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(SynthEcgTest, RejectsInvalidParams) {
  BeatParams slow;
  slow.heart_rate_bpm = 10.0;
  EXPECT_EQ(code_of([&] { synth_ecg(slow, 12, 100, 250, 0); }),
            ErrorCode::kInvalidParams);
  BeatParams flat;
  flat.r.width_s = 0.0;
  EXPECT_EQ(code_of([&] { synth_ecg(flat, 12, 100, 250, 0); }),
            ErrorCode::kInvalidParams);
  BeatParams jitter;
  jitter.rr_jitter = -0.1;
  EXPECT_EQ(code_of([&] { synth_ecg(jitter, 12, 100, 250, 0); }),
            ErrorCode::kInvalidParams);
}

TEST(AfDatasetTest, BalancedWithCompleteSplits) {
  const AfDataset dataset = make_af_dataset(40, 7);
  ASSERT_EQ(dataset.items.size(), 80u);
  const auto ones = std::count_if(dataset.items.begin(), dataset.items.end(),
                                  [](const auto& item) { return item.label == 1; });
  EXPECT_EQ(ones, 40);
  EXPECT_EQ(dataset.train.size() + dataset.val.size() + dataset.test.size(), 80u);
  EXPECT_EQ(dataset.train.size(), 56u);

  std::vector<std::size_t> all;
  for (const auto* split : {&dataset.train, &dataset.val, &dataset.test}) {
    all.insert(all.end(), split->begin(), split->end());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(80);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(all, expected);
}

TEST(AfDatasetTest, SinusClassCarriesPWindowEnergy) {
  const AfDataset dataset = make_af_dataset(20, 3);
  double density[2] = {0.0, 0.0};
  for (const auto& item : dataset.items) {
    const auto mask = p_window_mask(item.r_peaks_s, item.record.num_samples(),
                                    item.record.sampling_rate());
    const double inside = windowed_energy(item.record.lead(1), mask, true);
    const double count = std::count(mask.begin(), mask.end(), true);
    density[item.label] += inside / count / 20.0;
  }
  EXPECT_GT(density[0], 2.0 * density[1])
      << density[0] << " vs " << density[1];
}

TEST(AfDatasetTest, DeterministicUnderSeed) {
  const AfDataset a = make_af_dataset(5, 11);
  const AfDataset b = make_af_dataset(5, 11);
  ASSERT_EQ(a.items.size(), b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    EXPECT_EQ(a.items[i].label, b.items[i].label);
    EXPECT_EQ(a.items[i].record, b.items[i].record);
  }
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
}

TEST(AfDatasetTest, SavedAsBinaryRecordsAndLabels) {
  const AfDataset dataset = make_af_dataset(3, 2, {12, 500, 250});
  const auto dir = testing::scratch_dir("dataset");
  save_dataset(dataset, dir);
  std::ifstream labels(dir / "labels.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(labels, line);
  EXPECT_EQ(line, "file,label,split");
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    const std::string file = line.substr(0, line.find(','));
    const EcgRecord loaded = load_ecg(dir / file, EcgFormat::kBinaryFloat32);
    const auto& original = dataset.items[rows].record;
    EXPECT_EQ(loaded.num_leads(), 12u);
    EXPECT_EQ(loaded.num_samples(), 500u);
    EXPECT_NEAR(loaded.value(3, 17), original.value(3, 17), 1e-6);
    ++rows;
  }
  EXPECT_EQ(rows, 6u);
}

TEST(ConceptRecordsTest, KindsFollowLabels) {
  const auto af = make_concept_records(ConceptKind::kAf, 4, 1);
  const auto sinus = make_concept_records(ConceptKind::kSinus, 4, 1);
  EXPECT_EQ(af.size(), 4u);
  EXPECT_EQ(sinus.size(), 4u);
  EXPECT_EQ(make_concept_records(ConceptKind::kMixed, 6, 1).size(), 6u);
}

TEST(ReferenceModelTest, CompactWithRegisteredLayers) {
  auto model = make_reference_model(TaskType::binary(), 12, 0);
  EXPECT_LE(model.network().num_parameters(), 100000u);
  const std::vector<std::string> layers{"conv1", "conv2", "conv3", "fc"};
  EXPECT_EQ(model.layer_names(), layers);
}

TEST(ReferenceModelTest, TrainingIsDeterministic) {
  const AfDataset dataset = make_af_dataset(8, 5, {12, 500, 250});
  TrainOptions options;
  options.epochs = 2;
  options.batch_size = 4;
  auto a = make_reference_model(TaskType::binary(), 12, 3);
  auto b = make_reference_model(TaskType::binary(), 12, 3);
  const auto report_a = train_reference_model(a, dataset, options);
  const auto report_b = train_reference_model(b, dataset, options);
  EXPECT_EQ(report_a.epoch_loss, report_b.epoch_loss);
  EXPECT_EQ(a.network().flat_parameters(), b.network().flat_parameters());
}

TEST(ReferenceModelTest, ReachesHeldOutAccuracy) {
  auto& fixture = testing::reference_fixture();
  EXPECT_GE(fixture.report.test_accuracy, 0.95);
  EXPECT_GE(fixture.report.val_accuracy, 0.95);
}

TEST(ReferenceModelTest, PredictRowsAreDistributions) {
  auto& fixture = testing::reference_fixture();
  const auto records = fixture.dataset.records(
      std::span(fixture.dataset.test).first(5));
  const Tensor probs = fixture.model.predict(make_batch(records));
  ASSERT_EQ(probs.shape(), (Tensor::Shape{5, 2}));
  for (std::size_t b = 0; b < 5; ++b) {
    EXPECT_NEAR(probs.at(b, 0) + probs.at(b, 1), 1.0, 1e-12);
  }
}

TEST(ReferenceModelTest, ShuffledLabelsGiveChanceAccuracy) {
  const AfDataset dataset = make_af_dataset(150, 42);
  auto model = make_reference_model(TaskType::binary(), 12, 1);
  TrainOptions options;
  options.shuffle_labels = true;
  train_reference_model(model, dataset, options);
  const AfDataset fresh = make_af_dataset(200, 99);
  std::vector<std::size_t> all(fresh.items.size());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_NEAR(accuracy(model, fresh, all), 0.5, 0.1);
}

TEST(ToyGeneratorTest, CenteredLatentIsCanonicalSinus) {
  const ToyGenerator generator = toy_generator(8);
  const std::vector<double> z(8, 0.0);
  const BeatParams params = generator.params_for(z);
  const BeatParams base;
  EXPECT_DOUBLE_EQ(params.p.amplitude_mv, base.p.amplitude_mv);
  EXPECT_DOUBLE_EQ(params.r.amplitude_mv, base.r.amplitude_mv);
  EXPECT_DOUBLE_EQ(params.t.amplitude_mv, base.t.amplitude_mv);
  EXPECT_DOUBLE_EQ(params.s.amplitude_mv, base.s.amplitude_mv);
  EXPECT_DOUBLE_EQ(params.q.amplitude_mv, base.q.amplitude_mv);
  EXPECT_DOUBLE_EQ(params.r.width_s, base.r.width_s);
  EXPECT_DOUBLE_EQ(params.t.width_s, base.t.width_s);
  EXPECT_TRUE(params.p_wave_present);
  EXPECT_LT(params.rr_jitter, 0.03);
  EXPECT_EQ(params.heart_rate_bpm, ToyGenerator::kHeartRateBpm);
}

TEST(ToyGeneratorTest, PCoordinateOnlyMovesPWindowEnergy) {
  const ToyGenerator generator = toy_generator(8);
  std::vector<double> z{0.0, 0.3, 0.2, -0.1, 0.1, 0.0, 0.2, -0.2};
  std::vector<double> z_low = z;
  z_low[0] = -1.5;
  const Tensor a = generator.generate(z);
  const Tensor b = generator.generate(z_low);
  const auto peaks = generator.r_peaks_s(z);
  ASSERT_EQ(peaks, generator.r_peaks_s(z_low));
  const std::size_t t = generator.num_samples();
  const auto mask = p_window_mask(peaks, t, generator.sampling_rate());
  for (std::size_t l : {1u, 6u}) {
    const std::span<const double> la(a.data() + l * t, t);
    const std::span<const double> lb(b.data() + l * t, t);
    const double out_a = windowed_energy(la, mask, false);
    const double out_b = windowed_energy(lb, mask, false);
    EXPECT_LE(std::abs(out_a - out_b), 0.01 * out_a) << "lead " << l;
    EXPECT_GT(windowed_energy(la, mask, true),
              2.0 * windowed_energy(lb, mask, true));
  }
}

TEST(ToyGeneratorTest, VjpMatchesFiniteDifferences) {
  const ToyGenerator generator = toy_generator(10);
  const std::vector<double> z{0.2, 0.4, -0.3, 0.5, -0.2, 0.1, 0.3, -0.4,
                              0.7, -0.7};
  const Tensor weights = testing::random_tensor(
      {generator.num_leads(), generator.num_samples()}, 4);
  auto objective = [&](const std::vector<double>& point) {
    const Tensor out = generator.generate(point);
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) sum += out[i] * weights[i];
    return sum;
  };
  const auto analytic = generator.vjp(z, weights);
  ASSERT_EQ(analytic.size(), z.size());
  const double step = 1e-5;
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto up = z;
    auto down = z;
    up[i] += step;
    down[i] -= step;
    const double numeric = (objective(up) - objective(down)) / (2.0 * step);
    EXPECT_NEAR(analytic[i], numeric,
                1e-3 * std::max(1.0, std::abs(numeric)))
        << "coordinate " << i;
  }
  EXPECT_EQ(analytic[8], 0.0);
  EXPECT_EQ(analytic[9], 0.0);
}

TEST(ToyGeneratorTest, Deterministic) {
  const ToyGenerator generator = toy_generator(8);
  const std::vector<double> z{0.1, -0.2, 0.3, 0.0, 0.5, -0.5, 0.2, 0.1};
  EXPECT_EQ(generator.generate(z), generator.generate(z));
}

}  // namespace
}  // namespace ecgx::synth
