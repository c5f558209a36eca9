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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ecgx/core/io.hpp"
#include "ecgx/core/rng.hpp"
#include "ecgx/synth/synth.hpp"
#include "ecgx/tcav/tcav.hpp"
#include "test_util.hpp"

namespace ecgx {
namespace {

using ::ecgx::testing::code_of;
using ::ecgx::testing::random_record;

// Regression net: output = mean over time of a 1x1 conv "conv" (gain 1).
WrappedModel averaging_model() {
  nn::Network net;
  auto& conv = net.emplace<nn::Conv1d>("conv", 1, 1, 1);
  conv.weight()[0] = 1.0;
  net.emplace<nn::GlobalAvgPool>("gap");
  return WrappedModel(std::move(net), TaskType::regression(), {"conv"});
}

std::vector<std::vector<double>> cluster(std::size_t n, std::size_t dim,
                                         double center, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(center, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (auto& row : rows) {
    for (double& v : row) v = normal(rng);
  }
  return rows;
}

Cav make_cav(std::string layer, std::vector<double> direction) {
  Cav cav;
  cav.layer_name = std::move(layer);
  cav.concept_name = "c";
  cav.direction = std::move(direction);
  return cav;
}

TEST(DirectionalDerivativeTest, OrthogonalDirectionGivesZero) {
  const Tensor gradient({2, 2}, {1.0, 2.0, -2.0, 1.0});
  EXPECT_EQ(directional_derivative(make_cav("l", {2.0, -1.0, 1.0, 2.0}), gradient),
            0.0);
}

TEST(DirectionalDerivativeTest, SelfAlignedGivesGradientNorm) {
  const Tensor gradient({1, 3}, {3.0, 0.0, -4.0});
  const Cav cav = make_cav("l", {0.6, 0.0, -0.8});
  EXPECT_DOUBLE_EQ(directional_derivative(cav, gradient), 5.0);
}

TEST(DirectionalDerivativeTest, HandComputedTwoChannels) {
  const Tensor gradient({2, 1}, {1.0, -1.0});
  EXPECT_DOUBLE_EQ(directional_derivative(make_cav("l", {1.0, 0.0}), gradient), 1.0);
  const Tensor batched({1, 2, 1}, {1.0, -1.0});
  EXPECT_DOUBLE_EQ(directional_derivative(make_cav("l", {1.0, 0.0}), batched), 1.0);
}

TEST(DirectionalDerivativeTest, PooledCavUsesTimeMeanGradient) {
  Cav cav = make_cav("l", {1.0, 0.0});
  cav.time_pooled = true;
  const Tensor gradient({2, 4}, {1.0, 2.0, 3.0, 6.0, 9.0, 9.0, 9.0, 9.0});
  EXPECT_DOUBLE_EQ(directional_derivative(cav, gradient), 3.0);
}

TEST(DirectionalDerivativeTest, LengthMismatchRejected) {
  EXPECT_EQ(code_of([] {
              directional_derivative(make_cav("l", {1.0, 0.0, 0.0}), Tensor({2, 1}));
            }),
            ErrorCode::kShapeMismatch);
}

TEST(DirectionalDerivativeTest, ModelGradientAndLayerChecks) {
  auto model = averaging_model();
  const EcgRecord record = random_record(1, 8, 100, 1);
  // dF/dA = 1/8 at every position.
  const Cav cav = make_cav("conv", std::vector<double>(8, 1.0 / std::sqrt(8.0)));
  EXPECT_NEAR(directional_derivative(model, "conv", cav, record, 0),
              1.0 / std::sqrt(8.0), 1e-14);
  EXPECT_EQ(code_of([&] { directional_derivative(model, "other", cav, record, 0); }),
            ErrorCode::kUnknownLayer);
  const Cav elsewhere = make_cav("gap", cav.direction);
  EXPECT_EQ(code_of([&] { directional_derivative(model, "conv", elsewhere, record, 0); }),
            ErrorCode::kInvalidParams);
}

TEST(TcavScoreTest, AllPositiveAndSignFlip) {
  auto model = averaging_model();
  std::vector<EcgRecord> inputs;
  for (std::uint64_t s = 0; s < 6; ++s) inputs.push_back(random_record(1, 8, 100, s));
  Cav cav = make_cav("conv", std::vector<double>(8, 1.0 / std::sqrt(8.0)));
  EXPECT_EQ(tcav_score(model, "conv", cav, inputs, 0), 1.0);
  for (double& v : cav.direction) v = -v;
  EXPECT_EQ(tcav_score(model, "conv", cav, inputs, 0), 0.0);
}

TEST(TcavScoreTest, NegatedDirectionComplementsOnReferenceModel) {
  auto& model = testing::reference_fixture().model;
  const auto inputs = synth::make_concept_records(synth::ConceptKind::kMixed, 12, 5);
  const std::size_t size = 16 * 157;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<double> direction(size);
  double norm = 0.0;
  for (double& v : direction) {
    v = normal(rng);
    norm += v * v;
  }
  for (double& v : direction) v /= std::sqrt(norm);
  Cav cav = make_cav("conv3", direction);
  const double score = tcav_score(model, "conv3", cav, inputs, 1);
  for (double& v : cav.direction) v = -v;
  EXPECT_DOUBLE_EQ(tcav_score(model, "conv3", cav, inputs, 1), 1.0 - score);
}

TEST(FitCavTest, SeparableClustersAreLearned) {
  const auto positive = cluster(30, 6, 2.0, 1);
  const auto negative = cluster(30, 6, -2.0, 2);
  const Cav cav = fit_cav(positive, negative, {});
  EXPECT_GE(cav.train_accuracy, 0.95);
  EXPECT_GE(cav.cv_accuracy, 0.9);
  double norm = 0.0;
  for (double v : cav.direction) {
    EXPECT_GT(v, 0.0);
    norm += v * v;
  }
  EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(FitCavTest, SameDistributionIsNearChance) {
  const auto a = cluster(100, 5, 0.0, 3);
  const auto b = cluster(100, 5, 0.0, 4);
  const Cav cav = fit_cav(a, b, {});
  EXPECT_NEAR(cav.cv_accuracy, 0.5, 0.15);
}

TEST(FitCavTest, DeterministicUnderSeed) {
  const auto a = cluster(20, 4, 0.5, 5);
  const auto b = cluster(20, 4, -0.5, 6);
  CavOptions options;
  options.seed = 9;
  const Cav first = fit_cav(a, b, options);
  const Cav second = fit_cav(a, b, options);
  EXPECT_EQ(first.direction, second.direction);
  EXPECT_EQ(first.cv_accuracy, second.cv_accuracy);
}

TEST(FitCavTest, ConstantActivationsAreDegenerate) {
  const std::vector<std::vector<double>> flat(10, std::vector<double>(3, 1.0));
  EXPECT_EQ(code_of([&] { fit_cav(flat, flat, {}); }),
            ErrorCode::kDegenerateActivations);
}

TEST(TrainCavTest, AfConceptSeparatesAtConv3) {
  auto& model = testing::reference_fixture().model;
  const ConceptSet af{"af", synth::make_concept_records(synth::ConceptKind::kAf, 15, 21)};
  const auto sinus = synth::make_concept_records(synth::ConceptKind::kSinus, 15, 22);
  const Cav cav = train_cav(model, "conv3", af, sinus);
  EXPECT_GE(cav.train_accuracy, 0.95);
  EXPECT_EQ(cav.direction.size(), 16u * 157u);
  EXPECT_EQ(cav.layer_name, "conv3");
}

TEST(StatisticsTest, StudentCriticalValue) {
  EXPECT_NEAR(t_critical(0.05, 9), 2.262, 5e-4);
  EXPECT_NEAR(t_critical(0.05, 1), 12.706, 5e-4);
  EXPECT_NEAR(t_critical(0.01, 20), 2.845, 5e-4);
}

TEST(StatisticsTest, OneSampleTestClosedForm) {
  // Two degrees of freedom: F(t) = 1/2 + t / (2 sqrt(2 + t^2)).
  const TTest test = one_sample_t_test({0.6, 0.7, 0.8}, 0.5);
  const double t = 0.2 / (0.1 / std::sqrt(3.0));
  EXPECT_NEAR(test.mean, 0.7, 1e-15);
  EXPECT_NEAR(test.stddev, 0.1, 1e-15);
  EXPECT_NEAR(test.t, t, 1e-12);
  EXPECT_NEAR(test.p_value, 1.0 - t / std::sqrt(2.0 + t * t), 1e-12);
}

TEST(StatisticsTest, ZeroSpread) {
  EXPECT_EQ(one_sample_t_test({0.5, 0.5, 0.5}, 0.5).p_value, 1.0);
  EXPECT_EQ(one_sample_t_test({1.0, 1.0, 1.0}, 0.5).p_value, 0.0);
}

class RunTcavTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    af_ = new ConceptSet{"af", synth::make_concept_records(synth::ConceptKind::kAf, 20, 11)};
    pool_ = new std::vector<EcgRecord>(
        synth::make_concept_records(synth::ConceptKind::kMixed, 60, 12));
    inputs_ = new std::vector<EcgRecord>(
        synth::make_concept_records(synth::ConceptKind::kAf, 12, 13));
  }
  static void TearDownTestSuite() {
    delete af_;
    delete pool_;
    delete inputs_;
  }
  static ConceptSet* af_;
  static std::vector<EcgRecord>* pool_;
  static std::vector<EcgRecord>* inputs_;
};
ConceptSet* RunTcavTest::af_ = nullptr;
std::vector<EcgRecord>* RunTcavTest::pool_ = nullptr;
std::vector<EcgRecord>* RunTcavTest::inputs_ = nullptr;

TEST_F(RunTcavTest, ConceptEqualToLabelScoresHighAndIsDeterministic) {
  auto& model = testing::reference_fixture().model;
  TcavOptions options;
  options.n_runs = 3;
  options.seed = 4;
  const auto a = run_tcav(model, {"conv3"}, {*af_}, *pool_, *inputs_, 1, options);
  const auto b = run_tcav(model, {"conv3"}, {*af_}, *pool_, *inputs_, 1, options);
  const TcavEntry& entry = a.at("conv3", "af");
  EXPECT_GE(entry.score, 0.9);
  EXPECT_EQ(entry.n_runs, 3u);
  EXPECT_EQ(entry.per_run_scores.size(), 3u);
  EXPECT_EQ(entry.per_run_scores, b.at("conv3", "af").per_run_scores);
  EXPECT_NEAR(entry.t_critical, t_critical(0.05, 2), 1e-12);
  for (double s : entry.per_run_scores) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
  EXPECT_GE(entry.ci_low, 0.0);
  EXPECT_LE(entry.ci_high, 1.0);
  EXPECT_LE(entry.ci_low_raw, entry.ci_low);
  EXPECT_GE(entry.ci_high_raw, entry.ci_high);
}

TEST_F(RunTcavTest, InputDurationIsApplied) {
  auto& model = testing::reference_fixture().model;
  TcavOptions options;
  options.n_runs = 2;
  options.input_duration_s = 10.0;
  const auto result = run_tcav(model, {"conv3"}, {*af_}, *pool_, *inputs_, 1, options);
  EXPECT_FALSE(result.notes.empty());
}

TEST_F(RunTcavTest, Errors) {
  auto& model = testing::reference_fixture().model;
  TcavOptions single;
  single.n_runs = 1;
  EXPECT_EQ(code_of([&] { run_tcav(model, {"conv3"}, {*af_}, *pool_, *inputs_, 1, single); }),
            ErrorCode::kInvalidParams);
  const std::vector<EcgRecord> small(pool_->begin(), pool_->begin() + 20);
  EXPECT_EQ(code_of([&] { run_tcav(model, {"conv3"}, {*af_}, small, *inputs_, 1); }),
            ErrorCode::kInsufficientRandomPool);
  EXPECT_EQ(code_of([&] { run_tcav(model, {"conv9"}, {*af_}, *pool_, *inputs_, 1); }),
            ErrorCode::kUnknownLayer);
  const ConceptSet tiny{"tiny", {af_->examples.begin(), af_->examples.begin() + 5}};
  EXPECT_EQ(code_of([&] { run_tcav(model, {"conv3"}, {tiny}, *pool_, *inputs_, 1); }),
            ErrorCode::kInvalidParams);
}

std::vector<EcgRecord> noise_records(std::size_t n, std::uint64_t seed) {
  std::vector<EcgRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = make_rng(seed, i);
    std::normal_distribution<double> normal(0.0, 0.1);
    Tensor signal({12, 2500});
    for (double& v : signal.values()) v = normal(rng);
    out.emplace_back(std::move(signal), 250);
  }
  return out;
}

TEST_F(RunTcavTest, NullConceptScoresAverageNearChance) {
  auto& model = testing::reference_fixture().model;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const ConceptSet noise{"noise", noise_records(20, 500 + rep)};
    const auto pool = noise_records(60, 600 + rep);
    TcavOptions options;
    options.seed = rep;
    options.cav.folds = 0;
    const auto result = run_tcav(model, {"conv3"}, {noise}, pool, *inputs_, 1, options);
    for (double s : result.at("conv3", "noise").per_run_scores) {
      sum += s;
      ++count;
    }
  }
  EXPECT_NEAR(sum / count, 0.5, 0.15);
}

TEST(FitDurationTest, CropsAndPads) {
  const EcgRecord record = random_record(2, 500, 100, 3);
  const EcgRecord cropped = fit_duration(record, 2.0);
  EXPECT_EQ(cropped.num_samples(), 200u);
  EXPECT_EQ(cropped.value(1, 199), record.value(1, 199));
  const EcgRecord padded = fit_duration(record, 6.0);
  EXPECT_EQ(padded.num_samples(), 600u);
  EXPECT_EQ(padded.value(0, 499), record.value(0, 499));
  EXPECT_EQ(padded.value(0, 500), 0.0);
  EXPECT_EQ(padded.value(1, 599), 0.0);
}

TEST(TcavCsvTest, RoundTrip) {
  TcavResult result;
  TcavEntry entry;
  entry.layer = "conv2";
  entry.concept_name = "af";
  entry.score = 0.8125;
  entry.ci_low = 0.7;
  entry.ci_high = 0.9249999999999999;
  entry.p_value = 1.5e-7;
  entry.n_runs = 10;
  result.entries.push_back(entry);
  const auto path = testing::scratch_dir("tcav_csv") / "tcav.csv";
  write_tcav_csv(result, path);
  const TcavResult loaded = read_tcav_csv(path);
  ASSERT_EQ(loaded.entries.size(), 1u);
  const TcavEntry& back = loaded.at("conv2", "af");
  EXPECT_EQ(back.score, entry.score);
  EXPECT_EQ(back.ci_low, entry.ci_low);
  EXPECT_EQ(back.ci_high, entry.ci_high);
  EXPECT_EQ(back.p_value, entry.p_value);
  EXPECT_EQ(back.n_runs, 10u);
  EXPECT_EQ(code_of([&] { write_tcav_csv(TcavResult{}, path); }),
            ErrorCode::kEmptyResults);
}

TEST(ConceptDirectoryTest, LoadsConceptsAndRandomPool) {
  const auto root = testing::scratch_dir("concepts");
  std::filesystem::create_directories(root / "af");
  std::filesystem::create_directories(root / "random");
  for (int i = 0; i < 3; ++i) {
    save_ecg(random_record(2, 50, 100, i), root / "af" / ("r" + std::to_string(i) + ".bin"),
             EcgFormat::kBinaryFloat32);
  }
  for (int i = 0; i < 4; ++i) {
    save_ecg(random_record(2, 50, 100, 10 + i),
             root / "random" / ("n" + std::to_string(i) + ".csv"), EcgFormat::kCsv);
  }
  std::vector<EcgRecord> pool;
  const auto concepts = load_concept_directory(root, pool);
  ASSERT_EQ(concepts.size(), 1u);
  EXPECT_EQ(concepts[0].name, "af");
  EXPECT_EQ(concepts[0].examples.size(), 3u);
  EXPECT_EQ(pool.size(), 4u);

  std::filesystem::remove_all(root / "random");
  EXPECT_EQ(code_of([&] { load_concept_directory(root, pool); }),
            ErrorCode::kInsufficientRandomPool);
}

}  // namespace
}  // namespace ecgx
