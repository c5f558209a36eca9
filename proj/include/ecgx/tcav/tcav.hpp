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
#include <optional>
#include <string>
#include <vector>

#include "ecgx/core/ecg_record.hpp"
#include "ecgx/wrapper/wrapped_model.hpp"

namespace ecgx {

inline constexpr std::size_t kMinConceptExamples = 10;

struct ConceptSet {
  std::string name;
  std::vector<EcgRecord> examples;

  // Throws kInvalidParams unless there are at least `min_examples` examples
  // sharing lead count and sampling rate.
  void validate(std::size_t min_examples = kMinConceptExamples) const;
};

struct Cav {
  std::string layer_name;
  std::string concept_name;
  std::vector<double> direction;  // unit norm, oriented toward the concept
  double train_accuracy = 0.0;    // on the fitting data
  double cv_accuracy = 0.0;       // k-fold, on held-out folds
  bool time_pooled = false;
};

struct CavOptions {
  double l2 = 1e-3;
  std::size_t iterations = 400;
  std::size_t folds = 5;
  // Average activations over time before fitting.
  bool pool_time = false;
  std::uint64_t seed = 0;
};

// L2-regularized logistic regression (full-batch gradient descent, fixed
// budget) separating concept activations (label 1) from random ones.
Cav train_cav(WrappedModel& model, const std::string& layer,
              const ConceptSet& concept_set, const std::vector<EcgRecord>& random_set,
              const CavOptions& options = {});

// Same fit on precomputed flattened activations (one row per example).
Cav fit_cav(const std::vector<std::vector<double>>& concept_features,
            const std::vector<std::vector<double>>& random_features,
            const CavOptions& options);

// Gradient of the postprocessed target output w.r.t. the layer activations,
// dotted with the CAV direction.
double directional_derivative(WrappedModel& model, const std::string& layer,
                              const Cav& cav, const EcgRecord& record,
                              std::size_t target);
double directional_derivative(const Cav& cav, const Tensor& layer_gradient);

// Fraction of inputs with a strictly positive directional derivative.
double tcav_score(WrappedModel& model, const std::string& layer,
                  const Cav& cav, const std::vector<EcgRecord>& inputs,
                  std::size_t target);

struct TcavEntry {
  std::string layer;
  std::string concept_name;
  double score = 0.0;  // mean of per_run_scores
  std::vector<double> per_run_scores;
  double ci_low = 0.0, ci_high = 0.0;  // clipped to [0, 1]
  double ci_low_raw = 0.0, ci_high_raw = 0.0;
  double p_value = 1.0;
  double t_critical = 0.0;
  std::size_t n_runs = 0;
  double mean_cv_accuracy = 0.0;
};

struct TcavResult {
  std::vector<TcavEntry> entries;
  double alpha = 0.05;
  std::vector<std::string> notes;

  const TcavEntry& at(const std::string& layer,
                      const std::string& concept_name) const;
};

struct TcavOptions {
  std::size_t n_runs = 10;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  // Random examples per run; 0 uses the concept's size.
  std::size_t random_set_size = 0;
  // Records are cropped or zero-padded to this duration when set.
  std::optional<double> input_duration_s;
  CavOptions cav{};
};

// n_runs CAVs per (layer, concept) against seeded random draws from the pool;
// score statistics use a two-sided one-sample t-test against 0.5.
TcavResult run_tcav(WrappedModel& model, const std::vector<std::string>& layers,
                    const std::vector<ConceptSet>& concepts,
                    const std::vector<EcgRecord>& random_pool,
                    const std::vector<EcgRecord>& inputs, std::size_t target,
                    const TcavOptions& options = {});

// Two-sided Student-t critical value t_{1 - alpha/2, dof}.
double t_critical(double alpha, std::size_t dof);

struct TTest {
  double mean, stddev, t, p_value;
};
// One-sample two-sided t-test; with zero spread, p is 1 when the mean equals
// mu0 and 0 otherwise.
TTest one_sample_t_test(const std::vector<double>& samples, double mu0);

EcgRecord fit_duration(const EcgRecord& record, double seconds);

// `<root>/<concept>/*.{csv,bin,hea}`; the `random` subdirectory fills
// `random_pool`. Directories and files are visited in sorted order.
std::vector<ConceptSet> load_concept_directory(
    const std::filesystem::path& root, std::vector<EcgRecord>& random_pool);

// Columns: layer, concept, score, ci_low, ci_high, p_value, n_runs.
void write_tcav_csv(const TcavResult& result, const std::filesystem::path& path);
TcavResult read_tcav_csv(const std::filesystem::path& path);

}  // namespace ecgx
