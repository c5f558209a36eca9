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

#include "ecgx/tcav/tcav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "ecgx/core/io.hpp"
#include "ecgx/core/rng.hpp"
#include "ecgx/error.hpp"

namespace ecgx {

namespace {

using Rows = std::vector<std::vector<double>>;

void check_layer(const WrappedModel& model, const std::string& layer,
                 const Cav& cav) {
  const auto& names = model.layer_names();
  if (std::find(names.begin(), names.end(), layer) == names.end()) {
    throw Error(ErrorCode::kUnknownLayer, "unknown layer '" + layer + "'");
  }
  if (cav.layer_name != layer) {
    throw Error(ErrorCode::kInvalidParams, "CAV was trained at layer '" +
                                               cav.layer_name + "', not '" +
                                               layer + "'");
  }
}

constexpr std::size_t kFeatureBatch = 16;
constexpr std::size_t kPowerIterations = 60;

std::vector<double> layer_row(const Tensor& batch_activations, std::size_t b,
                              bool pool_time) {
  const std::size_t channels = batch_activations.dim(1);
  const std::size_t positions = batch_activations.dim(2);
  const double* base = batch_activations.data() + b * channels * positions;
  if (!pool_time) return {base, base + channels * positions};
  std::vector<double> row(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* p = base + c * positions;
    row[c] = std::accumulate(p, p + positions, 0.0) / positions;
  }
  return row;
}

void check_rank(const FeatureCapture& c) {
  if (c.activations.rank() != 3) {
    throw Error(ErrorCode::kLayerRankMismatch,
                "layer '" + c.layer_name + "' is not (B, C, T')");
  }
}

// Per layer, one feature row per record.
std::vector<Rows> layer_features(WrappedModel& model,
                                 const std::vector<std::string>& layers,
                                 const std::vector<EcgRecord>& records,
                                 bool pool_time) {
  std::vector<Rows> out(layers.size());
  for (std::size_t start = 0; start < records.size(); start += kFeatureBatch) {
    const std::size_t stop = std::min(records.size(), start + kFeatureBatch);
    const Tensor batch = make_batch(
        std::span<const EcgRecord>(records.data() + start, stop - start));
    const auto captures = model.get_features(batch, layers, 0, false);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      check_rank(captures[l]);
      for (std::size_t b = 0; b < stop - start; ++b) {
        out[l].push_back(layer_row(captures[l].activations, b, pool_time));
      }
    }
  }
  return out;
}

struct Fit {
  std::vector<double> w;
  double bias = 0.0;
};

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double sigmoid(double v) {
  return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

// Largest eigenvalue of X~ X~^T / n, X~ = [X, 1], by power iteration on the
// n x n Gram matrix.
double gram_spectral_radius(const Rows& x) {
  const std::size_t n = x.size();
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double g = (dot(x[i], x[j]) + 1.0) / n;
      gram[i * n + j] = gram[j * n + i] = g;
    }
  }
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), next(n);
  double lambda = 0.0;
  for (std::size_t it = 0; it < kPowerIterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = dot(std::span(gram).subspan(i * n, n), v);
    }
    lambda = std::sqrt(dot(next, next));
    if (lambda == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = next[i] / lambda;
  }
  return lambda;
}

// Mean logistic loss plus l2/2 |w|^2, bias unpenalized; gradient descent at
// step 1/L with L the smoothness constant.
Fit fit_logistic(const Rows& x, const std::vector<int>& y, double l2,
                 std::size_t iterations) {
  const std::size_t n = x.size();
  const std::size_t d = x.front().size();
  const double step = 1.0 / (0.25 * gram_spectral_radius(x) * 1.001 + l2);
  Fit fit{std::vector<double>(d, 0.0), 0.0};
  std::vector<double> grad(d);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = (sigmoid(dot(fit.w, x[i]) + fit.bias) - y[i]) / n;
      grad_bias += r;
      for (std::size_t k = 0; k < d; ++k) grad[k] += r * x[i][k];
    }
    for (std::size_t k = 0; k < d; ++k) {
      fit.w[k] -= step * (grad[k] + l2 * fit.w[k]);
    }
    fit.bias -= step * grad_bias;
  }
  return fit;
}

double fit_accuracy(const Fit& fit, const Rows& x, const std::vector<int>& y,
                    const std::vector<std::size_t>& rows) {
  std::size_t hits = 0;
  for (std::size_t i : rows) {
    const int predicted = dot(fit.w, x[i]) + fit.bias > 0.0 ? 1 : 0;
    hits += predicted == y[i];
  }
  return static_cast<double>(hits) / rows.size();
}

// Stratified k-fold held-out accuracy; NaN when either class has fewer than
// two examples.
double cross_validated_accuracy(const Rows& x, const std::vector<int>& y,
                                const CavOptions& options) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  const std::size_t folds = std::min(
      {options.folds, by_class[0].size(), by_class[1].size()});
  if (folds < 2) return std::numeric_limits<double>::quiet_NaN();

  Rng rng = make_rng(options.seed, 7);
  std::vector<std::size_t> fold_of(y.size());
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t r = 0; r < members.size(); ++r) {
      fold_of[members[r]] = r % folds;
    }
  }
  std::size_t hits = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    Rows train_x;
    std::vector<int> train_y;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold_of[i] == f) {
        held.push_back(i);
      } else {
        train_x.push_back(x[i]);
        train_y.push_back(y[i]);
      }
    }
    const Fit fit = fit_logistic(train_x, train_y, options.l2,
                                 options.iterations);
    hits += static_cast<std::size_t>(
        std::lround(fit_accuracy(fit, x, y, held) * held.size()));
  }
  return static_cast<double>(hits) / y.size();
}

double flat_gradient_dot(const Cav& cav, const double* g, std::size_t channels,
                         std::size_t positions) {
  if (!cav.time_pooled) {
    if (cav.direction.size() != channels * positions) {
      throw Error(ErrorCode::kShapeMismatch,
                  "CAV length " + std::to_string(cav.direction.size()) +
                      " does not match layer size " +
                      std::to_string(channels * positions));
    }
    return std::inner_product(g, g + channels * positions,
                              cav.direction.begin(), 0.0);
  }
  if (cav.direction.size() != channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "pooled CAV length does not match channel count");
  }
  double s = 0.0;
  for (std::size_t c = 0; c < channels; ++c) {
    const double* p = g + c * positions;
    s += cav.direction[c] * std::accumulate(p, p + positions, 0.0) / positions;
  }
  return s;
}

// Derivatives of every input along `cav`, gradients taken in one pass per
// batch.
std::vector<double> derivatives(const Cav& cav, const Tensor& gradients) {
  const std::size_t channels = gradients.dim(1);
  const std::size_t positions = gradients.dim(2);
  std::vector<double> out(gradients.dim(0));
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b] = flat_gradient_dot(
        cav, gradients.data() + b * channels * positions, channels, positions);
  }
  return out;
}

double positive_fraction(const std::vector<double>& values) {
  const auto positive = std::count_if(values.begin(), values.end(),
                                      [](double v) { return v > 0.0; });
  return static_cast<double>(positive) / values.size();
}

// Per layer: (N, C, T') gradients of output[:, target] for all inputs.
std::vector<Tensor> input_layer_gradients(WrappedModel& model,
                                          const std::vector<std::string>& layers,
                                          const std::vector<EcgRecord>& inputs,
                                          std::size_t target) {
  std::vector<std::vector<Tensor>> parts(layers.size());
  for (std::size_t start = 0; start < inputs.size(); start += kFeatureBatch) {
    const std::size_t stop = std::min(inputs.size(), start + kFeatureBatch);
    const Tensor batch = make_batch(
        std::span<const EcgRecord>(inputs.data() + start, stop - start));
    auto captures = model.get_features(batch, layers, target, true);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      check_rank(captures[l]);
      const Tensor& g = *captures[l].gradients;
      for (std::size_t b = 0; b < g.dim(0); ++b) parts[l].push_back(g.slice0(b));
    }
  }
  std::vector<Tensor> out;
  for (auto& p : parts) out.push_back(stack(p));
  return out;
}

}  // namespace

void ConceptSet::validate(std::size_t min_examples) const {
  if (examples.size() < min_examples) {
    throw Error(ErrorCode::kInvalidParams,
                "concept '" + name + "' has " + std::to_string(examples.size()) +
                    " examples, needs at least " + std::to_string(min_examples));
  }
  for (const auto& e : examples) {
    if (e.num_leads() != examples.front().num_leads() ||
        e.sampling_rate() != examples.front().sampling_rate()) {
      throw Error(ErrorCode::kInvalidParams,
                  "concept '" + name + "' mixes lead counts or rates");
    }
  }
}

Cav fit_cav(const std::vector<std::vector<double>>& concept_features,
            const std::vector<std::vector<double>>& random_features,
            const CavOptions& options) {
  if (concept_features.empty() || random_features.empty()) {
    throw Error(ErrorCode::kInvalidParams,
                "CAV fitting needs concept and random examples");
  }
  const std::size_t d = concept_features.front().size();
  Rows x;
  std::vector<int> y;
  for (const auto& r : concept_features) x.push_back(r), y.push_back(1);
  for (const auto& r : random_features) x.push_back(r), y.push_back(0);
  for (const auto& r : x) {
    if (r.size() != d) {
      throw Error(ErrorCode::kShapeMismatch, "feature rows differ in length");
    }
  }

  std::vector<double> mean(d, 0.0);
  for (const auto& r : x) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += r[k] / x.size();
  }
  bool varies = false;
  for (auto& r : x) {
    for (std::size_t k = 0; k < d; ++k) {
      r[k] -= mean[k];
      varies = varies || std::abs(r[k]) > 1e-12 * (1.0 + std::abs(mean[k]));
    }
  }
  if (!varies) {
    throw Error(ErrorCode::kDegenerateActivations,
                "activations have zero variance");
  }

  const Fit fit = fit_logistic(x, y, options.l2, options.iterations);
  const double norm = std::sqrt(dot(fit.w, fit.w));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kDegenerateActivations,
                "classifier weights vanished");
  }
  Cav cav;
  cav.direction.resize(d);
  for (std::size_t k = 0; k < d; ++k) cav.direction[k] = fit.w[k] / norm;
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), 0);
  cav.train_accuracy = fit_accuracy(fit, x, y, all);
  cav.cv_accuracy = options.folds >= 2
                        ? cross_validated_accuracy(x, y, options)
                        : std::numeric_limits<double>::quiet_NaN();
  cav.time_pooled = options.pool_time;
  return cav;
}

Cav train_cav(WrappedModel& model, const std::string& layer,
              const ConceptSet& concept_set, const std::vector<EcgRecord>& random_set,
              const CavOptions& options) {
  concept_set.validate();
  if (random_set.empty()) {
    throw Error(ErrorCode::kInvalidParams, "random set must be non-empty");
  }
  auto concept_rows =
      layer_features(model, {layer}, concept_set.examples, options.pool_time);
  auto random_rows = layer_features(model, {layer}, random_set, options.pool_time);
  Cav cav = fit_cav(concept_rows.front(), random_rows.front(), options);
  cav.layer_name = layer;
  cav.concept_name = concept_set.name;
  return cav;
}

double directional_derivative(const Cav& cav, const Tensor& layer_gradient) {
  if (layer_gradient.rank() == 3 && layer_gradient.dim(0) == 1) {
    return flat_gradient_dot(cav, layer_gradient.data(), layer_gradient.dim(1),
                             layer_gradient.dim(2));
  }
  if (layer_gradient.rank() == 2) {
    return flat_gradient_dot(cav, layer_gradient.data(), layer_gradient.dim(0),
                             layer_gradient.dim(1));
  }
  throw Error(ErrorCode::kLayerRankMismatch,
              "expected a (C, T') or (1, C, T') gradient, got " +
                  shape_string(layer_gradient.shape()));
}

double directional_derivative(WrappedModel& model, const std::string& layer,
                              const Cav& cav, const EcgRecord& record,
                              std::size_t target) {
  check_layer(model, layer, cav);
  auto captures = model.get_features(record.as_batch(), {layer}, target, true);
  check_rank(captures.front());
  return directional_derivative(cav, *captures.front().gradients);
}

double tcav_score(WrappedModel& model, const std::string& layer,
                  const Cav& cav, const std::vector<EcgRecord>& inputs,
                  std::size_t target) {
  if (inputs.empty()) {
    throw Error(ErrorCode::kInvalidParams, "TCAV needs at least one input");
  }
  check_layer(model, layer, cav);
  const auto grads = input_layer_gradients(model, {layer}, inputs, target);
  return positive_fraction(derivatives(cav, grads.front()));
}

const TcavEntry& TcavResult::at(const std::string& layer,
                                const std::string& concept_name) const {
  for (const auto& e : entries) {
    if (e.layer == layer && e.concept_name == concept_name) return e;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "no TCAV entry for (" + layer + ", " + concept_name + ")");
}

double t_critical(double alpha, std::size_t dof) {
  if (!(alpha > 0.0 && alpha < 1.0) || dof == 0) {
    throw Error(ErrorCode::kInvalidParams, "t_critical needs 0 < alpha < 1, dof >= 1");
  }
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 1.0 - alpha / 2.0);
}

TTest one_sample_t_test(const std::vector<double>& samples, double mu0) {
  const std::size_t n = samples.size();
  if (n < 2) {
    throw Error(ErrorCode::kInvalidParams, "t-test needs at least two samples");
  }
  TTest r{};
  r.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : samples) ss += (s - r.mean) * (s - r.mean);
  r.stddev = std::sqrt(ss / (n - 1));
  const double diff = r.mean - mu0;
  if (r.stddev == 0.0) {
    r.t = diff == 0.0 ? 0.0 : std::copysign(
                                  std::numeric_limits<double>::infinity(), diff);
    r.p_value = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = diff / (r.stddev / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

EcgRecord fit_duration(const EcgRecord& record, double seconds) {
  if (!(seconds > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "input_duration must be positive");
  }
  const auto target =
      static_cast<std::size_t>(std::lround(seconds * record.sampling_rate()));
  if (target == record.num_samples()) return record;
  const std::size_t leads = record.num_leads();
  Tensor out({leads, std::max<std::size_t>(target, 2)});
  const std::size_t keep = std::min(record.num_samples(), out.dim(1));
  for (std::size_t l = 0; l < leads; ++l) {
    for (std::size_t t = 0; t < keep; ++t) out.at(l, t) = record.value(l, t);
  }
  return record.with_signal(std::move(out));
}

TcavResult run_tcav(WrappedModel& model, const std::vector<std::string>& layers,
                    const std::vector<ConceptSet>& concepts,
                    const std::vector<EcgRecord>& random_pool,
                    const std::vector<EcgRecord>& inputs, std::size_t target,
                    const TcavOptions& options) {
  if (layers.empty() || concepts.empty() || inputs.empty()) {
    throw Error(ErrorCode::kInvalidParams,
                "run_tcav needs layers, concepts and inputs");
  }
  if (options.n_runs < 2) {
    throw Error(ErrorCode::kInvalidParams, "n_runs must be >= 2");
  }
  std::size_t largest_draw = 0;
  for (const auto& c : concepts) {
    c.validate();
    largest_draw = std::max(largest_draw, options.random_set_size > 0
                                              ? options.random_set_size
                                              : c.examples.size());
  }
  // Every run needs a full draw, and distinct runs need a pool that is not
  // exhausted by a single draw.
  if (random_pool.size() <= largest_draw) {
    throw Error(ErrorCode::kInsufficientRandomPool,
                "random pool of " + std::to_string(random_pool.size()) +
                    " cannot supply varied draws of " +
                    std::to_string(largest_draw));
  }

  TcavResult result;
  result.alpha = options.alpha;
  auto prepare = [&](const std::vector<EcgRecord>& records) {
    if (!options.input_duration_s) return records;
    std::vector<EcgRecord> out;
    for (const auto& r : records) out.push_back(fit_duration(r, *options.input_duration_s));
    return out;
  };
  if (options.input_duration_s) {
    char note[96];
    std::snprintf(note, sizeof(note),
                  "records cropped or zero-padded to %.6g s",
                  *options.input_duration_s);
    result.notes.emplace_back(note);
  }

  const bool pool = options.cav.pool_time;
  const auto input_grads =
      input_layer_gradients(model, layers, prepare(inputs), target);
  const auto pool_rows = layer_features(model, layers, prepare(random_pool), pool);

  // Random draws depend only on (run, draw size), so every layer and concept
  // of a run sees the same random set.
  std::vector<std::size_t> pool_order(random_pool.size());
  std::iota(pool_order.begin(), pool_order.end(), 0);
  std::vector<std::vector<std::size_t>> run_orders;
  for (std::size_t run = 0; run < options.n_runs; ++run) {
    Rng rng = make_rng(options.seed, 100 + run);
    std::vector<std::size_t> order = pool_order;
    std::shuffle(order.begin(), order.end(), rng);
    run_orders.push_back(std::move(order));
  }
  const double tcrit = t_critical(options.alpha, options.n_runs - 1);

  for (std::size_t ci = 0; ci < concepts.size(); ++ci) {
    const ConceptSet& concept_set = concepts[ci];
    const auto concept_rows =
        layer_features(model, layers, prepare(concept_set.examples), pool);
    const std::size_t draw = options.random_set_size > 0
                                 ? options.random_set_size
                                 : concept_set.examples.size();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      TcavEntry entry;
      entry.layer = layers[l];
      entry.concept_name = concept_set.name;
      entry.n_runs = options.n_runs;
      entry.t_critical = tcrit;
      double cv_sum = 0.0;
      for (std::size_t run = 0; run < options.n_runs; ++run) {
        Rows random_rows;
        for (std::size_t k = 0; k < draw; ++k) {
          random_rows.push_back(pool_rows[l][run_orders[run][k]]);
        }
        CavOptions cav_options = options.cav;
        cav_options.seed = derive_seed(options.seed, 1000 * (ci + 1) + run);
        Cav cav = fit_cav(concept_rows[l], random_rows, cav_options);
        cav.layer_name = layers[l];
        cav.concept_name = concept_set.name;
        cv_sum += cav.cv_accuracy;
        entry.per_run_scores.push_back(
            positive_fraction(derivatives(cav, input_grads[l])));
      }
      const TTest test = one_sample_t_test(entry.per_run_scores, 0.5);
      const double half =
          tcrit * test.stddev / std::sqrt(static_cast<double>(options.n_runs));
      entry.score = test.mean;
      entry.ci_low_raw = test.mean - half;
      entry.ci_high_raw = test.mean + half;
      entry.ci_low = std::clamp(entry.ci_low_raw, 0.0, 1.0);
      entry.ci_high = std::clamp(entry.ci_high_raw, 0.0, 1.0);
      entry.p_value = test.p_value;
      entry.mean_cv_accuracy = cv_sum / options.n_runs;
      result.entries.push_back(std::move(entry));
    }
  }
  return result;
}

std::vector<ConceptSet> load_concept_directory(
    const std::filesystem::path& root, std::vector<EcgRecord>& random_pool) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kFileNotFound, "concept directory " + root.string());
  }
  auto sorted_entries = [](const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
  };
  auto load_records = [&](const fs::path& dir) {
    std::vector<EcgRecord> records;
    for (const auto& file : sorted_entries(dir)) {
      if (!fs::is_regular_file(file)) continue;
      const auto format = format_from_extension(file);
      if (format) records.push_back(load_ecg(file, *format));
    }
    return records;
  };

  std::vector<ConceptSet> concepts;
  bool have_random = false;
  for (const auto& dir : sorted_entries(root)) {
    if (!fs::is_directory(dir)) continue;
    const std::string name = dir.filename().string();
    if (name == "random") {
      random_pool = load_records(dir);
      have_random = true;
    } else {
      concepts.push_back({name, load_records(dir)});
    }
  }
  if (!have_random) {
    throw Error(ErrorCode::kInsufficientRandomPool,
                "no random/ subdirectory under " + root.string());
  }
  return concepts;
}

void write_tcav_csv(const TcavResult& result, const std::filesystem::path& path) {
  if (result.entries.empty()) {
    throw Error(ErrorCode::kEmptyResults, "no TCAV entries to write");
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kUnwritablePath, "cannot write " + path.string());
  out << "layer,concept,score,ci_low,ci_high,p_value,n_runs\n";
  char line[160];
  for (const auto& e : result.entries) {
    std::snprintf(line, sizeof(line), ",%.17g,%.17g,%.17g,%.17g,%zu\n", e.score,
                  e.ci_low, e.ci_high, e.p_value, e.n_runs);
    out << e.layer << ',' << e.concept_name << line;
  }
}

TcavResult read_tcav_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::string line;
  std::getline(in, line);
  if (line != "layer,concept,score,ci_low,ci_high,p_value,n_runs") {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": unexpected header");
  }
  TcavResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) {
      throw Error(ErrorCode::kInvalidArgument, path.string() + ": bad row '" + line + "'");
    }
    TcavEntry e;
    try {
      e.layer = cells[0];
      e.concept_name = cells[1];
      e.score = std::stod(cells[2]);
      e.ci_low = e.ci_low_raw = std::stod(cells[3]);
      e.ci_high = e.ci_high_raw = std::stod(cells[4]);
      e.p_value = std::stod(cells[5]);
      e.n_runs = std::stoul(cells[6]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, path.string() + ": bad number in '" + line + "'");
    }
    result.entries.push_back(std::move(e));
  }
  return result;
}

}  // namespace ecgx
