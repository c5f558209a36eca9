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
#include <numeric>
#include <random>

#include "ecgx/core/rng.hpp"
#include "ecgx/error.hpp"
#include "ecgx/synth/synth.hpp"

namespace ecgx::synth {

WrappedModel make_reference_model(const TaskType& task, std::size_t leads,
                                  std::uint64_t seed) {
  Rng rng = make_rng(seed, 7);
  nn::Network net;
  net.emplace<nn::Conv1d>("stem", leads, 8, 9, 2, 4).init(rng);
  net.emplace<nn::Relu>("stem_relu");
  net.emplace<nn::ResidualBlock>("conv1", 8, 8, 5, 2).init(rng);
  net.emplace<nn::ResidualBlock>("conv2", 8, 16, 5, 2).init(rng);
  net.emplace<nn::ResidualBlock>("conv3", 16, 16, 5, 2).init(rng);
  net.emplace<nn::GlobalAvgPool>("gap", true);
  net.emplace<nn::Conv1d>("fc", 16, task.num_outputs(), 1).init(rng);
  net.emplace<nn::Flatten>("flatten");
  WrappedModel model(std::move(net), task, {"conv1", "conv2", "conv3", "fc"});
  model.set_metadata({{"architecture", "resnet1d-reference"},
                      {"leads", leads}});
  return model;
}

namespace {

struct AdamState {
  std::vector<Tensor> m, v;
  std::size_t step = 0;
};

void adam_update(std::vector<nn::Parameter>& params, AdamState& state,
                 const TrainOptions& opt) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value->shape());
      state.v.emplace_back(p.value->shape());
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& w = *params[k].value;
    const Tensor& g = *params[k].grad;
    for (std::size_t i = 0; i < w.size(); ++i) {
      state.m[k][i] = kBeta1 * state.m[k][i] + (1 - kBeta1) * g[i];
      state.v[k][i] = kBeta2 * state.v[k][i] + (1 - kBeta2) * g[i] * g[i];
      w[i] -= opt.learning_rate * ((state.m[k][i] / c1) /
                                       (std::sqrt(state.v[k][i] / c2) + kEps) +
                                   opt.weight_decay * w[i]);
    }
  }
}

std::vector<int> labels_of(const AfDataset& dataset) {
  std::vector<int> labels;
  for (const auto& item : dataset.items) labels.push_back(item.label);
  return labels;
}

}  // namespace

double accuracy(WrappedModel& model, const AfDataset& dataset,
                std::span<const std::size_t> indices,
                const std::vector<int>* labels) {
  if (indices.empty()) return 0.0;
  std::size_t correct = 0;
  constexpr std::size_t kChunk = 32;
  for (std::size_t start = 0; start < indices.size(); start += kChunk) {
    const auto chunk =
        indices.subspan(start, std::min(kChunk, indices.size() - start));
    const auto records = dataset.records(chunk);
    const Tensor raw = model.forward_raw(make_batch(records));
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < raw.dim(1); ++j) {
        if (raw.at(b, j) > raw.at(b, best)) best = j;
      }
      const int truth =
          labels ? (*labels)[chunk[b]] : dataset.items[chunk[b]].label;
      if (static_cast<int>(best) == truth) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

TrainReport train_reference_model(WrappedModel& model,
                                  const AfDataset& dataset,
                                  const TrainOptions& options) {
  if (options.batch_size == 0 || !(options.learning_rate > 0.0) ||
      !(options.label_smoothing >= 0.0 && options.label_smoothing < 1.0) ||
      !(options.mixup_alpha >= 0.0)) {
    throw Error(ErrorCode::kInvalidParams,
                "batch_size and learning_rate must be positive, "
                "label_smoothing in [0, 1), mixup_alpha >= 0");
  }
  std::vector<int> labels = labels_of(dataset);
  if (options.shuffle_labels) {
    Rng rng = make_rng(options.seed, 3);
    std::vector<int> train_labels;
    for (std::size_t i : dataset.train) train_labels.push_back(labels[i]);
    std::shuffle(train_labels.begin(), train_labels.end(), rng);
    for (std::size_t k = 0; k < dataset.train.size(); ++k) {
      labels[dataset.train[k]] = train_labels[k];
    }
  }

  nn::Network& net = model.network();
  net.set_param_grads(true);
  auto params = net.parameters();
  AdamState adam;
  TrainReport report;
  std::vector<std::size_t> order = dataset.train;
  Rng rng = make_rng(options.seed, 4);
  const std::size_t n_out = model.task().num_outputs();

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += options.batch_size) {
      const std::span<const std::size_t> chunk(
          order.data() + start,
          std::min(options.batch_size, order.size() - start));
      Tensor batch = make_batch(dataset.records(chunk));
      const std::size_t n = chunk.size();
      const double on = 1.0 - options.label_smoothing;
      const double off =
          n_out > 1 ? options.label_smoothing / static_cast<double>(n_out - 1)
                    : 0.0;
      Tensor targets({n, n_out}, off);
      for (std::size_t b = 0; b < n; ++b) {
        targets.at(b, static_cast<std::size_t>(labels[chunk[b]])) = on;
      }
      if (options.mixup_alpha > 0.0 && n > 1) {
        const Tensor clean = batch;
        const Tensor clean_targets = targets;
        std::gamma_distribution<double> gamma(options.mixup_alpha, 1.0);
        const std::size_t per = batch.size() / n;
        for (std::size_t b = 0; b < n; ++b) {
          const double g1 = gamma(rng), g2 = gamma(rng);
          const double lam = g1 + g2 > 0.0 ? g1 / (g1 + g2) : 1.0;
          const std::size_t partner = n - 1 - b;
          for (std::size_t i = 0; i < per; ++i) {
            batch[b * per + i] = lam * clean[b * per + i] +
                                 (1.0 - lam) * clean[partner * per + i];
          }
          for (std::size_t j = 0; j < n_out; ++j) {
            targets.at(b, j) = lam * clean_targets.at(b, j) +
                               (1.0 - lam) * clean_targets.at(partner, j);
          }
        }
      }
      const Tensor raw = net.forward(model.preprocess(batch));
      const Tensor prob = apply_output_transform(OutputTransform::kSoftmax, raw);
      Tensor grad(raw.shape());
      const double scale = 1.0 / static_cast<double>(n);
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t j = 0; j < n_out; ++j) {
          const double target = targets.at(b, j);
          loss_sum -= target * std::log(std::max(prob.at(b, j), 1e-300));
          grad.at(b, j) = (prob.at(b, j) - target) * scale;
        }
      }
      net.zero_grads();
      net.backward(grad, nn::BackwardMode::kStandard);
      adam_update(params, adam, options);
    }
    const double mean_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(mean_loss)) {
      net.set_param_grads(false);
      throw Error(ErrorCode::kTrainingDivergence,
                  "loss diverged in epoch " + std::to_string(epoch));
    }
    report.epoch_loss.push_back(mean_loss);
  }
  net.set_param_grads(false);
  report.val_accuracy = accuracy(model, dataset, dataset.val, &labels);
  report.test_accuracy = accuracy(model, dataset, dataset.test, &labels);
  return report;
}

}  // namespace ecgx::synth
