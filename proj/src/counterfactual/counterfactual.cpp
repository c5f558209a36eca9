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

#include "ecgx/counterfactual/counterfactual.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "ecgx/core/rng.hpp"
#include "ecgx/error.hpp"

namespace ecgx {

namespace {

void check_rates(int old_rate, int new_rate) {
  if (old_rate <= 0 || new_rate <= 0) {
    throw Error(ErrorCode::kNonpositiveRate, "sampling rates must be > 0");
  }
}

// Source position of output sample j, clamped to the input.
struct Tap {
  std::size_t i;
  double frac;
};

Tap tap(std::size_t j, int old_rate, int new_rate, std::size_t input_length) {
  const double u = static_cast<double>(j) * old_rate / new_rate;
  const auto last = static_cast<double>(input_length - 1);
  if (u >= last) return {input_length - 1, 0.0};
  const auto i = static_cast<std::size_t>(u);
  return {i, u - static_cast<double>(i)};
}

double squared_norm_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

Tensor resample_signal(const Tensor& signal, int old_rate, int new_rate,
                       std::size_t length) {
  check_rates(old_rate, new_rate);
  if (signal.rank() != 2 || signal.dim(1) == 0) {
    throw Error(ErrorCode::kShapeMismatch, "resampling expects (L, T)");
  }
  const std::size_t leads = signal.dim(0);
  const std::size_t samples = signal.dim(1);
  Tensor out({leads, length});
  for (std::size_t j = 0; j < length; ++j) {
    const Tap t = tap(j, old_rate, new_rate, samples);
    for (std::size_t l = 0; l < leads; ++l) {
      const double a = signal.at(l, t.i);
      out.at(l, j) =
          t.frac == 0.0 ? a : a + t.frac * (signal.at(l, t.i + 1) - a);
    }
  }
  return out;
}

Tensor resample_signal_adjoint(const Tensor& grad, int old_rate, int new_rate,
                               std::size_t input_length) {
  check_rates(old_rate, new_rate);
  const std::size_t leads = grad.dim(0);
  Tensor out({leads, input_length});
  for (std::size_t j = 0; j < grad.dim(1); ++j) {
    const Tap t = tap(j, old_rate, new_rate, input_length);
    for (std::size_t l = 0; l < leads; ++l) {
      const double g = grad.at(l, j);
      out.at(l, t.i) += (1.0 - t.frac) * g;
      if (t.frac != 0.0) out.at(l, t.i + 1) += t.frac * g;
    }
  }
  return out;
}

EcgRecord resample(const EcgRecord& record, int new_rate) {
  check_rates(record.sampling_rate(), new_rate);
  if (new_rate == record.sampling_rate()) return record;
  const auto length = static_cast<std::size_t>(std::llround(
      static_cast<double>(record.num_samples()) * new_rate /
      record.sampling_rate()));
  return EcgRecord(resample_signal(record.signal(), record.sampling_rate(),
                                   new_rate, std::max<std::size_t>(length, 2)),
                   new_rate, record.lead_names());
}

Inversion invert(const EcgGenerator& generator, const EcgRecord& record,
                 const InvertOptions& options) {
  if (record.sampling_rate() != generator.sampling_rate() ||
      record.num_leads() != generator.num_leads() ||
      record.num_samples() != generator.num_samples()) {
    throw Error(ErrorCode::kShapeMismatch,
                "record does not match the generator's rate and shape");
  }
  if (options.restarts < 1) {
    throw Error(ErrorCode::kInvalidParams, "restarts must be >= 1");
  }
  const std::size_t dim = generator.latent_dim();
  const Tensor& target = record.signal();
  const double inv_n = 1.0 / static_cast<double>(target.size());
  Rng rng = make_rng(options.seed, 11);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto mse_of = [&](const std::vector<double>& z, Tensor* residual) {
    Tensor out = generator.generate(z);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] -= target[i];
      s += out[i] * out[i];
    }
    if (residual) *residual = std::move(out);
    return s * inv_n;
  };

  Inversion best{{}, std::numeric_limits<double>::infinity()};
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    std::vector<double> z(dim);
    for (double& v : z) v = normal(rng);
    std::vector<double> m(dim, 0.0), v(dim, 0.0);
    std::vector<double> best_z = z;
    double best_mse = std::numeric_limits<double>::infinity();
    for (std::size_t step = 0; step <= options.steps; ++step) {
      Tensor residual;
      const double mse = mse_of(z, &residual);
      if (!std::isfinite(mse)) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    "reconstruction loss became non-finite");
      }
      if (mse < best_mse) {
        best_mse = mse;
        best_z = z;
      }
      if (step == options.steps) break;
      residual *= 2.0 * inv_n;
      const auto g = generator.vjp(z, residual);
      const double t = static_cast<double>(step + 1);
      const double c1 = 1.0 - std::pow(kBeta1, t);
      const double c2 = 1.0 - std::pow(kBeta2, t);
      for (std::size_t i = 0; i < dim; ++i) {
        m[i] = kBeta1 * m[i] + (1 - kBeta1) * g[i];
        v[i] = kBeta2 * v[i] + (1 - kBeta2) * g[i] * g[i];
        z[i] -= options.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
      }
    }
    if (best_mse < best.mse) best = {best_z, best_mse};
  }
  return best;
}

namespace {

struct Evaluation {
  double pred;
  double pred_term;
  double proximity_term;
  double total;
};

class CfObjective {
 public:
  CfObjective(WrappedModel& model, const EcgGenerator& generator,
              const EcgRecord& record, std::size_t target,
              const CounterfactualOptions& options, std::vector<double> z0)
      : model_(model),
        generator_(generator),
        record_(record),
        target_(target),
        options_(options),
        z0_(std::move(z0)) {}

  Tensor signal(std::span<const double> z) const {
    return resample_signal(generator_.generate(z), generator_.sampling_rate(),
                           record_.sampling_rate(), record_.num_samples());
  }

  Evaluation evaluate(std::span<const double> z) {
    const Tensor x = signal(z);
    const double pred =
        model_.predict(x.reshaped({1, x.dim(0), x.dim(1)}), target_).at(0, 0);
    return terms(z, pred);
  }

  Evaluation terms(std::span<const double> z, double pred) const {
    const double diff = pred - options_.target_value;
    const double prox = options_.lambda_prox * squared_norm_diff(z, z0_);
    return {pred, diff * diff, prox, diff * diff + prox};
  }

  std::vector<double> gradient(std::span<const double> z, Evaluation& eval) {
    const Tensor x = signal(z);
    const Tensor batch = x.reshaped({1, x.dim(0), x.dim(1)});
    const double pred = model_.predict(batch, target_, true).at(0, 0);
    eval = terms(z, pred);
    const Tensor dx = model_.backward(
        Tensor({1, 1}, 2.0 * (pred - options_.target_value)));
    const Tensor dg = resample_signal_adjoint(
        dx.reshaped({x.dim(0), x.dim(1)}), generator_.sampling_rate(),
        record_.sampling_rate(), generator_.num_samples());
    auto g = generator_.vjp(z, dg);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += 2.0 * options_.lambda_prox * (z[i] - z0_[i]);
    }
    return g;
  }

 private:
  WrappedModel& model_;
  const EcgGenerator& generator_;
  const EcgRecord& record_;
  std::size_t target_;
  const CounterfactualOptions& options_;
  std::vector<double> z0_;
};

}  // namespace

CounterfactualResult explain_cf(WrappedModel& model,
                                const EcgGenerator& generator,
                                const EcgRecord& record, std::size_t target,
                                const CounterfactualOptions& options) {
  if (!(options.step_size > 0.0) || !(options.lambda_prox >= 0.0) ||
      !(options.tol >= 0.0)) {
    throw Error(ErrorCode::kInvalidParams,
                "step_size must be > 0; lambda_prox and tol >= 0");
  }
  if (record.num_leads() != generator.num_leads()) {
    throw Error(ErrorCode::kShapeMismatch,
                "record has " + std::to_string(record.num_leads()) +
                    " leads, generator " +
                    std::to_string(generator.num_leads()));
  }
  if (model.task().is_classification() &&
      !(options.target_value >= 0.0 && options.target_value <= 1.0)) {
    throw Error(ErrorCode::kInvalidParams,
                "target_value must lie in [0, 1] for probability outputs");
  }

  CounterfactualResult result{.original = record, .counterfactual = record};
  result.target_value = options.target_value;
  result.original_pred = model.predict(record.as_batch(), target).at(0, 0);

  Inversion inv;
  try {
    Tensor fitted = resample_signal(record.signal(), record.sampling_rate(),
                                    generator.sampling_rate(),
                                    generator.num_samples());
    inv = invert(generator, EcgRecord(std::move(fitted), generator.sampling_rate()),
                 options.inversion);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInversionFailed, e.what());
  }
  result.z_init = inv.z;
  result.inversion_mse = inv.mse;

  CfObjective objective(model, generator, record, target, options, inv.z);
  std::vector<double> z = inv.z;
  double step = options.step_size;
  Evaluation current{};
  auto grad = objective.gradient(z, current);
  result.loss_trace.push_back(
      {0, current.total, current.pred_term, current.proximity_term});
  std::size_t since_improvement = 0;
  result.stop_reason = "max-steps";

  for (std::size_t it = 1;; ++it) {
    if (std::abs(current.pred - options.target_value) <= options.tol) {
      result.converged = true;
      result.stop_reason = "tolerance";
      break;
    }
    if (it > options.max_steps) break;
    std::vector<double> trial(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) trial[i] = z[i] - step * grad[i];
    const Evaluation next = objective.evaluate(trial);
    if (!std::isfinite(next.total)) {
      throw Error(ErrorCode::kNonFiniteLoss, "counterfactual loss is not finite");
    }
    if (next.total < current.total - 1e-12) {
      z = std::move(trial);
      grad = objective.gradient(z, current);
      result.loss_trace.push_back(
          {it, current.total, current.pred_term, current.proximity_term});
      since_improvement = 0;
    } else {
      step *= 0.5;
      if (++since_improvement >= options.patience) {
        result.stop_reason = "no-improvement";
        break;
      }
    }
  }

  result.z_final = z;
  result.cf_pred = current.pred;
  Tensor cf = objective.signal(z);
  result.counterfactual =
      EcgRecord(std::move(cf), record.sampling_rate(), record.lead_names());
  return result;
}

void write_loss_trace(const CounterfactualResult& result,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kUnwritablePath, "cannot write " + path.string());
  out << "step,total,pred_term,proximity_term\n";
  char line[160];
  for (const auto& p : result.loss_trace) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g\n", p.step,
                  p.total, p.pred_term, p.proximity_term);
    out << line;
  }
}

}  // namespace ecgx
