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

#include "ecgx/attribution/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ecgx/core/hash.hpp"
#include "ecgx/core/rng.hpp"
#include "ecgx/error.hpp"

namespace ecgx {

namespace {

AttributionResult make_result(const WrappedModel& model,
                              const EcgRecord& record, std::string method,
                              std::size_t target, nlohmann::json params,
                              std::uint64_t seed, Tensor scores) {
  AttributionResult r;
  r.scores = std::move(scores);
  r.method = std::move(method);
  r.target = target;
  r.params = std::move(params);
  r.run_config.seed = seed;
  r.run_config.method_name = r.method;
  r.run_config.method_params = r.params;
  r.run_config.model_id = model.model_id();
  r.run_config.input_fingerprint = fingerprint(record);
  return r;
}

Tensor record_gradient(WrappedModel& model, const Tensor& batch,
                       std::size_t target, GradOptions options = {}) {
  Tensor g = model.input_gradient(batch, target, options);
  return g.reshaped({g.dim(1), g.dim(2)});
}

Tensor absolute(Tensor t) {
  for (double& v : t.values()) v = std::abs(v);
  return t;
}

FeatureCapture capture_raw(WrappedModel& model, const EcgRecord& record,
                           std::size_t target, const std::string& layer) {
  auto captures = model.get_features(record.as_batch(), {layer}, target, true,
                                     {GradSpace::kRaw});
  FeatureCapture c = std::move(captures.front());
  if (c.activations.rank() != 3 || c.activations.dim(0) != 1) {
    throw Error(ErrorCode::kLayerRankMismatch,
                "layer '" + layer + "' did not yield (1, C, T') activations");
  }
  return c;
}

std::vector<double> upsampled_cam(WrappedModel& model, const EcgRecord& record,
                                  std::size_t target, const std::string& layer,
                                  CamVariant variant) {
  const FeatureCapture c = capture_raw(model, record, target, layer);
  const std::size_t channels = c.activations.dim(1);
  const std::size_t positions = c.activations.dim(2);
  const auto map =
      cam_map(c.activations.reshaped({channels, positions}),
              c.gradients->reshaped({channels, positions}), variant);
  return upsample_linear(map, record.num_samples());
}

}  // namespace

AttributionResult saliency(WrappedModel& model, const EcgRecord& record,
                           std::size_t target) {
  Tensor g = absolute(record_gradient(model, record.as_batch(), target));
  return make_result(model, record, "saliency", target,
                     {{"gradient_space", "postprocessed"}}, 0, std::move(g));
}

AttributionResult smoothgrad(WrappedModel& model, const EcgRecord& record,
                             std::size_t target,
                             const SmoothGradOptions& options) {
  if (options.n_samples < 1) {
    throw Error(ErrorCode::kInvalidParams, "n_samples must be >= 1");
  }
  if (!(options.noise_level >= 0.0) || !std::isfinite(options.noise_level)) {
    throw Error(ErrorCode::kInvalidParams, "noise_level must be >= 0");
  }
  const Tensor x = record.as_batch();
  const auto [lo, hi] = std::minmax_element(x.values().begin(), x.values().end());
  const double sigma = options.noise_level * (*hi - *lo);
  nlohmann::json params{{"n_samples", options.n_samples},
                        {"noise_level", options.noise_level},
                        {"sigma", sigma},
                        {"gradient_space", "postprocessed"}};

  Tensor total;
  if (sigma == 0.0) {
    total = absolute(record_gradient(model, x, target));
  } else {
    Rng rng = make_rng(options.seed, 0);
    std::normal_distribution<double> normal(0.0, sigma);
    total = Tensor({record.num_leads(), record.num_samples()});
    for (std::size_t i = 0; i < options.n_samples; ++i) {
      Tensor noisy = x;
      for (double& v : noisy.values()) v += normal(rng);
      total += absolute(record_gradient(model, noisy, target));
    }
    total *= 1.0 / static_cast<double>(options.n_samples);
  }
  return make_result(model, record, "smoothgrad", target, std::move(params),
                     options.seed, std::move(total));
}

AttributionResult integrated_gradients(WrappedModel& model,
                                       const EcgRecord& record,
                                       std::size_t target,
                                       const std::optional<EcgRecord>& baseline,
                                       std::size_t steps) {
  if (steps < 1) throw Error(ErrorCode::kInvalidParams, "steps must be >= 1");
  const std::size_t leads = record.num_leads();
  const std::size_t samples = record.num_samples();
  Tensor start({leads, samples});
  if (baseline) {
    if (baseline->signal().shape() != record.signal().shape()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "baseline " + shape_string(baseline->signal().shape()) +
                      " vs record " + shape_string(record.signal().shape()));
    }
    start = baseline->signal();
  }
  Tensor delta = record.signal();
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] -= start[i];

  Tensor grad_sum({leads, samples});
  constexpr std::size_t kChunk = 16;
  for (std::size_t k0 = 1; k0 <= steps; k0 += kChunk) {
    const std::size_t n = std::min(kChunk, steps - k0 + 1);
    Tensor batch({n, leads, samples});
    for (std::size_t j = 0; j < n; ++j) {
      const double alpha =
          static_cast<double>(k0 + j) / static_cast<double>(steps);
      double* dst = batch.data() + j * leads * samples;
      for (std::size_t i = 0; i < delta.size(); ++i) {
        dst[i] = start[i] + alpha * delta[i];
      }
    }
    const Tensor g = model.input_gradient(batch, target);
    for (std::size_t j = 0; j < n; ++j) {
      const double* src = g.data() + j * leads * samples;
      for (std::size_t i = 0; i < grad_sum.size(); ++i) grad_sum[i] += src[i];
    }
  }
  Tensor scores({leads, samples});
  const double inv = 1.0 / static_cast<double>(steps);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = delta[i] * grad_sum[i] * inv;
  }
  nlohmann::json params{{"steps", steps},
                        {"baseline", baseline ? "record" : "zeros"},
                        {"rule", "right-riemann"},
                        {"gradient_space", "postprocessed"}};
  if (baseline) params["baseline_fingerprint"] = fingerprint(*baseline);
  return make_result(model, record, "integrated_gradients", target,
                     std::move(params), 0, std::move(scores));
}

std::vector<double> cam_map(const Tensor& activations, const Tensor& gradients,
                            CamVariant variant) {
  if (activations.rank() != 2 || gradients.shape() != activations.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "cam_map expects matching (C, T') activations and gradients");
  }
  const std::size_t channels = activations.dim(0);
  const std::size_t positions = activations.dim(1);
  std::vector<double> weights(channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    if (variant == CamVariant::kGradCam) {
      double sum = 0.0;
      for (std::size_t t = 0; t < positions; ++t) sum += gradients.at(c, t);
      weights[c] = sum / static_cast<double>(positions);
    } else {
      double act_sum = 0.0;
      for (std::size_t t = 0; t < positions; ++t) act_sum += activations.at(c, t);
      double w = 0.0;
      for (std::size_t t = 0; t < positions; ++t) {
        const double g = gradients.at(c, t);
        const double g2 = g * g;
        const double denom = 2.0 * g2 + act_sum * g2 * g;
        const double a = denom != 0.0 ? g2 / denom : 0.0;
        w += a * std::max(g, 0.0);
      }
      weights[c] = w;
    }
  }
  std::vector<double> map(positions, 0.0);
  for (std::size_t t = 0; t < positions; ++t) {
    double v = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      v += weights[c] * activations.at(c, t);
    }
    map[t] = std::max(v, 0.0);
  }
  return map;
}

std::vector<double> upsample_linear(std::span<const double> values,
                                    std::size_t length) {
  if (values.empty() || length == 0) {
    throw Error(ErrorCode::kInvalidArgument, "upsampling needs data");
  }
  std::vector<double> out(length);
  if (values.size() == 1 || length == 1) {
    std::fill(out.begin(), out.end(), values.front());
    return out;
  }
  const double scale = static_cast<double>(values.size() - 1) /
                       static_cast<double>(length - 1);
  for (std::size_t t = 0; t < length; ++t) {
    const double u = static_cast<double>(t) * scale;
    const auto i = std::min(static_cast<std::size_t>(u), values.size() - 2);
    const double frac = u - static_cast<double>(i);
    out[t] = values[i] + frac * (values[i + 1] - values[i]);
  }
  return out;
}

AttributionResult gradcam(WrappedModel& model, const EcgRecord& record,
                          std::size_t target, const std::string& layer,
                          CamVariant variant) {
  auto map = upsampled_cam(model, record, target, layer, variant);
  const std::size_t length = map.size();
  const bool pp = variant == CamVariant::kGradCamPlusPlus;
  nlohmann::json params{{"layer", layer}, {"gradient_space", "raw"}};
  if (pp) params["higher_order"] = "exponential-approximation";
  return make_result(model, record, pp ? "gradcampp" : "gradcam", target,
                     std::move(params), 0,
                     Tensor({length}, std::move(map)));
}

AttributionResult guided_gradcam(WrappedModel& model, const EcgRecord& record,
                                 std::size_t target, const std::string& layer) {
  const auto cam =
      upsampled_cam(model, record, target, layer, CamVariant::kGradCam);
  Tensor guided = record_gradient(model, record.as_batch(), target,
                                  {GradSpace::kPostprocessed,
                                   nn::BackwardMode::kGuided});
  for (std::size_t l = 0; l < guided.dim(0); ++l) {
    for (std::size_t t = 0; t < guided.dim(1); ++t) guided.at(l, t) *= cam[t];
  }
  const bool rectified = model.has_rectifier();
  nlohmann::json params{{"layer", layer},
                        {"rectifiers_present", rectified},
                        {"guided_rule", rectified ? "applied" : "pass-through"}};
  return make_result(model, record, "guided_gradcam", target,
                     std::move(params), 0, std::move(guided));
}

Tensor bin_attribution(const Tensor& scores, std::int64_t bin_size) {
  if (bin_size < 1) {
    throw Error(ErrorCode::kBinSizeNonpositive, "bin_size must be >= 1");
  }
  if (scores.rank() != 1 && scores.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "scores must be (L, T) or (T,)");
  }
  const auto bin = static_cast<std::size_t>(bin_size);
  const std::size_t rows = scores.rank() == 2 ? scores.dim(0) : 1;
  const std::size_t samples = scores.shape().back();
  const std::size_t bins = (samples + bin - 1) / bin;
  Tensor out(scores.rank() == 2 ? Tensor::Shape{rows, bins}
                                : Tensor::Shape{bins});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = scores.data() + r * samples;
    for (std::size_t b = 0; b < bins; ++b) {
      const std::size_t lo = b * bin;
      const std::size_t hi = std::min(samples, lo + bin);
      double sum = 0.0;
      for (std::size_t t = lo; t < hi; ++t) sum += std::abs(row[t]);
      out[r * bins + b] = sum / static_cast<double>(hi - lo);
    }
  }
  return out;
}

std::vector<double> time_profile(const Tensor& scores,
                                 LeadReduction reduction) {
  if (scores.rank() == 1) return scores.vector();
  if (scores.rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "scores must be (L, T) or (T,)");
  }
  const std::size_t leads = scores.dim(0);
  const std::size_t samples = scores.dim(1);
  std::vector<double> out(samples, 0.0);
  if (reduction.mean_over_leads) {
    for (std::size_t l = 0; l < leads; ++l) {
      for (std::size_t t = 0; t < samples; ++t) {
        out[t] += std::abs(scores.at(l, t));
      }
    }
    for (double& v : out) v /= static_cast<double>(leads);
    return out;
  }
  if (reduction.lead >= leads) {
    throw Error(ErrorCode::kLeadOutOfRange,
                "lead " + std::to_string(reduction.lead) + " of " +
                    std::to_string(leads));
  }
  for (std::size_t t = 0; t < samples; ++t) {
    out[t] = std::abs(scores.at(reduction.lead, t));
  }
  return out;
}

namespace {

void reject_unknown(const nlohmann::json& params,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw Error(ErrorCode::kInvalidParams, "unknown parameter '" + key + "'");
    }
  }
}

template <typename T>
T param(const nlohmann::json& params, const char* key, T fallback) {
  if (!params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kInvalidParams,
                std::string("parameter '") + key + "' has the wrong type");
  }
}

std::string required_layer(const nlohmann::json& params) {
  const auto layer = param<std::string>(params, "layer", "");
  if (layer.empty()) {
    throw Error(ErrorCode::kInvalidParams, "parameter 'layer' is required");
  }
  return layer;
}

}  // namespace

AttributionResult explain(WrappedModel& model, const EcgRecord& record,
                          const std::string& method, std::size_t target,
                          const nlohmann::json& params, std::uint64_t seed) {
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  if (!p.is_object()) {
    throw Error(ErrorCode::kInvalidParams, "method parameters must be an object");
  }
  AttributionResult result;
  nlohmann::json resolved;
  if (method == "saliency") {
    reject_unknown(p, {});
    result = saliency(model, record, target);
    resolved = nlohmann::json::object();
  } else if (method == "smoothgrad") {
    reject_unknown(p, {"n_samples", "noise_level"});
    SmoothGradOptions o;
    const auto n = param<std::int64_t>(p, "n_samples", 25);
    if (n < 1) throw Error(ErrorCode::kInvalidParams, "n_samples must be >= 1");
    o.n_samples = static_cast<std::size_t>(n);
    o.noise_level = param<double>(p, "noise_level", 0.1);
    o.seed = seed;
    result = smoothgrad(model, record, target, o);
    resolved = {{"n_samples", o.n_samples}, {"noise_level", o.noise_level}};
  } else if (method == "integrated_gradients") {
    reject_unknown(p, {"steps", "baseline"});
    const auto steps = param<std::int64_t>(p, "steps", 50);
    if (steps < 1) throw Error(ErrorCode::kInvalidParams, "steps must be >= 1");
    const auto base = param<std::string>(p, "baseline", "zeros");
    if (base != "zeros") {
      throw Error(ErrorCode::kInvalidParams,
                  "baseline must be \"zeros\" in a method config");
    }
    result = integrated_gradients(model, record, target, std::nullopt,
                                  static_cast<std::size_t>(steps));
    resolved = {{"steps", steps}, {"baseline", base}};
  } else if (method == "gradcam" || method == "gradcampp") {
    reject_unknown(p, {"layer"});
    const auto layer = required_layer(p);
    result = gradcam(model, record, target, layer,
                     method == "gradcam" ? CamVariant::kGradCam
                                         : CamVariant::kGradCamPlusPlus);
    resolved = {{"layer", layer}};
  } else if (method == "guided_gradcam") {
    reject_unknown(p, {"layer"});
    const auto layer = required_layer(p);
    result = guided_gradcam(model, record, target, layer);
    resolved = {{"layer", layer}};
  } else {
    std::string valid;
    for (const auto& name : attribution_methods()) {
      valid += (valid.empty() ? "" : ", ") + name;
    }
    throw Error(ErrorCode::kInvalidParams,
                "unknown method '" + method + "'; valid methods: " + valid);
  }
  result.run_config.seed = seed;
  result.run_config.method_params = std::move(resolved);
  return result;
}

}  // namespace ecgx
