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

#include "ecgx/error.hpp"
#include "ecgx/synth/synth.hpp"

namespace ecgx::synth {

namespace {

constexpr std::size_t kKnobs = 8;
constexpr double kPGain = 2.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Fixed displacement pattern in [-1, 1].
double beat_offset(long k) { return std::sin(2.399963 * static_cast<double>(k) + 0.5); }

struct Knob {
  double value;
  double slope;  // d value / d z
};

// Latent -> beat parameters, with derivatives of each squashing map.
struct Decoded {
  Knob p_amp, jitter, r_amp, t_amp, qrs_scale, s_amp, q_amp, t_scale;
};

Decoded decode(std::span<const double> z) {
  auto at = [&](std::size_t i) { return i < z.size() ? z[i] : 0.0; };
  auto sig_knob = [](double scale, double gain, double shift, double x) {
    const double s = sigmoid(gain * x + shift);
    return Knob{scale * s, scale * gain * s * (1.0 - s)};
  };
  auto exp_tanh = [](double x) {
    const double th = std::tanh(x);
    const double v = std::exp(0.3 * th);
    return Knob{v, v * 0.3 * (1.0 - th * th)};
  };
  Decoded d;
  const double p_scale = std::exp(kPGain * at(0));
  d.p_amp = Knob{0.15 * p_scale, 0.15 * kPGain * p_scale};
  d.jitter = sig_knob(0.15, 4.0, -2.0, at(1));
  d.r_amp = sig_knob(1.0, 1.0, 0.0, at(2));
  d.r_amp.value += 0.5;
  d.t_amp = sig_knob(0.6, 1.0, 0.0, at(3));
  d.qrs_scale = exp_tanh(at(4));
  d.s_amp = sig_knob(-0.4, 1.0, 0.0, at(5));
  d.q_amp = sig_knob(-0.2, 1.0, 0.0, at(6));
  d.t_scale = exp_tanh(at(7));
  return d;
}

enum WaveId { kP, kQ, kR, kS, kT, kWaves };

struct Shape {
  double amp[kWaves];
  double center[kWaves];
  double width[kWaves];
};

Shape shape_of(const Decoded& d) {
  const BeatParams base;
  Shape s{};
  const Wave* waves[kWaves] = {&base.p, &base.q, &base.r, &base.s, &base.t};
  for (int w = 0; w < kWaves; ++w) {
    s.center[w] = waves[w]->center_s;
    s.width[w] = waves[w]->width_s;
  }
  s.amp[kP] = d.p_amp.value;
  s.amp[kQ] = d.q_amp.value;
  s.amp[kR] = d.r_amp.value;
  s.amp[kS] = d.s_amp.value;
  s.amp[kT] = d.t_amp.value;
  for (int w : {kQ, kR, kS}) s.width[w] *= d.qrs_scale.value;
  s.width[kT] *= d.t_scale.value;
  return s;
}

}  // namespace

ToyGenerator::ToyGenerator(std::size_t latent_dim, std::size_t leads, int rate,
                           double duration_s)
    : latent_dim_(latent_dim), leads_(leads), rate_(rate) {
  if (latent_dim == 0 || leads == 0 || rate <= 0 || !(duration_s > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "invalid toy generator geometry");
  }
  samples_ = static_cast<std::size_t>(std::lround(duration_s * rate));
}

BeatParams ToyGenerator::params_for(std::span<const double> z) const {
  const Decoded d = decode(z);
  const Shape s = shape_of(d);
  BeatParams p;
  p.heart_rate_bpm = kHeartRateBpm;
  Wave* waves[kWaves] = {&p.p, &p.q, &p.r, &p.s, &p.t};
  for (int w = 0; w < kWaves; ++w) {
    *waves[w] = Wave{s.amp[w], s.center[w], s.width[w]};
  }
  p.rr_jitter = d.jitter.value;
  return p;
}

namespace {

struct Beats {
  std::vector<double> r;
  std::vector<double> eta;
};

Beats place_beats(double jitter, double duration) {
  const double rr = 60.0 / ToyGenerator::kHeartRateBpm;
  Beats beats;
  for (long k = -1; rr * (static_cast<double>(k) + 0.5) < duration + rr; ++k) {
    const double eta = beat_offset(k);
    beats.r.push_back(rr * (static_cast<double>(k) + 0.5) + jitter * rr * eta);
    beats.eta.push_back(eta);
  }
  return beats;
}

}  // namespace

std::pair<std::size_t, std::size_t> ToyGenerator::support(
    double center, double width) const {
  // Past 8 widths a bump is below 1e-14 of its peak.
  const double lo = std::ceil((center - kSupportWidths * width) * rate_);
  const double hi = std::floor((center + kSupportWidths * width) * rate_) + 1;
  const auto n = static_cast<double>(samples_);
  return {static_cast<std::size_t>(std::clamp(lo, 0.0, n)),
          static_cast<std::size_t>(std::clamp(hi, 0.0, n))};
}

std::vector<double> ToyGenerator::r_peaks_s(std::span<const double> z) const {
  const double duration = static_cast<double>(samples_) / rate_;
  std::vector<double> out;
  for (double r : place_beats(decode(z).jitter.value, duration).r) {
    if (r >= 0.0 && r < duration) out.push_back(r);
  }
  return out;
}

Tensor ToyGenerator::generate(std::span<const double> z) const {
  if (z.size() != latent_dim_) {
    throw Error(ErrorCode::kShapeMismatch,
                "latent must have " + std::to_string(latent_dim_) + " entries");
  }
  const Decoded d = decode(z);
  const Shape s = shape_of(d);
  const double duration = static_cast<double>(samples_) / rate_;
  const Beats beats = place_beats(d.jitter.value, duration);

  std::vector<double> base(samples_, 0.0);
  for (double r : beats.r) {
    for (int w = 0; w < kWaves; ++w) {
      const auto [lo, hi] = support(r + s.center[w], s.width[w]);
      for (std::size_t i = lo; i < hi; ++i) {
        const double u =
            (static_cast<double>(i) / rate_ - r - s.center[w]) / s.width[w];
        base[i] += s.amp[w] * std::exp(-0.5 * u * u);
      }
    }
  }
  Tensor out({leads_, samples_});
  for (std::size_t l = 0; l < leads_; ++l) {
    const double gain = lead_gain(l);
    for (std::size_t i = 0; i < samples_; ++i) out.at(l, i) = gain * base[i];
  }
  return out;
}

std::vector<double> ToyGenerator::vjp(std::span<const double> z,
                                      const Tensor& grad_output) const {
  if (z.size() != latent_dim_) {
    throw Error(ErrorCode::kShapeMismatch,
                "latent must have " + std::to_string(latent_dim_) + " entries");
  }
  if (grad_output.shape() != Tensor::Shape{leads_, samples_}) {
    throw Error(ErrorCode::kShapeMismatch, "vjp seed must be (L, T_g)");
  }
  const Decoded d = decode(z);
  const Shape s = shape_of(d);
  const double duration = static_cast<double>(samples_) / rate_;
  const Beats beats = place_beats(d.jitter.value, duration);

  std::vector<double> seed(samples_, 0.0);
  for (std::size_t l = 0; l < leads_; ++l) {
    const double gain = lead_gain(l);
    for (std::size_t i = 0; i < samples_; ++i) {
      seed[i] += gain * grad_output.at(l, i);
    }
  }

  double d_amp[kWaves] = {}, d_width[kWaves] = {};
  std::vector<double> d_r(beats.r.size(), 0.0);
  for (std::size_t k = 0; k < beats.r.size(); ++k) {
    for (int w = 0; w < kWaves; ++w) {
      const auto [lo, hi] = support(beats.r[k] + s.center[w], s.width[w]);
      for (std::size_t i = lo; i < hi; ++i) {
        const double dt =
            static_cast<double>(i) / rate_ - beats.r[k] - s.center[w];
        const double u = dt / s.width[w];
        const double g = std::exp(-0.5 * u * u);
        const double a = seed[i] * s.amp[w] * g;
        d_amp[w] += seed[i] * g;
        d_width[w] += a * u * u / s.width[w];
        d_r[k] += a * dt / (s.width[w] * s.width[w]);
      }
    }
  }
  const double rr = 60.0 / kHeartRateBpm;
  double d_jitter = 0.0;
  for (std::size_t k = 0; k < d_r.size(); ++k) {
    d_jitter += d_r[k] * rr * beats.eta[k];
  }
  const BeatParams base;
  const double d_qrs = d_width[kQ] * base.q.width_s +
                       d_width[kR] * base.r.width_s +
                       d_width[kS] * base.s.width_s;
  const double d_tw = d_width[kT] * base.t.width_s;

  std::vector<double> grad(latent_dim_, 0.0);
  const double knob_grads[kKnobs] = {
      d_amp[kP] * d.p_amp.slope,  d_jitter * d.jitter.slope,
      d_amp[kR] * d.r_amp.slope,  d_amp[kT] * d.t_amp.slope,
      d_qrs * d.qrs_scale.slope,  d_amp[kS] * d.s_amp.slope,
      d_amp[kQ] * d.q_amp.slope,  d_tw * d.t_scale.slope};
  for (std::size_t i = 0; i < std::min(latent_dim_, kKnobs); ++i) {
    grad[i] = knob_grads[i];
  }
  return grad;
}

ToyGenerator toy_generator(std::size_t latent_dim) {
  return ToyGenerator(latent_dim);
}

}  // namespace ecgx::synth
