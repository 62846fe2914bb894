// Copyright 2026 The hyperbell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hyperbell/temporal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "hyperbell/error.hpp"

namespace hyperbell {

namespace {

// Relative gap below which rise and decay times are treated as equal.
constexpr double kDegenerateRise = 1e-6;

// Unnormalized-by-oscillation shape: exponential decay convolved with an
// exponential rise, unit integral.
double base_shape(const BiphotonEnvelope& env, double tau) {
  const double d = env.decay_time;
  const double r = env.rise_time;
  if (r == 0.0) return std::exp(-tau / d) / d;
  if (std::abs(d - r) < kDegenerateRise * d) return tau * std::exp(-tau / d) / (d * d);
  return (std::exp(-tau / d) - std::exp(-tau / r)) / (d - r);
}

// Integral of base_shape(tau) * cos(w tau) over tau >= 0.
double cosine_moment(const BiphotonEnvelope& env, double w) {
  const double d = env.decay_time;
  const double r = env.rise_time;
  auto lorentz = [w](double a) { return a / (1.0 + w * w * a * a); };
  if (r == 0.0) return 1.0 / (1.0 + w * w * d * d);
  if (std::abs(d - r) < kDegenerateRise * d) {
    const double x = w * w * d * d;
    return (1.0 - x) / ((1.0 + x) * (1.0 + x));
  }
  return (lorentz(d) - lorentz(r)) / (d - r);
}

double oscillation_norm(const BiphotonEnvelope& env) {
  if (env.shape != EnvelopeShape::DampedOscillation || env.osc_freq == 0.0) return 1.0;
  return 0.5 * (1.0 + cosine_moment(env, env.osc_freq));
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void BiphotonEnvelope::validate() const {
  if (!(decay_time > 0.0) || !std::isfinite(decay_time)) {
    throw InvalidArgument("envelope: decay_time must be positive");
  }
  if (!(rise_time >= 0.0) || !std::isfinite(rise_time)) {
    throw InvalidArgument("envelope: rise_time must be >= 0");
  }
  if (!(osc_freq >= 0.0) || !std::isfinite(osc_freq)) {
    throw InvalidArgument("envelope: osc_freq must be >= 0");
  }
  if (!(amplitude_scale > 0.0) || !std::isfinite(amplitude_scale)) {
    throw InvalidArgument("envelope: amplitude_scale must be positive");
  }
}

EnvelopeShape parse_envelope_shape(std::string_view name) {
  if (name == "exponential") return EnvelopeShape::Exponential;
  if (name == "damped-oscillation") return EnvelopeShape::DampedOscillation;
  throw InvalidArgument("unknown envelope shape '" + std::string(name) +
                        "' (expected exponential or damped-oscillation)");
}

std::string_view to_string(EnvelopeShape shape) {
  return shape == EnvelopeShape::Exponential ? "exponential" : "damped-oscillation";
}

double envelope_eval(const BiphotonEnvelope& env, double tau) {
  if (!(env.decay_time > 0.0)) throw InvalidArgument("envelope: decay_time must be positive");
  if (tau < 0.0) return 0.0;
  double g = base_shape(env, tau);
  if (env.shape == EnvelopeShape::DampedOscillation && env.osc_freq != 0.0) {
    const double c = std::cos(0.5 * env.osc_freq * tau);
    g *= c * c / oscillation_norm(env);
  }
  return env.amplitude_scale * g;
}

double envelope_amplitude(const BiphotonEnvelope& env, double tau) {
  if (!(env.decay_time > 0.0)) throw InvalidArgument("envelope: decay_time must be positive");
  if (tau < 0.0) return 0.0;
  double a = std::sqrt(env.amplitude_scale * std::max(base_shape(env, tau), 0.0));
  if (env.shape == EnvelopeShape::DampedOscillation && env.osc_freq != 0.0) {
    a *= std::cos(0.5 * env.osc_freq * tau) / std::sqrt(oscillation_norm(env));
  }
  return a;
}

double spectral_bandwidth(const BiphotonEnvelope& env) {
  env.validate();
  double finest = env.decay_time;
  if (env.rise_time > 0.0) finest = std::min(finest, env.rise_time);
  if (env.shape == EnvelopeShape::DampedOscillation && env.osc_freq > 0.0) {
    finest = std::min(finest, std::numbers::pi / env.osc_freq);
  }
  const double dt = finest / 40.0;
  const double slowest = std::max(env.decay_time, env.rise_time);
  // Amplitude decays as exp(-tau / 2 slowest); 60 slowest leaves ~1e-13.
  const auto n_signal = static_cast<std::size_t>(std::ceil(60.0 * slowest / dt));
  // ~100 frequency bins per natural linewidth.
  const auto n_resolve = static_cast<std::size_t>(std::ceil(700.0 * slowest / dt));
  const std::size_t n = std::min<std::size_t>(
      std::bit_ceil(std::max(n_signal, n_resolve)), std::size_t{1} << 23);

  std::vector<double> signal(n, 0.0);
  for (std::size_t k = 0; k < std::min(n, n_signal); ++k) {
    signal[k] = envelope_amplitude(env, static_cast<double>(k) * dt);
  }
  const std::size_t n_freq = n / 2 + 1;
  std::unique_ptr<fftw_complex[], decltype(&fftw_free)> spectrum(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_freq)), &fftw_free);
  if (!spectrum) throw NumericError("spectral_bandwidth: allocation failed");
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), signal.data(), spectrum.get(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  std::vector<double> power(n_freq);
  for (std::size_t k = 0; k < n_freq; ++k) {
    power[k] = spectrum[k][0] * spectrum[k][0] + spectrum[k][1] * spectrum[k][1];
  }
  const double peak = *std::max_element(power.begin(), power.end());
  const double half = 0.5 * peak;
  const double df = 1.0 / (static_cast<double>(n) * dt);  // GHz

  // Crossing position between bins k-1 (below half) and k (above), or the
  // reverse; linear interpolation.
  auto crossing = [&](std::size_t lo, std::size_t hi) {
    const double t = (half - power[lo]) / (power[hi] - power[lo]);
    return (static_cast<double>(lo) + t * (static_cast<double>(hi) - static_cast<double>(lo))) *
           df;
  };

  std::size_t top = n_freq - 1;
  while (top > 0 && power[top] < half) --top;
  if (top == n_freq - 1) throw NumericError("spectral_bandwidth: spectrum not resolved");
  const double f_hi = crossing(top + 1, top);
  double width;
  if (power[0] >= half) {
    width = 2.0 * f_hi;  // symmetric about zero frequency
  } else {
    std::size_t bottom = 0;
    while (power[bottom] < half) ++bottom;
    width = f_hi - crossing(bottom - 1, bottom);
  }
  return width * 1e3;
}

BeatingParams BeatingParams::frequency_bell(double delta) {
  return BeatingParams{delta, 0.0, 0.5, BeatSign::MinusCos};
}

BeatingParams BeatingParams::phase_shifted(double delta, double theta) {
  return BeatingParams{delta, theta, 0.125, BeatSign::PlusCos};
}

void BeatingParams::validate() const {
  if (!(prefactor > 0.0)) throw InvalidArgument("beating: prefactor must be positive");
  if (!std::isfinite(delta) || !std::isfinite(theta)) {
    throw InvalidArgument("beating: delta and theta must be finite");
  }
}

double beating_g2(const BiphotonEnvelope& env, const BeatingParams& p, double tau) {
  const double c = std::cos(p.delta * tau - p.theta);
  const double fringe = p.sign == BeatSign::MinusCos ? 1.0 - c : 1.0 + c;
  return p.prefactor * envelope_eval(env, tau) * std::max(fringe, 0.0);
}

cplx beating_wavefunction(const BiphotonEnvelope& env, double delta, double tau) {
  return kI * envelope_amplitude(env, tau) * std::sin(0.5 * delta * tau);
}

double TwoSidedEnvelope::eval(double tau) const {
  return tau >= 0.0 ? envelope_eval(stokes_first, tau) : envelope_eval(anti_stokes_first, -tau);
}

double correlation_g2(const TwoSidedEnvelope& env, const TwoPhotonState& state, double delta,
                      const std::optional<std::pair<PolarizerState, PolarizerState>>& analyzers,
                      double tau) {
  const bool stokes_at_3 = state.ordering() == TimeOrdering::StokesAt3;
  if (stokes_at_3 ? tau < 0.0 : tau > 0.0) return 0.0;
  const double g0 = stokes_at_3 ? envelope_eval(env.stokes_first, tau)
                                : envelope_eval(env.anti_stokes_first, -tau);
  if (g0 == 0.0) return 0.0;
  const cplx beat = std::exp(-kI * (delta * tau));
  double weight = 0.0;
  if (analyzers) {
    const auto proj = project_analyzers(state, analyzers->first, analyzers->second);
    weight = std::norm(proj.amplitudes(0) + proj.amplitudes(1) * beat);
  } else {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        weight += std::norm(state.amplitude(a, b, 0) + state.amplitude(a, b, 1) * beat);
      }
    }
  }
  return kCrossPortFraction * g0 * weight;
}

}  // namespace hyperbell
