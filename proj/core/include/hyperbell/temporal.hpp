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

#pragma once

// Two-photon temporal correlations. Times are in ns and angular frequencies
// in rad/ns throughout; tau is always t4 - t3 (or t2 - t1 before the beam
// splitter).

#include <optional>
#include <string_view>
#include <utility>

#include "hyperbell/optics.hpp"

namespace hyperbell {

enum class EnvelopeShape { Exponential, DampedOscillation };

/// Parametric Stokes/anti-Stokes waveform. G0(tau) = |psi0(tau)|^2 is the
/// exponential decay convolved with an exponential rise, optionally
/// modulated by cos^2(osc_freq * tau / 2), and integrates to
/// `amplitude_scale` over tau >= 0. With amplitude_scale read as a pair rate
/// in 1/s, G0 is a coincidence rate density in 1/(s ns).
struct BiphotonEnvelope {
  EnvelopeShape shape = EnvelopeShape::Exponential;
  double decay_time = 50.0;  // ns
  double rise_time = 1.0;    // ns
  double osc_freq = 0.0;     // rad/ns, DampedOscillation only
  double amplitude_scale = 1.0;

  /// Throws InvalidArgument on non-positive decay time, negative rise time,
  /// negative oscillation frequency or non-positive scale.
  void validate() const;
};

EnvelopeShape parse_envelope_shape(std::string_view name);
std::string_view to_string(EnvelopeShape shape);

/// G0(tau); zero for tau < 0.
double envelope_eval(const BiphotonEnvelope& env, double tau);

/// Real waveform amplitude psi0(tau) with |psi0|^2 = G0.
double envelope_amplitude(const BiphotonEnvelope& env, double tau);

/// FWHM in MHz of |FT psi0|^2, from an FFT of the sampled waveform.
double spectral_bandwidth(const BiphotonEnvelope& env);

enum class BeatSign {
  MinusCos,  // prefactor * G0 * [1 - cos(delta tau - theta)]
  PlusCos,   // prefactor * G0 * [1 + cos(delta tau - theta)]
};

struct BeatingParams {
  double delta = 0.0;  // rad/ns
  double theta = 0.0;  // rad
  double prefactor = 0.5;
  BeatSign sign = BeatSign::MinusCos;

  /// Beat behind a 50:50 splitter with identical collection polarizations.
  static BeatingParams frequency_bell(double delta);
  /// Phase-tunable beat after the complex/linear analyzer pair.
  static BeatingParams phase_shifted(double delta, double theta);

  void validate() const;
};

double beating_g2(const BiphotonEnvelope& env, const BeatingParams& p, double tau);

/// i psi0(tau) sin(delta tau / 2), carrier phases dropped.
cplx beating_wavefunction(const BiphotonEnvelope& env, double delta, double tau);

/// Envelopes of the two time-ordering sectors of a two-sided histogram.
struct TwoSidedEnvelope {
  BiphotonEnvelope stokes_first;      // tau > 0: Stokes in path 1 / port 3
  BiphotonEnvelope anti_stokes_first; // tau < 0, evaluated at -tau

  double eval(double tau) const;
};

/// Fraction of the pairs that leave the beam splitter through different ports.
inline constexpr double kCrossPortFraction = 0.5;

/// Coincidence rate density between ports 3 and 4 for `state` with both
/// photons analyzed, kCrossPortFraction * G0 * |a0 + a1 e^{-i delta tau}|^2
/// where (a0, a1) = project_analyzers(state, p3, p4). Without analyzers the
/// four polarization outcomes are summed. Nonzero only on the tau side
/// matching the state's time ordering.
double correlation_g2(const TwoSidedEnvelope& env, const TwoPhotonState& state, double delta,
                      const std::optional<std::pair<PolarizerState, PolarizerState>>& analyzers,
                      double tau);

}  // namespace hyperbell
