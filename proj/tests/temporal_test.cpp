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

#include <gtest/gtest.h>

#include <numbers>

#include "hyperbell/error.hpp"
#include "hyperbell/fixtures.hpp"

namespace hyperbell {
namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson over [0, t_max].
template <class F>
double simpson(F&& f, double t_max, int n) {
  const double h = t_max / n;
  double s = f(0.0) + f(t_max);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return s * h / 3.0;
}

// |integral a(t) e^{-i 2 pi f t} dt|^2 by direct quadrature, f in GHz.
double power_at(const BiphotonEnvelope& env, double f) {
  const double w = 2 * kPi * f;
  const double t_max = 60.0 * std::max(env.decay_time, env.rise_time);
  const double re = simpson([&](double t) { return envelope_amplitude(env, t) * std::cos(w * t); },
                            t_max, 400000);
  const double im = simpson([&](double t) { return envelope_amplitude(env, t) * std::sin(w * t); },
                            t_max, 400000);
  return re * re + im * im;
}

// FWHM in MHz for a spectrum peaked at zero frequency, by bisection.
double oracle_bandwidth(const BiphotonEnvelope& env) {
  const double half = 0.5 * power_at(env, 0.0);
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 50; ++i) {
    const double mid = 0.5 * (lo + hi);
    (power_at(env, mid) > half ? lo : hi) = mid;
  }
  return 2.0 * lo * 1e3;
}

TEST(Envelope, UnitIntegralForEveryShape) {
  for (double rise : {0.0, 0.5, 1.0, 50.0}) {
    BiphotonEnvelope env;
    env.rise_time = rise;
    EXPECT_NEAR(simpson([&](double t) { return envelope_eval(env, t); }, 3000.0, 200000), 1.0,
                1e-6)
        << "rise " << rise;
  }
  BiphotonEnvelope osc;
  osc.shape = EnvelopeShape::DampedOscillation;
  osc.osc_freq = 0.9;
  EXPECT_NEAR(simpson([&](double t) { return envelope_eval(osc, t); }, 3000.0, 400000), 1.0, 1e-6);
}

TEST(Envelope, ZeroRiseIsPureExponential) {
  BiphotonEnvelope env;
  env.rise_time = 0.0;
  EXPECT_NEAR(envelope_eval(env, 0.0), 1.0 / 50.0, 1e-15);
  EXPECT_NEAR(envelope_eval(env, 50.0), std::exp(-1.0) / 50.0, 1e-15);
}

TEST(Envelope, CausalAndScaled) {
  BiphotonEnvelope env;
  env.amplitude_scale = 3.0;
  EXPECT_EQ(envelope_eval(env, -1.0), 0.0);
  EXPECT_EQ(envelope_eval(env, 0.0), 0.0);  // finite rise starts at zero
  BiphotonEnvelope unit;
  EXPECT_NEAR(envelope_eval(env, 7.0), 3.0 * envelope_eval(unit, 7.0), 1e-15);
  EXPECT_NEAR(envelope_amplitude(env, 7.0) * envelope_amplitude(env, 7.0), envelope_eval(env, 7.0),
              1e-15);
}

TEST(Envelope, RejectsBadParameters) {
  BiphotonEnvelope env;
  env.decay_time = 0.0;
  EXPECT_THROW(envelope_eval(env, 1.0), InvalidArgument);
  EXPECT_THROW(spectral_bandwidth(env), InvalidArgument);
  env.decay_time = 50.0;
  env.rise_time = -1.0;
  EXPECT_THROW(env.validate(), InvalidArgument);
  EXPECT_THROW(parse_envelope_shape("gaussian"), InvalidArgument);
  EXPECT_EQ(parse_envelope_shape(to_string(EnvelopeShape::DampedOscillation)),
            EnvelopeShape::DampedOscillation);
}

TEST(SpectralBandwidth, LorentzianLinewidth) {
  BiphotonEnvelope env;
  env.rise_time = 0.0;
  const double expected = 1e3 / (2 * kPi * 50.0);  // 3.183 MHz
  EXPECT_NEAR(spectral_bandwidth(env), expected, 0.01 * expected);
}

TEST(SpectralBandwidth, MatchesDirectQuadrature) {
  BiphotonEnvelope env;  // 50 ns decay, 1 ns rise
  const double oracle = oracle_bandwidth(env);
  EXPECT_NEAR(spectral_bandwidth(env), oracle, 0.01 * oracle);
  env.decay_time = 10.0;
  env.rise_time = 2.0;
  const double oracle2 = oracle_bandwidth(env);
  EXPECT_NEAR(spectral_bandwidth(env), oracle2, 0.01 * oracle2);
}

TEST(SpectralBandwidth, ShrinksWithDecayTime) {
  BiphotonEnvelope env;
  double last = 1e300;
  for (double d : {5.0, 20.0, 50.0, 200.0}) {
    env.decay_time = d;
    const double bw = spectral_bandwidth(env);
    EXPECT_LT(bw, last);
    last = bw;
  }
}

TEST(Beating, MinusCosIsSineSquaredOfWavefunction) {
  const BiphotonEnvelope env;
  const double delta = fixtures::kAomShift;
  const auto p = BeatingParams::frequency_bell(delta);
  for (double tau = 0.0; tau < 100.0; tau += 0.37) {
    const double psi2 = std::norm(beating_wavefunction(env, delta, tau));
    EXPECT_NEAR(beating_g2(env, p, tau), psi2, 1e-15);
  }
}

TEST(Beating, PeriodAndNodes) {
  const BiphotonEnvelope env;
  const double delta = fixtures::kAomShift;
  const auto p = BeatingParams::frequency_bell(delta);
  EXPECT_NEAR(beating_g2(env, p, 10.0), 0.0, 1e-18);   // delta tau = 2 pi
  EXPECT_NEAR(beating_g2(env, p, 5.0), envelope_eval(env, 5.0), 1e-15);
  const auto q = BeatingParams::phase_shifted(delta, kPi / 2);
  EXPECT_NEAR(beating_g2(env, q, 2.5), 0.25 * envelope_eval(env, 2.5), 1e-15);
}

TEST(Correlation, EqualPolarizationSourceReproducesBeat) {
  TwoSidedEnvelope env;
  const double delta = fixtures::kAomShift;
  const auto state = build_hyperentangled({delta, PolarizerState::D(), PolarizerState::D()});
  const auto p = BeatingParams::frequency_bell(delta);
  for (double tau = 0.0; tau < 90.0; tau += 0.5) {
    EXPECT_NEAR(correlation_g2(env, state, delta, std::nullopt, tau),
                beating_g2(env.stokes_first, p, tau), 1e-15);
  }
}

TEST(Correlation, AnalyzerPairReproducesPhaseShiftedBeat) {
  TwoSidedEnvelope env;
  const double delta = fixtures::kAomShift;
  const auto state = build_hyperentangled({delta, PolarizerState::H(), PolarizerState::V()});
  for (double theta : {0.0, kPi / 3, kPi / 2, 2.0, -1.0}) {
    // (H - e^{-i theta} V) / sqrt 2
    const auto p3 = PolarizerState::elliptical(-kPi / 4, -theta);
    const auto p = BeatingParams::phase_shifted(delta, theta);
    for (double tau = 0.0; tau < 90.0; tau += 0.7) {
      const double got =
          correlation_g2(env, state, delta, std::pair{p3, PolarizerState::D()}, tau);
      EXPECT_NEAR(got, beating_g2(env.stokes_first, p, tau), 1e-15) << theta << " " << tau;
    }
  }
}

TEST(Correlation, TimeOrderingSelectsSign) {
  TwoSidedEnvelope env;
  env.anti_stokes_first.decay_time = 20.0;
  const double delta = 0.4;
  const auto s3 = build_hyperentangled({delta, PolarizerState::D(), PolarizerState::D()},
                                       TimeOrdering::StokesAt3);
  const auto s4 = build_hyperentangled({delta, PolarizerState::D(), PolarizerState::D()},
                                       TimeOrdering::StokesAt4);
  EXPECT_EQ(correlation_g2(env, s3, delta, std::nullopt, -5.0), 0.0);
  EXPECT_EQ(correlation_g2(env, s4, delta, std::nullopt, 5.0), 0.0);
  EXPECT_GT(correlation_g2(env, s4, delta, std::nullopt, -5.0), 0.0);
  // Same fringe, envelope mirrored.
  const double ratio = correlation_g2(env, s4, delta, std::nullopt, -5.0) /
                       correlation_g2(env, s3, delta, std::nullopt, 5.0);
  EXPECT_NEAR(ratio, env.eval(-5.0) / env.eval(5.0), 1e-12);
}

TEST(Correlation, DegenerateSingletHasNoBeat) {
  TwoSidedEnvelope env;
  const auto state = build_hyperentangled({0.0, PolarizerState::H(), PolarizerState::V()});
  for (double tau = 0.5; tau < 50.0; tau += 1.3) {
    EXPECT_NEAR(correlation_g2(env, state, 0.0, std::nullopt, tau),
                kCrossPortFraction * env.eval(tau), 1e-15);
  }
}

}  // namespace
}  // namespace hyperbell
