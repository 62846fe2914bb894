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

#include "hyperbell/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <numeric>

#include "hyperbell/error.hpp"
#include "hyperbell/rng.hpp"

namespace hyperbell {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> x;
  for (double v = lo; v <= hi + 1e-9; v += step) x.push_back(v);
  return x;
}

std::vector<double> sinusoid(const std::vector<double>& x, double offset, double amp,
                             double period, double phase) {
  std::vector<double> y;
  for (double v : x) y.push_back(offset + amp * std::cos(2 * kPi * v / period - phase));
  return y;
}

TEST(FitSinusoid, ExactOnNoiselessDataFixedPeriod) {
  const auto x = grid(0.0, 180.0, 10.0);
  const auto y = sinusoid(x, 100.0, 80.0, 180.0, 0.7);
  const auto fit = fit_sinusoid(x, y, 180.0);
  EXPECT_NEAR(fit.offset, 100.0, 1e-9);
  EXPECT_NEAR(fit.amplitude, 80.0, 1e-9);
  EXPECT_NEAR(fit.phase, 0.7, 1e-9);
  EXPECT_NEAR(fit.visibility, 0.8, 1e-11);
  EXPECT_EQ(fit.period, 180.0);
  EXPECT_EQ(fit.period_std, 0.0);
  EXPECT_EQ(fit.dof, static_cast<int>(x.size()) - 3);
  EXPECT_NEAR(fit.chi2, 0.0, 1e-12);
}

TEST(FitSinusoid, FreePeriodRecovered) {
  const auto x = grid(0.0, 90.0, 1.0);
  const auto y = sinusoid(x, 50.0, 40.0, 10.0, 2.0);
  const auto fit = fit_sinusoid(x, y);
  EXPECT_NEAR(fit.period, 10.0, 1e-8);
  EXPECT_NEAR(fit.phase, 2.0, 1e-7);
  EXPECT_NEAR(fit.amplitude, 40.0, 1e-7);
  EXPECT_EQ(fit.dof, static_cast<int>(x.size()) - 4);
}

TEST(FitSinusoid, NegativeAmplitudeFoldedIntoPhase) {
  const auto x = grid(0.0, 20.0, 0.5);
  const auto y = sinusoid(x, 10.0, -5.0, 10.0, 0.0);
  const auto fit = fit_sinusoid(x, y, 10.0);
  EXPECT_NEAR(fit.amplitude, 5.0, 1e-9);
  EXPECT_NEAR(fit.phase, kPi, 1e-9);
  EXPECT_GE(fit.phase, 0.0);
  EXPECT_LT(fit.phase, 2 * kPi);
}

TEST(FitSinusoid, UnbiasedWithCalibratedErrorsUnderPoissonNoise) {
  const auto x = grid(0.0, 355.0, 5.0);
  const auto truth = sinusoid(x, 200.0, 160.0, 180.0, 1.1);
  const int trials = 400;
  double sum_v = 0.0, sum_pull2 = 0.0, sum_phase = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto eng = substream(static_cast<std::uint64_t>(t), RngStream::Polarization, i);
      y[i] = static_cast<double>(poisson_draw(eng, truth[i]));
    }
    const auto fit = fit_sinusoid(x, y, 180.0);
    sum_v += fit.visibility;
    sum_phase += fit.phase;
    const double pull = (fit.visibility - 0.8) / fit.visibility_std;
    sum_pull2 += pull * pull;
  }
  const double mean_v = sum_v / trials;
  EXPECT_NEAR(mean_v, 0.8, 0.01);
  EXPECT_NEAR(sum_phase / trials, 1.1, 0.01);
  const double pull_rms = std::sqrt(sum_pull2 / trials);
  EXPECT_GT(pull_rms, 0.8);
  EXPECT_LT(pull_rms, 1.25);
}

TEST(FitSinusoid, VisibilityUnbiasedAtLowCounts) {
  // Around ten counts per point, observed-count weights bias V upward by
  // several percent.
  const auto x = grid(0.0, 355.0, 5.0);
  const auto truth = sinusoid(x, 10.0, 8.0, 180.0, 0.3);
  const int trials = 400;
  double sum_v = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto eng = substream(static_cast<std::uint64_t>(t), RngStream::Polarization, i);
      y[i] = static_cast<double>(poisson_draw(eng, truth[i]));
    }
    sum_v += fit_sinusoid(x, y, 180.0).visibility;
  }
  EXPECT_NEAR(sum_v / trials, 0.8, 0.015);
}

TEST(FitSinusoid, RejectsDegenerateInput) {
  const auto x = grid(0.0, 6.0, 1.0);  // 7 points
  const auto y = sinusoid(x, 10.0, 5.0, 4.0, 0.0);
  EXPECT_THROW(fit_sinusoid(x, y, 4.0), NumericError);
  const auto x2 = grid(0.0, 9.0, 1.0);
  const auto y2 = sinusoid(x2, 10.0, 5.0, 40.0, 0.0);
  EXPECT_THROW(fit_sinusoid(x2, y2, 40.0), NumericError);  // under one period
  std::vector<double> y3(x2.size(), 1.0);
  EXPECT_THROW(fit_sinusoid(x2, std::span<const double>(y3.data(), 5)), InvalidArgument);
}

TEST(FitSinusoid, JsonRoundTrip) {
  const auto x = grid(0.0, 180.0, 10.0);
  const auto fit = fit_sinusoid(x, sinusoid(x, 100.0, 30.0, 180.0, 0.2), 180.0);
  const auto back = fit_from_json(nlohmann::json::parse(fit_to_json(fit).dump()));
  EXPECT_EQ(back.amplitude, fit.amplitude);
  EXPECT_EQ(back.phase, fit.phase);
  EXPECT_EQ(back.visibility_std, fit.visibility_std);
  EXPECT_EQ(back.dof, fit.dof);
}

CoincidenceHistogram hist(std::vector<double> taus, std::vector<double> counts) {
  CoincidenceHistogram h;
  h.tau_centers = std::move(taus);
  h.counts = std::move(counts);
  return h;
}

TEST(NormalizeBeating, RatioAndErrorPropagation) {
  const auto sig = hist({0, 1, 2, 3}, {10, 0, 40, 7});
  const auto env = hist({0, 1, 2, 3}, {100, 80, 5, 100});
  const auto beat = normalize_beating(sig, env, 0.5);
  ASSERT_EQ(beat.tau.size(), 3u);  // bin 2 below the envelope floor
  EXPECT_EQ(beat.tau[2], 3.0);
  EXPECT_NEAR(beat.ratio[0], 10.0 / 50.0, 1e-15);
  EXPECT_NEAR(beat.ratio[1], 0.0, 1e-15);
  EXPECT_NEAR(beat.ratio_std[0], std::sqrt(10.0 + 100.0 / 100.0) / 50.0, 1e-15);
  EXPECT_NEAR(beat.ratio_std[1], 1.0 / 40.0, 1e-15);  // zero counts use a floor of one
}

TEST(NormalizeBeating, RejectsMismatchedGrids) {
  EXPECT_THROW(normalize_beating(hist({0, 1}, {1, 1}), hist({0, 2}, {20, 20}), 0.5),
               InvalidArgument);
  EXPECT_THROW(normalize_beating(hist({0, 1}, {1, 1}), hist({0}, {20}), 0.5), InvalidArgument);
  EXPECT_THROW(normalize_beating(hist({0, 1}, {1, 1}), hist({0, 1}, {20, 20}), 0.0),
               InvalidArgument);
}

TEST(BeatPhase, RecoversPhaseFromNoiselessRatio) {
  const double delta = 2 * kPi * 0.1;
  for (double theta : {0.0, 0.4, kPi / 2, kPi, 5.5}) {
    NormalizedBeat beat;
    for (double t = 0.0; t <= 60.0; t += 1.0) {
      beat.tau.push_back(t);
      beat.ratio.push_back(1.0 + std::cos(delta * t - theta));
      beat.ratio_std.push_back(0.05);
    }
    const auto ph = beat_phase_extract(beat, delta);
    EXPECT_LT(angular_distance(ph.theta, theta), 1e-9) << theta;
    EXPECT_NEAR(ph.visibility, 1.0, 1e-9);
  }
}

TEST(BeatPhase, VisibilityUnbiasedAtLowCounts) {
  const double delta = 2 * kPi * 0.1;
  const int trials = 300;
  double sum_v = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> tau, sig, env;
    for (double x = 0.0; x < 90.0; x += 1.0) {
      const double e_mean = 120.0 * std::exp(-x / 50.0);
      const double s_mean = 0.125 * e_mean * (1.0 + 0.8 * std::cos(delta * x - 2.0));
      const auto i = static_cast<std::uint64_t>(x);
      auto e_eng = substream(static_cast<std::uint64_t>(t), RngStream::Histogram, 2 * i);
      auto s_eng = substream(static_cast<std::uint64_t>(t), RngStream::Histogram, 2 * i + 1);
      tau.push_back(x);
      env.push_back(static_cast<double>(poisson_draw(e_eng, e_mean)));
      sig.push_back(static_cast<double>(poisson_draw(s_eng, s_mean)));
    }
    const auto beat = normalize_beating(hist(tau, sig), hist(tau, env), 0.125);
    sum_v += beat_phase_extract(beat, delta).visibility;
  }
  EXPECT_NEAR(sum_v / trials, 0.8, 0.015);
}

TEST(BeatPhase, NeedsTwoPeriods) {
  NormalizedBeat beat;
  for (double t = 0.0; t <= 15.0; t += 1.0) {
    beat.tau.push_back(t);
    beat.ratio.push_back(1.0 + std::cos(0.2 * kPi * t));
    beat.ratio_std.push_back(0.1);
  }
  EXPECT_THROW(beat_phase_extract(beat, 0.2 * kPi), NumericError);
}

TEST(AngularDistance, WrapsAroundCircle) {
  EXPECT_NEAR(angular_distance(0.1, 2 * kPi - 0.1), 0.2, 1e-12);
  EXPECT_NEAR(angular_distance(-kPi, kPi), 0.0, 1e-12);
  EXPECT_NEAR(angular_distance(0.0, kPi), kPi, 1e-12);
}

}  // namespace
}  // namespace hyperbell
