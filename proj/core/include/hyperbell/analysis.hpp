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

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hyperbell/detection.hpp"

namespace hyperbell {

/// y = offset + amplitude * cos(2 pi x / period - phase), amplitude >= 0.
struct SinusoidFit {
  double amplitude = 0.0;
  double offset = 0.0;
  double phase = 0.0;  // wrapped to [0, 2 pi)
  double period = 0.0;
  double visibility = 0.0;  // amplitude / offset
  double amplitude_std = 0.0;
  double offset_std = 0.0;
  double phase_std = 0.0;
  double period_std = 0.0;  // zero when the period was fixed
  double visibility_std = 0.0;
  double chi2 = 0.0;
  int dof = 0;

  double eval(double x) const;
};

nlohmann::json fit_to_json(const SinusoidFit& fit);
SinusoidFit fit_from_json(const nlohmann::json& j);

/// Weighted least-squares sinusoid fit. Without `sigma` the weights are
/// Poisson: a first pass uses sigma_i = sqrt(max(y_i, 1)), later passes the
/// fitted model in place of y_i. With `fixed_period` the problem is
/// linear; otherwise the period is located by a scan between one period per
/// data span and the Nyquist limit, then refined by Levenberg-Marquardt.
/// Standard errors come from the unscaled covariance (J^T W J)^-1.
/// Throws NumericError with fewer than 8 points, a span shorter than one
/// period, or a singular / non-converging fit.
SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y,
                         std::optional<double> fixed_period = std::nullopt,
                         std::optional<std::span<const double>> sigma = std::nullopt);

struct NormalizedBeat {
  std::vector<double> tau;
  std::vector<double> ratio;
  std::vector<double> ratio_std;  // from observed counts
  std::vector<double> envelope;   // retained envelope counts; may be empty
  double prefactor = 0.0;
};

inline constexpr double kMinEnvelopeCounts = 10.0;

/// ratio = signal / (prefactor * envelope) on bins where the envelope holds at
/// least `min_envelope` counts. With prefactor 1/2 a noiseless frequency-Bell
/// beat maps onto 1 - cos(delta tau). Errors treat both histograms as
/// independent Poisson counts. Throws InvalidArgument on mismatched grids.
NormalizedBeat normalize_beating(const CoincidenceHistogram& signal,
                                 const CoincidenceHistogram& envelope, double prefactor,
                                 double min_envelope = kMinEnvelopeCounts);

struct BeatPhase {
  double theta = 0.0;  // in [0, 2 pi)
  double theta_std = 0.0;
  double visibility = 0.0;
  double visibility_std = 0.0;
  SinusoidFit fit;
};

/// Fits 1 + V cos(delta tau - theta) (offset free) at the known beat period.
/// When the envelope counts are present the errors are re-evaluated at the
/// fitted model between passes.
BeatPhase beat_phase_extract(const NormalizedBeat& beat, double delta);

/// Smallest distance between two angles on the circle.
double angular_distance(double a, double b);

}  // namespace hyperbell
