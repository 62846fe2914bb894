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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hyperbell/error.hpp"

namespace hyperbell {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a >= kTwoPi ? 0.0 : a;
}

struct LinearFit {
  Eigen::Vector3d coef;  // offset, cos, sin
  Eigen::Matrix3d cov;
  double chi2 = std::numeric_limits<double>::infinity();
};

// Weighted linear least squares for offset + a cos(w x) + b sin(w x).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> weight, double w) {
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::Vector3d row(1.0, std::cos(w * x[i]), std::sin(w * x[i]));
    normal += weight[i] * row * row.transpose();
    rhs += weight[i] * y[i] * row;
  }
  LinearFit out;
  Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-13) return out;
  out.coef = ldlt.solve(rhs);
  out.cov = ldlt.solve(Eigen::Matrix3d::Identity());
  out.chi2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = out.coef(0) + out.coef(1) * std::cos(w * x[i]) +
                     out.coef(2) * std::sin(w * x[i]);
    out.chi2 += weight[i] * (y[i] - m) * (y[i] - m);
  }
  return out;
}

double chi2_full(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weight, const Eigen::Vector4d& p) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = p(0) + p(1) * std::cos(p(3) * x[i]) + p(2) * std::sin(p(3) * x[i]);
    chi2 += weight[i] * (y[i] - m) * (y[i] - m);
  }
  return chi2;
}

Eigen::Matrix4d normal_matrix(std::span<const double> x, std::span<const double> weight,
                              const Eigen::Vector4d& p, std::span<const double> y,
                              Eigen::Vector4d* gradient) {
  Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
  if (gradient != nullptr) gradient->setZero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = std::cos(p(3) * x[i]);
    const double s = std::sin(p(3) * x[i]);
    const Eigen::Vector4d j(1.0, c, s, x[i] * (-p(1) * s + p(2) * c));
    jtj += weight[i] * j * j.transpose();
    if (gradient != nullptr) {
      const double r = y[i] - (p(0) + p(1) * c + p(2) * s);
      *gradient += weight[i] * r * j;
    }
  }
  return jtj;
}

SinusoidFit assemble(double offset, double a, double b, double w, const Eigen::Matrix4d& cov,
                     bool period_free, double chi2, int dof) {
  SinusoidFit fit;
  const double amp = std::hypot(a, b);
  fit.amplitude = amp;
  fit.offset = offset;
  fit.phase = wrap_angle(std::atan2(b, a));
  fit.period = kTwoPi / w;
  fit.visibility = offset != 0.0 ? amp / offset : 0.0;
  fit.chi2 = chi2;
  fit.dof = dof;
  fit.offset_std = std::sqrt(std::max(cov(0, 0), 0.0));
  if (amp > 1e-300) {
    const Eigen::Vector4d d_amp(0.0, a / amp, b / amp, 0.0);
    const Eigen::Vector4d d_phase(0.0, -b / (amp * amp), a / (amp * amp), 0.0);
    const Eigen::Vector4d d_vis(-amp / (offset * offset), a / (amp * offset), b / (amp * offset),
                                0.0);
    fit.amplitude_std = std::sqrt(std::max(d_amp.dot(cov * d_amp), 0.0));
    fit.phase_std = std::sqrt(std::max(d_phase.dot(cov * d_phase), 0.0));
    fit.visibility_std = std::sqrt(std::max(d_vis.dot(cov * d_vis), 0.0));
  } else {
    fit.amplitude_std = std::sqrt(std::max(0.5 * (cov(1, 1) + cov(2, 2)), 0.0));
    fit.phase_std = std::numbers::pi;
    fit.visibility_std = fit.amplitude_std / std::abs(offset);
  }
  if (period_free) fit.period_std = kTwoPi * std::sqrt(std::max(cov(3, 3), 0.0)) / (w * w);
  return fit;
}

}  // namespace

double SinusoidFit::eval(double x) const {
  return offset + amplitude * std::cos(kTwoPi * x / period - phase);
}

nlohmann::json fit_to_json(const SinusoidFit& fit) {
  return nlohmann::json{{"amplitude", fit.amplitude},
                        {"offset", fit.offset},
                        {"phase", fit.phase},
                        {"period", fit.period},
                        {"visibility", fit.visibility},
                        {"visibility_std", fit.visibility_std},
                        {"chi2", fit.chi2},
                        {"dof", fit.dof}};
}

SinusoidFit fit_from_json(const nlohmann::json& j) {
  SinusoidFit fit;
  try {
    j.at("amplitude").get_to(fit.amplitude);
    j.at("offset").get_to(fit.offset);
    j.at("phase").get_to(fit.phase);
    j.at("visibility").get_to(fit.visibility);
    j.at("visibility_std").get_to(fit.visibility_std);
    j.at("chi2").get_to(fit.chi2);
    j.at("dof").get_to(fit.dof);
    if (j.contains("period")) j.at("period").get_to(fit.period);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("fit report JSON: ") + e.what());
  }
  return fit;
}

namespace {

SinusoidFit weighted_fit(std::span<const double> x, std::span<const double> y,
                         std::span<const double> weight, std::optional<double> fixed_period) {
  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double span = *xmax_it - *xmin_it;

  if (fixed_period) {
    const double period = *fixed_period;
    if (!(period > 0.0)) throw InvalidArgument("fit_sinusoid: period must be positive");
    if (span < period * (1.0 - 1e-9)) {
      throw NumericError("fit_sinusoid: data span shorter than one period");
    }
    const double w = kTwoPi / period;
    const auto lin = linear_fit(x, y, weight, w);
    if (!std::isfinite(lin.chi2)) throw NumericError("fit_sinusoid: singular design");
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
    cov.topLeftCorner<3, 3>() = lin.cov;
    return assemble(lin.coef(0), lin.coef(1), lin.coef(2), w, cov, false, lin.chi2,
                    static_cast<int>(x.size()) - 3);
  }

  // Period scan.
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> gaps;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] > sorted[i - 1]) gaps.push_back(sorted[i] - sorted[i - 1]);
  }
  if (gaps.empty() || !(span > 0.0)) throw NumericError("fit_sinusoid: degenerate x values");
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double w_lo = kTwoPi / span;
  const double w_hi = std::numbers::pi / gaps[gaps.size() / 2];
  const double dw = w_lo / 10.0;
  double best_w = 0.0;
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (double w = w_lo; w <= w_hi; w += dw) {
    const auto lin = linear_fit(x, y, weight, w);
    if (lin.chi2 < best_chi2) {
      best_chi2 = lin.chi2;
      best_w = w;
    }
  }
  if (!std::isfinite(best_chi2)) throw NumericError("fit_sinusoid: period unidentifiable");
  if (best_w <= w_lo + 0.5 * dw || best_w >= w_hi - 0.5 * dw) {
    throw NumericError("fit_sinusoid: period unidentifiable (best period at scan boundary)");
  }

  const auto start = linear_fit(x, y, weight, best_w);
  Eigen::Vector4d p(start.coef(0), start.coef(1), start.coef(2), best_w);
  double chi2 = chi2_full(x, y, weight, p);
  double lambda = 1e-3;
  bool converged = false;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::Vector4d grad;
    const Eigen::Matrix4d jtj = normal_matrix(x, weight, p, y, &grad);
    Eigen::Matrix4d damped = jtj;
    damped.diagonal() *= (1.0 + lambda);
    const Eigen::Vector4d step = damped.ldlt().solve(grad);
    const Eigen::Vector4d trial = p + step;
    const double trial_chi2 = chi2_full(x, y, weight, trial);
    if (trial_chi2 <= chi2) {
      const double improvement = chi2 - trial_chi2;
      p = trial;
      chi2 = trial_chi2;
      lambda = std::max(lambda * 0.1, 1e-12);
      if (improvement <= 1e-12 * std::max(chi2, 1.0)) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) {
        converged = true;  // no downhill step left
        break;
      }
    }
  }
  if (!converged || !(p(3) > 0.0)) throw NumericError("fit_sinusoid: Levenberg-Marquardt failed");
  const Eigen::Matrix4d jtj = normal_matrix(x, weight, p, y, nullptr);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(jtj);
  if (!lu.isInvertible()) throw NumericError("fit_sinusoid: singular covariance");
  return assemble(p(0), p(1), p(2), p(3), lu.inverse(), true, chi2,
                  static_cast<int>(x.size()) - 4);
}

// Weights from observed values favor downward fluctuations and inflate the
// fitted amplitude at low counts; refits take the variance from the model.
constexpr int kReweightPasses = 3;

}  // namespace

SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y,
                         std::optional<double> fixed_period,
                         std::optional<std::span<const double>> sigma) {
  if (x.size() != y.size()) throw InvalidArgument("fit_sinusoid: x and y differ in length");
  if (sigma && sigma->size() != x.size()) {
    throw InvalidArgument("fit_sinusoid: sigma differs in length");
  }
  if (x.size() < 8) throw NumericError("fit_sinusoid: need at least 8 points");

  std::vector<double> weight(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = sigma ? (*sigma)[i] : std::sqrt(std::max(y[i], 1.0));
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("fit_sinusoid: sigma must be > 0");
    weight[i] = 1.0 / (s * s);
  }
  SinusoidFit fit = weighted_fit(x, y, weight, fixed_period);
  if (sigma) return fit;
  for (int pass = 0; pass < kReweightPasses; ++pass) {
    for (std::size_t i = 0; i < x.size(); ++i) weight[i] = 1.0 / std::max(fit.eval(x[i]), 1.0);
    fit = weighted_fit(x, y, weight, fit.period);
  }
  return fixed_period ? fit : weighted_fit(x, y, weight, std::nullopt);
}

NormalizedBeat normalize_beating(const CoincidenceHistogram& signal,
                                 const CoincidenceHistogram& envelope, double prefactor,
                                 double min_envelope) {
  if (signal.size() != envelope.size()) {
    throw InvalidArgument("normalize_beating: histogram grids differ in length");
  }
  if (!(prefactor > 0.0)) throw InvalidArgument("normalize_beating: prefactor must be > 0");
  const double tol = 1e-9 * std::max(signal.config.bin_width, 1.0);
  NormalizedBeat out;
  for (std::size_t i = 0; i < signal.size(); ++i) {
    if (std::abs(signal.tau_centers[i] - envelope.tau_centers[i]) > tol) {
      throw InvalidArgument("normalize_beating: histogram grids differ at bin " +
                            std::to_string(i));
    }
    const double e = envelope.counts[i];
    if (e < min_envelope || e <= 0.0) continue;
    const double s = signal.counts[i];
    const double scale = 1.0 / (prefactor * e);
    out.tau.push_back(signal.tau_centers[i]);
    out.ratio.push_back(s * scale);
    out.ratio_std.push_back(scale * std::sqrt(std::max(s, 1.0) + s * s / e));
    out.envelope.push_back(e);
  }
  out.prefactor = prefactor;
  return out;
}

BeatPhase beat_phase_extract(const NormalizedBeat& beat, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("beat_phase_extract: delta must be positive");
  if (beat.tau.empty()) throw NumericError("beat_phase_extract: no retained bins");
  const double period = kTwoPi / delta;
  const auto [lo, hi] = std::minmax_element(beat.tau.begin(), beat.tau.end());
  if (*hi - *lo < 2.0 * period * (1.0 - 1e-9)) {
    throw NumericError("beat_phase_extract: need at least two beat periods of data");
  }
  BeatPhase out;
  out.fit = fit_sinusoid(beat.tau, beat.ratio, period, std::span<const double>(beat.ratio_std));
  if (beat.envelope.size() == beat.tau.size() && beat.prefactor > 0.0) {
    // Same reweighting as fit_sinusoid, with the ratio's propagated variance
    // evaluated at the model signal.
    std::vector<double> sigma(beat.tau.size());
    for (int pass = 0; pass < kReweightPasses; ++pass) {
      for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double denom = beat.prefactor * beat.envelope[i];
        const double s = std::max(out.fit.eval(beat.tau[i]), 0.0) * denom;
        sigma[i] = std::sqrt(std::max(s, 1.0) + s * s / beat.envelope[i]) / denom;
      }
      out.fit = fit_sinusoid(beat.tau, beat.ratio, period, std::span<const double>(sigma));
    }
  }
  out.theta = out.fit.phase;
  out.theta_std = out.fit.phase_std;
  out.visibility = out.fit.visibility;
  out.visibility_std = out.fit.visibility_std;
  return out;
}

double angular_distance(double a, double b) {
  const double d = wrap_angle(a - b);
  return std::min(d, kTwoPi - d);
}

}  // namespace hyperbell
