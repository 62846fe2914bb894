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

#include "hyperbell/app/pipelines.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <thread>

#include "hyperbell/error.hpp"
#include "hyperbell/fixtures.hpp"
#include "hyperbell/rng.hpp"

namespace hyperbell::app {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Envelope reference and signal histograms draw from unrelated seeds.
constexpr std::uint64_t kEnvelopeSeedTag = 0x656e76656c6f7065ULL;

std::uint64_t envelope_seed(std::uint64_t seed) { return splitmix64(seed ^ kEnvelopeSeedTag); }

CoincidenceHistogram restrict_to(const CoincidenceHistogram& h, double lo, double hi) {
  CoincidenceHistogram out;
  out.config = h.config;
  out.sampled = h.sampled;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h.tau_centers[i] >= lo && h.tau_centers[i] <= hi) {
      out.tau_centers.push_back(h.tau_centers[i]);
      out.counts.push_back(h.counts[i]);
    }
  }
  return out;
}

std::pair<PolarizerState, PolarizerState> beating_polarizers(const RunConfig& cfg) {
  const auto p1 = PolarizerState::from_name(cfg.source.p1);
  if (cfg.beating.mode == BeatMode::Eq6) return {p1, p1};
  return {p1, PolarizerState::from_name(cfg.source.p2)};
}

BeatingRun beating_with_background(const RunConfig& cfg, double background, bool noiseless) {
  const auto env = two_sided_envelope(cfg);
  const auto taus = tau_grid(cfg.detection.tau_min, cfg.detection.tau_max, cfg.detection.bin_width);
  const auto det = cfg.detection_config(background);
  const auto [p1, p2] = beating_polarizers(cfg);
  std::optional<std::pair<PolarizerState, PolarizerState>> analyzers;
  if (cfg.beating.mode == BeatMode::Eq12) analyzers = phase_analyzers(cfg.beating.theta);
  const double delta = cfg.source.delta;

  BeatingRun run;
  run.background = background;
  run.signal_expected = expected_counts(
      taus, [&](double t) { return after_splitter_g2(cfg, delta, p1, p2, analyzers, t); }, det);
  run.envelope_expected = expected_counts(taus, [&](double t) { return env.eval(t); }, det);
  if (noiseless) {
    run.signal = run.signal_expected;
    run.envelope = run.envelope_expected;
  } else {
    run.signal = sample_histogram(run.signal_expected, cfg.seed);
    run.envelope = sample_histogram(run.envelope_expected, envelope_seed(cfg.seed));
  }

  const auto params = beating_params(cfg);
  run.beat = normalize_beating(restrict_to(run.signal, cfg.beating.fit_start, cfg.beating.fit_stop),
                               restrict_to(run.envelope, cfg.beating.fit_start, cfg.beating.fit_stop),
                               params.prefactor);
  try {
    run.free_fit = fit_sinusoid(run.beat.tau, run.beat.ratio, std::nullopt,
                                std::span<const double>(run.beat.ratio_std));
    run.frequency_mhz = 1e3 / run.free_fit->period;
  } catch (const NumericError&) {
    run.free_fit.reset();
  }
  if (delta > 0.0) run.phase = beat_phase_extract(run.beat, delta);
  return run;
}

double noiseless_visibility(const RunConfig& cfg, double background) {
  return beating_with_background(cfg, background, true).phase.visibility;
}

}  // namespace

TwoSidedEnvelope two_sided_envelope(const RunConfig& cfg) {
  const auto env = cfg.envelope.to_envelope();
  return TwoSidedEnvelope{env, env};
}

double after_splitter_g2(const RunConfig& cfg, double delta, const PolarizerState& p1,
                         const PolarizerState& p2,
                         const std::optional<std::pair<PolarizerState, PolarizerState>>& analyzers,
                         double tau) {
  const auto env = two_sided_envelope(cfg);
  const auto ordering = tau >= 0.0 ? TimeOrdering::StokesAt3 : TimeOrdering::StokesAt4;
  const auto state = build_hyperentangled({delta, p1, p2}, ordering);
  return correlation_g2(env, state, delta, analyzers, tau);
}

std::pair<PolarizerState, PolarizerState> phase_analyzers(double theta) {
  return {PolarizerState::elliptical(-std::numbers::pi / 4, -theta), PolarizerState::D()};
}

BeatingParams beating_params(const RunConfig& cfg) {
  return cfg.beating.mode == BeatMode::Eq6
             ? BeatingParams::frequency_bell(cfg.source.delta)
             : BeatingParams::phase_shifted(cfg.source.delta, cfg.beating.theta);
}

double calibrate_beating_background(const RunConfig& cfg) {
  if (!(cfg.source.delta > 0.0)) {
    throw ConfigError("detection.background_per_bin: 'auto' needs source.delta_rad_per_ns > 0");
  }
  const double target = cfg.detection.target_visibility;
  if (noiseless_visibility(cfg, 0.0) <= target) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (noiseless_visibility(cfg, hi) > target) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e12) throw NumericError("background calibration did not bracket the target");
  }
  for (int i = 0; i < 60 && hi - lo > 1e-9 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (noiseless_visibility(cfg, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double resolve_beating_background(const RunConfig& cfg) {
  return cfg.detection.background ? *cfg.detection.background : calibrate_beating_background(cfg);
}

BeatingRun run_beating(const RunConfig& cfg, bool noiseless) {
  if (!(cfg.source.delta > 0.0)) {
    throw ConfigError("source.delta_rad_per_ns: beating needs a nonzero frequency shift");
  }
  return beating_with_background(cfg, resolve_beating_background(cfg), noiseless);
}

EnvelopeRun run_envelope(const RunConfig& cfg) {
  EnvelopeRun run;
  run.background = cfg.detection.background      ? *cfg.detection.background
                   : cfg.source.delta > 0.0 ? calibrate_beating_background(cfg)
                                            : 0.0;
  const auto env = two_sided_envelope(cfg);
  const auto taus = tau_grid(cfg.detection.tau_min, cfg.detection.tau_max, cfg.detection.bin_width);
  run.expected =
      expected_counts(taus, [&](double t) { return env.eval(t); }, cfg.detection_config(run.background));
  run.sampled = sample_histogram(run.expected, envelope_seed(cfg.seed));
  return run;
}

namespace {

// Window-integrated coincidences per p4 angle, without background.
std::vector<double> polarization_signal(const RunConfig& cfg, double delta, double p3_deg,
                                        const std::vector<double>& p4_deg,
                                        const std::vector<double>& taus) {
  const auto p1 = PolarizerState::from_name(cfg.source.p1);
  const auto p2 = PolarizerState::from_name(cfg.source.p2);
  const double scale = cfg.detection.eta * cfg.detection.bin_width *
                       cfg.polarization.duration_per_angle;
  std::vector<double> out;
  out.reserve(p4_deg.size());
  for (double a4 : p4_deg) {
    const std::pair analyzers{PolarizerState::linear(p3_deg * kDeg), PolarizerState::linear(a4 * kDeg)};
    double sum = 0.0;
    for (double t : taus) sum += after_splitter_g2(cfg, delta, p1, p2, analyzers, t);
    out.push_back(sum * scale);
  }
  return out;
}

}  // namespace

PolarizationRun run_polarization(const RunConfig& cfg, bool noiseless) {
  const auto& pc = cfg.polarization;
  PolarizationRun run;
  run.delta = pc.delta;
  run.coupled = pc.delta > 0.0;

  std::vector<double> p4;
  for (int k = 0;; ++k) {
    const double a = pc.p4_start + k * pc.p4_step;
    if (a >= pc.p4_stop - 1e-9) break;
    p4.push_back(a);
  }
  const double w = cfg.detection.bin_width;
  const auto taus = tau_grid(0.0, pc.window - w, w);
  const double n_bins = static_cast<double>(taus.size());
  constexpr double kPeriodDeg = 180.0;

  run.curves.resize(pc.p3_angles.size());
  auto build_curve = [&](std::size_t c) {
    PolarizationCurve& curve = run.curves[c];
    curve.p3_deg = pc.p3_angles[c];
    curve.p4_deg = p4;
    if (pc.background) {
      curve.background = *pc.background;
    } else {
      // Calibrated on the decoupled source so the floor is a property of the
      // apparatus, not of the shift under study.
      const auto ref = polarization_signal(cfg, 0.0, curve.p3_deg, p4, taus);
      const auto ref_fit = fit_sinusoid(p4, ref, kPeriodDeg);
      const double floor = ref_fit.amplitude / pc.target_visibility[c] - ref_fit.offset;
      curve.background = std::max(floor, 0.0) / n_bins;
    }
    const auto signal = polarization_signal(cfg, pc.delta, curve.p3_deg, p4, taus);
    curve.expected.resize(p4.size());
    curve.counts.resize(p4.size());
    for (std::size_t k = 0; k < p4.size(); ++k) {
      curve.expected[k] = signal[k] + n_bins * curve.background;
      if (noiseless) {
        curve.counts[k] = curve.expected[k];
      } else {
        auto engine = substream(cfg.seed, RngStream::Polarization, (c << 20) + k);
        curve.counts[k] = static_cast<double>(poisson_draw(engine, curve.expected[k]));
      }
    }
    curve.fit = fit_sinusoid(p4, curve.counts, kPeriodDeg);
  };

  // Curves are independent; exceptions are rethrown in order after join.
  std::vector<std::exception_ptr> errors(run.curves.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t c = 0; c < run.curves.size(); ++c) {
      workers.emplace_back([&, c] {
        try {
          build_curve(c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return run;
}

CVec bell_state(const std::string& name) {
  const double w = 1.0 / std::numbers::sqrt2;
  CVec v = CVec::Zero(4);
  if (name == "psi-" || name == "psi+") {
    v(static_cast<int>(PolBasis::HV)) = w;
    v(static_cast<int>(PolBasis::VH)) = name == "psi-" ? -w : w;
  } else if (name == "phi-" || name == "phi+") {
    v(static_cast<int>(PolBasis::HH)) = w;
    v(static_cast<int>(PolBasis::VV)) = name == "phi-" ? -w : w;
  } else {
    throw InvalidArgument("unknown Bell state '" + name + "'");
  }
  return v;
}

TomographyRun run_tomography(const RunConfig& cfg, bool with_bootstrap) {
  const auto& tc = cfg.tomography;
  TomographyRun run;
  switch (tc.source) {
    case TomoSource::Singlet: run.truth = PolDensityMatrix::pure(singlet()); break;
    case TomoSource::Measured: run.truth = fixtures::measured_singlet_state(); break;
    case TomoSource::MaximallyMixed: run.truth = PolDensityMatrix::maximally_mixed(); break;
    case TomoSource::Records: break;
  }
  if (run.truth) {
    const auto settings = canonical_settings();
    run.records = tc.noiseless
                      ? expected_tomography(*run.truth, settings, tc.n0, tc.exposure)
                      : simulate_tomography(*run.truth, settings, tc.n0, cfg.seed, tc.exposure);
  } else {
    std::filesystem::path path(tc.records_csv);
    if (path.is_relative()) path = cfg.base_dir / path;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open records file " + path.string());
    run.records = read_records_csv(in);
  }
  run.mle = mle_reconstruct(run.records);
  run.fidelity = fidelity_pure(run.mle.rho, bell_state(tc.target));
  if (with_bootstrap && tc.bootstrap_resamples > 0) {
    run.errors = tomo_error_bars(run.records, tc.bootstrap_resamples, cfg.seed);
  }
  return run;
}

ChshRun run_chsh(const RunConfig& cfg, bool with_bootstrap) {
  ChshRun run;
  run.tomography = run_tomography(cfg, with_bootstrap);
  run.chsh = chsh_optimize(run.tomography.mle.rho);
  return run;
}

}  // namespace hyperbell::app
