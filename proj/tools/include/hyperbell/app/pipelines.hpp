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

// Config-driven simulation and analysis chains behind each subcommand.
// Nothing here touches the filesystem except record ingestion.

#include <optional>
#include <string>
#include <vector>

#include "hyperbell/analysis.hpp"
#include "hyperbell/app/config.hpp"
#include "hyperbell/detection.hpp"
#include "hyperbell/tomography.hpp"

namespace hyperbell::app {

TwoSidedEnvelope two_sided_envelope(const RunConfig& cfg);

/// Coincidence rate density after the splitter, both time orderings summed.
double after_splitter_g2(const RunConfig& cfg, double delta, const PolarizerState& p1,
                         const PolarizerState& p2,
                         const std::optional<std::pair<PolarizerState, PolarizerState>>& analyzers,
                         double tau);

/// Analyzer pair selecting the phase-shifted beat: port 3 passes
/// (H - e^{-i theta} V)/sqrt 2, port 4 passes D.
std::pair<PolarizerState, PolarizerState> phase_analyzers(double theta);

BeatingParams beating_params(const RunConfig& cfg);

struct BeatingRun {
  double background = 0.0;  // counts/bin actually used
  CoincidenceHistogram signal_expected;
  CoincidenceHistogram signal;  // sampled
  CoincidenceHistogram envelope_expected;
  CoincidenceHistogram envelope;  // sampled
  NormalizedBeat beat;
  std::optional<SinusoidFit> free_fit;  // unset when the period is unidentifiable
  BeatPhase phase;                      // fixed-period fit at the configured shift
  double frequency_mhz = 0.0;           // from the free fit; 0 when unset
};

/// `noiseless` analyzes the expected histograms instead of sampled ones.
BeatingRun run_beating(const RunConfig& cfg, bool noiseless = false);

/// Floor per bin that makes the noiseless fixed-period visibility equal
/// detection.target_visibility.
double calibrate_beating_background(const RunConfig& cfg);
double resolve_beating_background(const RunConfig& cfg);

struct EnvelopeRun {
  double background = 0.0;
  CoincidenceHistogram expected;
  CoincidenceHistogram sampled;
};

/// Two-sided histogram before the splitter.
EnvelopeRun run_envelope(const RunConfig& cfg);

struct PolarizationCurve {
  double p3_deg = 0.0;
  double background = 0.0;  // counts/bin
  std::vector<double> p4_deg;
  std::vector<double> expected;
  std::vector<double> counts;  // sampled, or expected when noiseless
  SinusoidFit fit;
};

struct PolarizationRun {
  double delta = 0.0;
  std::vector<PolarizationCurve> curves;
  bool coupled = false;  // delta != 0
};

PolarizationRun run_polarization(const RunConfig& cfg, bool noiseless = false);

/// Polarization Bell state by name: psi-, psi+, phi-, phi+.
CVec bell_state(const std::string& name);

struct TomographyRun {
  std::optional<PolDensityMatrix> truth;  // unset for ingested records
  std::vector<TomoRecord> records;
  MleResult mle;
  double fidelity = 0.0;  // to tomography.target
  std::optional<BootstrapResult> errors;
};

TomographyRun run_tomography(const RunConfig& cfg, bool with_bootstrap = true);

struct ChshRun {
  TomographyRun tomography;
  ChshResult chsh;
};

ChshRun run_chsh(const RunConfig& cfg, bool with_bootstrap = true);

}  // namespace hyperbell::app
