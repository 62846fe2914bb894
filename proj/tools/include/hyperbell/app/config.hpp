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

// Run configuration for the hyperbell command line. The on-disk form is a
// YAML document with one mapping per section; see tools/configs/README.md
// for the schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hyperbell/detection.hpp"
#include "hyperbell/temporal.hpp"

namespace hyperbell::app {

/// Invalid configuration. The message carries `file:line:column: key:`.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BeatMode { Eq6, Eq12 };
enum class TomoSource { Singlet, Measured, MaximallyMixed, Records };

// Defaults reproduce the shipped paper.defaults.yaml.
struct SourceSection {
  double delta = 0.6283185307179586;  // rad/ns, 2 pi x 100 MHz
  std::string p1 = "H";
  std::string p2 = "V";
  bool operator==(const SourceSection&) const = default;
};

struct EnvelopeSection {
  EnvelopeShape shape = EnvelopeShape::Exponential;
  double decay_time = 50.0;  // ns
  double rise_time = 1.0;    // ns
  double osc_freq = 0.0;     // rad/ns
  double pair_rate = 308.0;  // pairs/s per time ordering reaching the fibers
  bool operator==(const EnvelopeSection&) const = default;

  BiphotonEnvelope to_envelope() const;
};

struct DetectionSection {
  double eta = 1e-2;
  double bin_width = 1.0;   // ns
  double duration = 3900.0; // s
  std::optional<double> background;  // counts/bin; unset means calibrate
  double target_visibility = 0.8;
  double tau_min = -200.0;  // ns
  double tau_max = 200.0;   // ns
  bool operator==(const DetectionSection&) const = default;
};

struct BeatingSection {
  BeatMode mode = BeatMode::Eq6;
  double theta = 0.0;       // rad
  double fit_start = 0.0;   // ns
  double fit_stop = 90.0;   // ns
  bool operator==(const BeatingSection&) const = default;
};

struct PolarizationSection {
  double delta = 0.0;  // rad/ns; nonzero keeps the frequency coupling
  std::vector<double> p3_angles{0.0, 45.0};  // degrees
  double p4_start = 0.0;                     // degrees
  double p4_stop = 360.0;
  double p4_step = 20.0;
  double window = 90.0;             // ns, integration window from tau = 0
  double duration_per_angle = 60.0; // s
  std::optional<double> background;  // counts/bin; unset means calibrate
  std::vector<double> target_visibility{0.87, 0.84};  // one per p3 angle
  bool operator==(const PolarizationSection&) const = default;
};

struct TomographySection {
  TomoSource source = TomoSource::Singlet;
  std::string records_csv;  // for source = records, relative to the config file
  double n0 = 1e6;          // counts per unit exposure for a complete basis
  double exposure = 1.0;    // s
  bool noiseless = false;
  std::string target = "psi-";  // polarization Bell state for the fidelity report
  int bootstrap_resamples = 200;
  bool operator==(const TomographySection&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 0;
  SourceSection source;
  EnvelopeSection envelope;
  DetectionSection detection;
  BeatingSection beating;
  PolarizationSection polarization;
  TomographySection tomography;
  std::filesystem::path base_dir;  // resolves relative paths; not serialized

  bool operator==(const RunConfig& o) const {
    return seed == o.seed && source == o.source && envelope == o.envelope &&
           detection == o.detection && beating == o.beating &&
           polarization == o.polarization && tomography == o.tomography;
  }

  DetectionConfig detection_config(double background) const;
};

/// `key=value` pairs applied on top of the file, e.g. `beating.theta_rad=3.14`.
using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Parses and validates. `origin` names the source in diagnostics.
RunConfig parse_config(const std::string& text, const std::string& origin,
                       const Overrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// Canonical YAML; parse_config(to_yaml(c)) == c.
std::string to_yaml(const RunConfig& config);

std::string_view to_string(BeatMode mode);
std::string_view to_string(TomoSource source);

}  // namespace hyperbell::app
