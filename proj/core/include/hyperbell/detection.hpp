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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace hyperbell {

struct DetectionConfig {
  double eta = 1e-2;             // joint detection efficiency
  double bin_width = 1.0;        // ns
  double duration = 3900.0;      // s
  double background_rate = 0.0;  // accidental counts per bin
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const DetectionConfig&) const = default;
};

void to_json(nlohmann::json& j, const DetectionConfig& cfg);
void from_json(const nlohmann::json& j, DetectionConfig& cfg);

/// Binned coincidences. Expected histograms hold real means; sampled ones
/// hold integer-valued counts.
struct CoincidenceHistogram {
  std::vector<double> tau_centers;  // ns
  std::vector<double> counts;
  DetectionConfig config;
  bool sampled = false;

  std::size_t size() const { return counts.size(); }
  void validate() const;
  bool operator==(const CoincidenceHistogram&) const = default;
};

/// Bin centers tau_min, tau_min + w, ..., up to and including tau_max.
std::vector<double> tau_grid(double tau_min, double tau_max, double bin_width);

/// counts_i = g2(tau_i) * eta * bin_width * duration + background_rate, with g2
/// a rate density in 1/(s ns).
CoincidenceHistogram expected_counts(std::span<const double> tau_centers,
                                     const std::function<double(double)>& g2,
                                     const DetectionConfig& cfg);

/// Independent Poisson draw per bin from counter-based substreams.
CoincidenceHistogram sample_histogram(const CoincidenceHistogram& expected, std::uint64_t seed);

/// Visibility of a sinusoid of peak `signal_peak` riding on a uniform floor.
double visibility_degradation(double v_signal, double signal_peak, double background);

/// Floor that turns visibility `v_signal` into `v_target`; inverse of
/// visibility_degradation.
double background_for_visibility(double v_signal, double signal_peak, double v_target);

struct ChiSquare {
  double chi2 = 0.0;
  int dof = 0;
};

/// Pearson chi-square of sampled against expected over bins with expected > 0.
ChiSquare chi_square(const CoincidenceHistogram& sampled, const CoincidenceHistogram& expected);

/// CSV with header `tau_ns,counts`; numbers use the shortest round-trip form.
void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist);
CoincidenceHistogram read_histogram_csv(std::istream& in);

nlohmann::json histogram_to_json(const CoincidenceHistogram& hist);
CoincidenceHistogram histogram_from_json(const nlohmann::json& j);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace hyperbell
