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

#include "hyperbell/detection.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hyperbell/error.hpp"
#include "hyperbell/rng.hpp"

namespace hyperbell {

void DetectionConfig::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("detection: eta must lie in (0, 1]");
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw InvalidArgument("detection: bin_width must be positive");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InvalidArgument("detection: duration must be positive");
  }
  if (!(background_rate >= 0.0) || !std::isfinite(background_rate)) {
    throw InvalidArgument("detection: background_rate must be >= 0");
  }
}

void to_json(nlohmann::json& j, const DetectionConfig& cfg) {
  j = nlohmann::json{{"eta", cfg.eta},
                     {"bin_width_ns", cfg.bin_width},
                     {"duration_s", cfg.duration},
                     {"background_per_bin", cfg.background_rate},
                     {"seed", cfg.seed},
                     {"rng", std::string(kRngName)}};
}

void from_json(const nlohmann::json& j, DetectionConfig& cfg) {
  j.at("eta").get_to(cfg.eta);
  j.at("bin_width_ns").get_to(cfg.bin_width);
  j.at("duration_s").get_to(cfg.duration);
  j.at("background_per_bin").get_to(cfg.background_rate);
  j.at("seed").get_to(cfg.seed);
}

void CoincidenceHistogram::validate() const {
  if (tau_centers.size() != counts.size()) {
    throw InvalidArgument("histogram: tau and count columns differ in length");
  }
  for (double c : counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw InvalidArgument("histogram: counts must be finite and non-negative");
    }
    if (sampled && c != std::floor(c)) {
      throw InvalidArgument("histogram: sampled counts must be integers");
    }
  }
}

std::vector<double> tau_grid(double tau_min, double tau_max, double bin_width) {
  if (!(bin_width > 0.0) || !(tau_max >= tau_min)) {
    throw InvalidArgument("tau_grid: need bin_width > 0 and tau_max >= tau_min");
  }
  const auto n = static_cast<std::size_t>(std::floor((tau_max - tau_min) / bin_width + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = tau_min + static_cast<double>(i) * bin_width;
  return out;
}

CoincidenceHistogram expected_counts(std::span<const double> tau_centers,
                                     const std::function<double(double)>& g2,
                                     const DetectionConfig& cfg) {
  cfg.validate();
  CoincidenceHistogram hist;
  hist.config = cfg;
  hist.tau_centers.assign(tau_centers.begin(), tau_centers.end());
  hist.counts.reserve(tau_centers.size());
  const double scale = cfg.eta * cfg.bin_width * cfg.duration;
  for (double tau : tau_centers) {
    const double g = g2(tau);
    if (!(g >= 0.0)) throw InvalidArgument("expected_counts: g2 must be non-negative");
    hist.counts.push_back(g * scale + cfg.background_rate);
  }
  return hist;
}

CoincidenceHistogram sample_histogram(const CoincidenceHistogram& expected, std::uint64_t seed) {
  expected.validate();
  CoincidenceHistogram out = expected;
  out.sampled = true;
  out.config.seed = seed;
  for (std::size_t i = 0; i < expected.counts.size(); ++i) {
    auto engine = substream(seed, RngStream::Histogram, i);
    out.counts[i] = static_cast<double>(poisson_draw(engine, expected.counts[i]));
  }
  return out;
}

double visibility_degradation(double v_signal, double signal_peak, double background) {
  if (v_signal < 0.0 || signal_peak < 0.0 || background < 0.0) {
    throw InvalidArgument("visibility_degradation: inputs must be non-negative");
  }
  const double denom = signal_peak + 2.0 * background;
  return denom > 0.0 ? v_signal * signal_peak / denom : 0.0;
}

double background_for_visibility(double v_signal, double signal_peak, double v_target) {
  if (!(v_target > 0.0) || v_target > v_signal || signal_peak < 0.0) {
    throw InvalidArgument("background_for_visibility: need 0 < v_target <= v_signal");
  }
  return 0.5 * signal_peak * (v_signal / v_target - 1.0);
}

ChiSquare chi_square(const CoincidenceHistogram& sampled, const CoincidenceHistogram& expected) {
  if (sampled.size() != expected.size()) {
    throw InvalidArgument("chi_square: histogram sizes differ");
  }
  ChiSquare out;
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    const double e = expected.counts[i];
    if (e <= 0.0) continue;
    const double d = sampled.counts[i] - e;
    out.chi2 += d * d / e;
    ++out.dof;
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw IoError("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw IoError("cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist) {
  hist.validate();
  out << "tau_ns,counts\n";
  for (std::size_t i = 0; i < hist.size(); ++i) {
    out << format_double(hist.tau_centers[i]) << ',' << format_double(hist.counts[i]) << '\n';
  }
  if (!out) throw IoError("write_histogram_csv: stream write failed");
}

CoincidenceHistogram read_histogram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("histogram CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tau_ns,counts") {
    throw IoError("histogram CSV: expected header 'tau_ns,counts', got '" + line + "'");
  }
  CoincidenceHistogram hist;
  bool all_integer = true;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoError("histogram CSV line " + std::to_string(line_no) + ": expected two columns");
    }
    try {
      hist.tau_centers.push_back(parse_double(std::string_view(line).substr(0, comma)));
      hist.counts.push_back(parse_double(std::string_view(line).substr(comma + 1)));
    } catch (const IoError& e) {
      throw IoError("histogram CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    all_integer = all_integer && hist.counts.back() == std::floor(hist.counts.back());
  }
  hist.sampled = all_integer;
  try {
    hist.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("histogram CSV: ") + e.what());
  }
  return hist;
}

nlohmann::json histogram_to_json(const CoincidenceHistogram& hist) {
  hist.validate();
  return nlohmann::json{{"config", hist.config},
                        {"sampled", hist.sampled},
                        {"tau_ns", hist.tau_centers},
                        {"counts", hist.counts}};
}

CoincidenceHistogram histogram_from_json(const nlohmann::json& j) {
  CoincidenceHistogram hist;
  try {
    j.at("config").get_to(hist.config);
    j.at("sampled").get_to(hist.sampled);
    j.at("tau_ns").get_to(hist.tau_centers);
    j.at("counts").get_to(hist.counts);
    hist.validate();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("histogram JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("histogram JSON: ") + e.what());
  }
  return hist;
}

}  // namespace hyperbell
