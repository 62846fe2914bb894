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

#include "hyperbell/app/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "hyperbell/error.hpp"
#include "hyperbell/optics.hpp"

namespace hyperbell::app {

namespace {

const std::set<std::string> kTopLevel{"seed",     "source",       "envelope",  "detection",
                                      "beating",  "polarization", "tomography"};

class Context {
 public:
  Context(std::string origin, std::set<std::string> overridden)
      : origin_(std::move(origin)), overridden_(std::move(overridden)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& key,
                         const std::string& message) const {
    std::ostringstream os;
    if (overridden_.count(key)) {
      os << "--set " << key << ": " << message;
    } else if (node && !node.Mark().is_null()) {
      os << origin_ << ':' << node.Mark().line + 1 << ':' << node.Mark().column + 1 << ": " << key
         << ": " << message;
    } else {
      os << origin_ << ": " << key << ": " << message;
    }
    throw ConfigError(os.str());
  }

 private:
  std::string origin_;
  std::set<std::string> overridden_;
};

// One mapping section. Every key must be consumed before finish().
class Section {
 public:
  Section(const Context& ctx, YAML::Node node, std::string name)
      : ctx_(ctx), node_(std::move(node)), name_(std::move(name)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) ctx_.fail(node_, name_, "expected a mapping");
  }

  std::string key(const std::string& k) const { return name_.empty() ? k : name_ + "." + k; }

  YAML::Node raw(const std::string& k) {
    seen_.insert(k);
    // Absent keys must stay undefined: Node() is a defined null, and the
    // mutable operator[] inserts the key.
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    return std::as_const(node_)[k];
  }

  template <typename T>
  void get(const std::string& k, T& out) {
    const YAML::Node n = raw(k);
    if (!n) return;
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      ctx_.fail(n, key(k), "expected " + type_name<T>());
    }
  }

  void get_positive(const std::string& k, double& out) {
    get(k, out);
    if (!(out > 0.0) || !std::isfinite(out)) ctx_.fail(raw(k), key(k), "must be positive");
  }

  void get_nonnegative(const std::string& k, double& out) {
    get(k, out);
    if (!(out >= 0.0) || !std::isfinite(out)) ctx_.fail(raw(k), key(k), "must be >= 0");
  }

  void get_finite(const std::string& k, double& out) {
    get(k, out);
    if (!std::isfinite(out)) ctx_.fail(raw(k), key(k), "must be finite");
  }

  /// "auto" or a non-negative number.
  void get_auto(const std::string& k, std::optional<double>& out) {
    const YAML::Node n = raw(k);
    if (!n) return;
    if (n.IsScalar() && n.Scalar() == "auto") {
      out.reset();
      return;
    }
    double v = 0.0;
    get(k, v);
    if (!(v >= 0.0) || !std::isfinite(v)) ctx_.fail(n, key(k), "must be 'auto' or >= 0");
    out = v;
  }

  void fail(const std::string& k, const std::string& message) const {
    ctx_.fail(node_ && node_.IsMap() ? std::as_const(node_)[k] : node_, key(k), message);
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto k = kv.first.as<std::string>();
      if (!seen_.count(k)) ctx_.fail(kv.first, key(k), "unknown key");
    }
  }

 private:
  template <typename T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "true or false";
    if constexpr (std::is_same_v<T, std::string>) return "a string";
    if constexpr (std::is_same_v<T, std::vector<double>>) return "a list of numbers";
    if constexpr (std::is_integral_v<T>) return "a non-negative integer";
    return "a number";
  }

  const Context& ctx_;
  YAML::Node node_;
  std::string name_;
  std::set<std::string> seen_;
};

void apply_override(YAML::Node& root, const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("--set " + key + ": cannot parse value '" + value + "'");
  }
  if (dot == std::string::npos) {
    root[key] = parsed;
    return;
  }
  const std::string section = key.substr(0, dot);
  const std::string leaf = key.substr(dot + 1);
  if (leaf.empty() || leaf.find('.') != std::string::npos) {
    throw ConfigError("--set " + key + ": expected section.key");
  }
  if (!root[section] || root[section].IsNull()) root[section] = YAML::Node(YAML::NodeType::Map);
  root[section][leaf] = parsed;
}

template <typename Enum>
Enum parse_choice(Section& s, const std::string& k, Enum current,
                  std::initializer_list<std::pair<std::string_view, Enum>> choices) {
  std::string text;
  bool present = false;
  {
    const YAML::Node n = s.raw(k);
    present = static_cast<bool>(n);
  }
  if (!present) return current;
  s.get(k, text);
  std::string expected;
  for (const auto& [name, value] : choices) {
    if (text == name) return value;
    expected += expected.empty() ? "" : ", ";
    expected += name;
  }
  s.fail(k, "unknown value '" + text + "' (expected one of " + expected + ")");
  return current;
}

void check_polarizer(Section& s, const std::string& k, const std::string& name) {
  try {
    (void)PolarizerState::from_name(name);
  } catch (const InvalidArgument& e) {
    s.fail(k, e.what());
  }
}

std::string fmt(double v) { return format_double(v); }

std::string fmt_list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out + "]";
}

std::string fmt_auto(const std::optional<double>& v) { return v ? fmt(*v) : "auto"; }

}  // namespace

BiphotonEnvelope EnvelopeSection::to_envelope() const {
  return BiphotonEnvelope{shape, decay_time, rise_time, osc_freq, pair_rate};
}

DetectionConfig RunConfig::detection_config(double background) const {
  DetectionConfig cfg;
  cfg.eta = detection.eta;
  cfg.bin_width = detection.bin_width;
  cfg.duration = detection.duration;
  cfg.background_rate = background;
  cfg.seed = seed;
  return cfg;
}

std::string_view to_string(BeatMode mode) { return mode == BeatMode::Eq6 ? "eq6" : "eq12"; }

std::string_view to_string(TomoSource source) {
  switch (source) {
    case TomoSource::Singlet: return "singlet";
    case TomoSource::Measured: return "measured";
    case TomoSource::MaximallyMixed: return "maximally-mixed";
    case TomoSource::Records: return "records";
  }
  return "singlet";
}

RunConfig parse_config(const std::string& text, const std::string& origin,
                       const Overrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ':' + std::to_string(e.mark.line + 1) + ':' +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError(origin + ": top level must be a mapping");

  std::set<std::string> overridden;
  for (const auto& [key, value] : overrides) {
    apply_override(root, key, value);
    overridden.insert(key);
  }
  const Context ctx(origin, overridden);
  const YAML::Node& croot = root;
  RunConfig cfg;

  Section top(ctx, root, "");
  for (const auto& kv : root) {
    const auto k = kv.first.as<std::string>();
    if (!kTopLevel.count(k)) ctx.fail(kv.first, k, "unknown key");
  }
  top.get("seed", cfg.seed);

  {
    Section s(ctx, croot["source"], "source");
    s.get_nonnegative("delta_rad_per_ns", cfg.source.delta);
    s.get("p1", cfg.source.p1);
    s.get("p2", cfg.source.p2);
    check_polarizer(s, "p1", cfg.source.p1);
    check_polarizer(s, "p2", cfg.source.p2);
    if (cfg.source.delta == 0.0 && cfg.source.p1 == cfg.source.p2) {
      s.fail("p2", "p1 equal to p2 with zero shift leaves no cross-port amplitude");
    }
    s.finish();
  }
  {
    Section s(ctx, croot["envelope"], "envelope");
    cfg.envelope.shape = parse_choice(s, "shape", cfg.envelope.shape,
                                      {{"exponential", EnvelopeShape::Exponential},
                                       {"damped-oscillation", EnvelopeShape::DampedOscillation}});
    s.get_positive("decay_time_ns", cfg.envelope.decay_time);
    s.get_nonnegative("rise_time_ns", cfg.envelope.rise_time);
    s.get_nonnegative("osc_freq_rad_per_ns", cfg.envelope.osc_freq);
    s.get_positive("pair_rate_per_s", cfg.envelope.pair_rate);
    s.finish();
  }
  {
    Section s(ctx, croot["detection"], "detection");
    s.get("eta", cfg.detection.eta);
    if (!(cfg.detection.eta > 0.0 && cfg.detection.eta <= 1.0)) {
      s.fail("eta", "must lie in (0, 1]");
    }
    s.get_positive("bin_width_ns", cfg.detection.bin_width);
    s.get_positive("duration_s", cfg.detection.duration);
    s.get_auto("background_per_bin", cfg.detection.background);
    s.get("target_visibility", cfg.detection.target_visibility);
    if (!(cfg.detection.target_visibility > 0.0 && cfg.detection.target_visibility <= 1.0)) {
      s.fail("target_visibility", "must lie in (0, 1]");
    }
    s.get_finite("tau_min_ns", cfg.detection.tau_min);
    s.get_finite("tau_max_ns", cfg.detection.tau_max);
    if (!(cfg.detection.tau_max > cfg.detection.tau_min)) {
      s.fail("tau_max_ns", "must exceed tau_min_ns");
    }
    s.finish();
  }
  {
    Section s(ctx, croot["beating"], "beating");
    cfg.beating.mode =
        parse_choice(s, "mode", cfg.beating.mode, {{"eq6", BeatMode::Eq6}, {"eq12", BeatMode::Eq12}});
    s.get_finite("theta_rad", cfg.beating.theta);
    s.get_nonnegative("fit_start_ns", cfg.beating.fit_start);
    s.get_positive("fit_stop_ns", cfg.beating.fit_stop);
    if (!(cfg.beating.fit_stop > cfg.beating.fit_start)) {
      s.fail("fit_stop_ns", "must exceed fit_start_ns");
    }
    s.finish();
  }
  {
    Section s(ctx, croot["polarization"], "polarization");
    auto& p = cfg.polarization;
    s.get_nonnegative("delta_rad_per_ns", p.delta);
    s.get("p3_angles_deg", p.p3_angles);
    if (p.p3_angles.empty()) s.fail("p3_angles_deg", "must not be empty");
    s.get_finite("p4_start_deg", p.p4_start);
    s.get_finite("p4_stop_deg", p.p4_stop);
    s.get_positive("p4_step_deg", p.p4_step);
    if (!(p.p4_stop > p.p4_start)) s.fail("p4_stop_deg", "must exceed p4_start_deg");
    s.get_positive("window_ns", p.window);
    s.get_positive("duration_per_angle_s", p.duration_per_angle);
    s.get_auto("background_per_bin", p.background);
    s.get("target_visibility", p.target_visibility);
    if (p.target_visibility.size() != p.p3_angles.size()) {
      s.fail("target_visibility", "needs one entry per p3 angle");
    }
    for (double v : p.target_visibility) {
      if (!(v > 0.0 && v <= 1.0)) s.fail("target_visibility", "entries must lie in (0, 1]");
    }
    s.finish();
  }
  {
    Section s(ctx, croot["tomography"], "tomography");
    auto& t = cfg.tomography;
    t.source = parse_choice(s, "source", t.source,
                            {{"singlet", TomoSource::Singlet},
                             {"measured", TomoSource::Measured},
                             {"maximally-mixed", TomoSource::MaximallyMixed},
                             {"records", TomoSource::Records}});
    s.get("records_csv", t.records_csv);
    if (t.source == TomoSource::Records && t.records_csv.empty()) {
      s.fail("records_csv", "required when source is records");
    }
    s.get_positive("n0", t.n0);
    s.get_positive("exposure_s", t.exposure);
    s.get("noiseless", t.noiseless);
    s.get("target", t.target);
    if (t.target != "psi-" && t.target != "psi+" && t.target != "phi-" && t.target != "phi+") {
      s.fail("target", "unknown Bell state '" + t.target + "' (expected psi-, psi+, phi-, phi+)");
    }
    s.get("bootstrap_resamples", t.bootstrap_resamples);
    if (t.bootstrap_resamples < 0 || t.bootstrap_resamples == 1) {
      s.fail("bootstrap_resamples", "must be 0 (disabled) or >= 2");
    }
    s.finish();
  }

  try {
    cfg.envelope.to_envelope().validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(origin + ": envelope: " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_config(buf.str(), path.string(), overrides);
  cfg.base_dir = path.parent_path();
  return cfg;
}

std::string to_yaml(const RunConfig& c) {
  std::ostringstream os;
  os << "seed: " << c.seed << "\n";
  os << "source:\n"
     << "  delta_rad_per_ns: " << fmt(c.source.delta) << "\n"
     << "  p1: " << c.source.p1 << "\n"
     << "  p2: " << c.source.p2 << "\n";
  os << "envelope:\n"
     << "  shape: " << to_string(c.envelope.shape) << "\n"
     << "  decay_time_ns: " << fmt(c.envelope.decay_time) << "\n"
     << "  rise_time_ns: " << fmt(c.envelope.rise_time) << "\n"
     << "  osc_freq_rad_per_ns: " << fmt(c.envelope.osc_freq) << "\n"
     << "  pair_rate_per_s: " << fmt(c.envelope.pair_rate) << "\n";
  os << "detection:\n"
     << "  eta: " << fmt(c.detection.eta) << "\n"
     << "  bin_width_ns: " << fmt(c.detection.bin_width) << "\n"
     << "  duration_s: " << fmt(c.detection.duration) << "\n"
     << "  background_per_bin: " << fmt_auto(c.detection.background) << "\n"
     << "  target_visibility: " << fmt(c.detection.target_visibility) << "\n"
     << "  tau_min_ns: " << fmt(c.detection.tau_min) << "\n"
     << "  tau_max_ns: " << fmt(c.detection.tau_max) << "\n";
  os << "beating:\n"
     << "  mode: " << to_string(c.beating.mode) << "\n"
     << "  theta_rad: " << fmt(c.beating.theta) << "\n"
     << "  fit_start_ns: " << fmt(c.beating.fit_start) << "\n"
     << "  fit_stop_ns: " << fmt(c.beating.fit_stop) << "\n";
  const auto& p = c.polarization;
  os << "polarization:\n"
     << "  delta_rad_per_ns: " << fmt(p.delta) << "\n"
     << "  p3_angles_deg: " << fmt_list(p.p3_angles) << "\n"
     << "  p4_start_deg: " << fmt(p.p4_start) << "\n"
     << "  p4_stop_deg: " << fmt(p.p4_stop) << "\n"
     << "  p4_step_deg: " << fmt(p.p4_step) << "\n"
     << "  window_ns: " << fmt(p.window) << "\n"
     << "  duration_per_angle_s: " << fmt(p.duration_per_angle) << "\n"
     << "  background_per_bin: " << fmt_auto(p.background) << "\n"
     << "  target_visibility: " << fmt_list(p.target_visibility) << "\n";
  const auto& t = c.tomography;
  os << "tomography:\n"
     << "  source: " << to_string(t.source) << "\n"
     << "  records_csv: \"" << t.records_csv << "\"\n"
     << "  n0: " << fmt(t.n0) << "\n"
     << "  exposure_s: " << fmt(t.exposure) << "\n"
     << "  noiseless: " << (t.noiseless ? "true" : "false") << "\n"
     << "  target: \"" << t.target << "\"\n"
     << "  bootstrap_resamples: " << t.bootstrap_resamples << "\n";
  return os.str();
}

}  // namespace hyperbell::app
