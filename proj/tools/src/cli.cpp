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

#include "hyperbell/app/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "hyperbell/app/pipelines.hpp"
#include "hyperbell/app/svg.hpp"
#include "hyperbell/error.hpp"
#include "hyperbell/rng.hpp"
#include "hyperbell/version.hpp"

namespace hyperbell::app {

namespace {

using nlohmann::json;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw IoError("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

void write_histogram(const std::filesystem::path& path, const CoincidenceHistogram& h) {
  std::ostringstream os;
  write_histogram_csv(os, h);
  write_file(path, os.str());
}

json metadata(const RunConfig& cfg, std::string_view command) {
  return json{{"tool", "hyperbell"},
              {"version", std::string(kVersion)},
              {"command", std::string(command)},
              {"seed", cfg.seed},
              {"rng", std::string(kRngName)}};
}

void write_run_yaml(const RunConfig& cfg, const OutputOptions& o) {
  write_file(o.out_dir / "run.yaml", to_yaml(cfg));
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

json phase_json(const BeatPhase& p) {
  return json{{"theta_rad", p.theta},
              {"theta_std_rad", p.theta_std},
              {"visibility", p.visibility},
              {"visibility_std", p.visibility_std},
              {"fit", fit_to_json(p.fit)}};
}

json real_matrix(const Eigen::Matrix4d& m) {
  json rows = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int j = 0; j < 4; ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json angles_json(const std::array<AnalyzerAngles, 4>& a) {
  const char* names[] = {"a", "a_prime", "b", "b_prime"};
  json out = json::object();
  for (int i = 0; i < 4; ++i) {
    out[names[i]] = {{"angle_rad", a[i].angle}, {"phase_rad", a[i].phase}};
  }
  return out;
}

std::string ordering_name(TimeOrdering o) {
  return o == TimeOrdering::StokesAt3 ? "stokes-at-3" : "stokes-at-4";
}

std::string basis_label(int pol3, int pol4, int branch) {
  const char* p = "HV";
  return std::string("|") + p[pol3] + p[pol4] + ";" + (branch == 0 ? "w3+d" : "w4+d") + ">";
}

}  // namespace

void cmd_envelope(const RunConfig& cfg, const OutputOptions& o, std::ostream& out) {
  const auto run = run_envelope(cfg);
  write_run_yaml(cfg, o);
  if (o.wants("csv")) {
    write_histogram(o.out_dir / "envelope_expected.csv", run.expected);
    write_histogram(o.out_dir / "envelope_sampled.csv", run.sampled);
  }
  if (o.wants("json")) {
    write_json(o.out_dir / "envelope.json",
               json{{"metadata", metadata(cfg, "envelope")},
                    {"background_per_bin", run.background},
                    {"bandwidth_mhz", spectral_bandwidth(cfg.envelope.to_envelope())},
                    {"expected", histogram_to_json(run.expected)},
                    {"sampled", histogram_to_json(run.sampled)}});
  }
  if (o.wants("svg")) {
    Plot plot{"Two-photon coincidences before the splitter", "tau (ns)", "counts per bin", {}};
    plot.series.push_back({"sampled", run.sampled.tau_centers, run.sampled.counts, {},
                           SeriesStyle::Scatter});
    plot.series.push_back({"expected", run.expected.tau_centers, run.expected.counts, {},
                           SeriesStyle::Line});
    write_file(o.out_dir / "envelope.svg", render_svg(plot));
  }
  double total = 0.0;
  for (double c : run.sampled.counts) total += c;
  out << "envelope: " << run.sampled.size() << " bins, " << static_cast<long long>(total)
      << " coincidences, background " << fixed(run.background, 3) << "/bin\n";
}

void cmd_beating(const RunConfig& cfg, const OutputOptions& o, std::ostream& out) {
  const auto run = run_beating(cfg, o.noiseless);
  const auto params = beating_params(cfg);
  write_run_yaml(cfg, o);
  if (o.wants("csv")) {
    write_histogram(o.out_dir / "beating_signal.csv", run.signal);
    write_histogram(o.out_dir / "beating_signal_expected.csv", run.signal_expected);
    write_histogram(o.out_dir / "beating_envelope.csv", run.envelope);
    std::ostringstream os;
    os << "tau_ns,ratio,ratio_std\n";
    for (std::size_t i = 0; i < run.beat.tau.size(); ++i) {
      os << format_double(run.beat.tau[i]) << ',' << format_double(run.beat.ratio[i]) << ','
         << format_double(run.beat.ratio_std[i]) << '\n';
    }
    write_file(o.out_dir / "beating_normalized.csv", os.str());
  }
  json report{{"metadata", metadata(cfg, "beating")},
              {"mode", std::string(to_string(cfg.beating.mode))},
              {"delta_rad_per_ns", cfg.source.delta},
              {"theta_rad", cfg.beating.theta},
              {"prefactor", params.prefactor},
              {"background_per_bin", run.background},
              {"noiseless", o.noiseless},
              {"phase", phase_json(run.phase)},
              {"free_fit", run.free_fit ? fit_to_json(*run.free_fit) : json(nullptr)},
              {"frequency_mhz", run.free_fit ? json(run.frequency_mhz) : json(nullptr)}};
  write_json(o.out_dir / "beating_fit.json", report);
  if (o.wants("json")) {
    write_json(o.out_dir / "beating.json",
               json{{"metadata", metadata(cfg, "beating")},
                    {"signal", histogram_to_json(run.signal)},
                    {"signal_expected", histogram_to_json(run.signal_expected)},
                    {"envelope", histogram_to_json(run.envelope)},
                    {"normalized",
                     {{"tau_ns", run.beat.tau},
                      {"ratio", run.beat.ratio},
                      {"ratio_std", run.beat.ratio_std}}}});
  }
  if (o.wants("svg")) {
    Plot raw{"Two-photon beating", "tau (ns)", "counts per bin", {}};
    raw.series.push_back({"after splitter", run.signal.tau_centers, run.signal.counts, {},
                          SeriesStyle::Scatter});
    raw.series.push_back({"envelope", run.envelope.tau_centers, run.envelope.counts, {},
                          SeriesStyle::Line});
    write_file(o.out_dir / "beating_raw.svg", render_svg(raw));

    Plot norm{"Normalized two-photon beating", "tau (ns)", "normalized coincidences", {}};
    norm.series.push_back(
        {"data", run.beat.tau, run.beat.ratio, run.beat.ratio_std, SeriesStyle::Scatter});
    Series model{"fit", {}, {}, {}, SeriesStyle::Line};
    if (!run.beat.tau.empty()) {
      const double lo = run.beat.tau.front();
      const double hi = run.beat.tau.back();
      for (int k = 0; k <= 400; ++k) {
        const double t = lo + (hi - lo) * k / 400.0;
        model.x.push_back(t);
        model.y.push_back(run.phase.fit.eval(t));
      }
    }
    norm.series.push_back(std::move(model));
    write_file(o.out_dir / "beating_normalized.svg", render_svg(norm));
  }
  out << "beating (" << to_string(cfg.beating.mode) << "): visibility "
      << fixed(run.phase.visibility, 3) << " +/- " << fixed(run.phase.visibility_std, 3)
      << ", phase " << fixed(run.phase.theta, 3) << " +/- " << fixed(run.phase.theta_std, 3)
      << " rad";
  if (run.free_fit) out << ", beat frequency " << fixed(run.frequency_mhz, 2) << " MHz";
  out << '\n';
}

void cmd_polarization(const RunConfig& cfg, const OutputOptions& o, std::ostream& out,
                      std::ostream& err) {
  if (cfg.polarization.delta != 0.0) {
    err << "warning: polarization.delta_rad_per_ns is nonzero; frequency and polarization stay "
           "coupled and fringes collapse without a frequency projection\n";
  }
  const auto run = run_polarization(cfg, o.noiseless);
  write_run_yaml(cfg, o);
  if (o.wants("csv")) {
    std::ostringstream os;
    os << "p3_deg,p4_deg,expected,counts\n";
    for (const auto& c : run.curves) {
      for (std::size_t k = 0; k < c.p4_deg.size(); ++k) {
        os << format_double(c.p3_deg) << ',' << format_double(c.p4_deg[k]) << ','
           << format_double(c.expected[k]) << ',' << format_double(c.counts[k]) << '\n';
      }
    }
    write_file(o.out_dir / "polarization.csv", os.str());
  }
  json curves = json::array();
  for (const auto& c : run.curves) {
    curves.push_back({{"p3_deg", c.p3_deg},
                      {"background_per_bin", c.background},
                      {"fit", fit_to_json(c.fit)}});
  }
  write_json(o.out_dir / "polarization_fit.json",
             json{{"metadata", metadata(cfg, "polarization")},
                  {"delta_rad_per_ns", run.delta},
                  {"window_ns", cfg.polarization.window},
                  {"noiseless", o.noiseless},
                  {"curves", curves}});
  if (o.wants("svg")) {
    Plot plot{"Polarization correlation", "P4 angle (deg)", "coincidences in window", {}};
    for (const auto& c : run.curves) {
      std::vector<double> e;
      for (double y : c.counts) e.push_back(std::sqrt(std::max(y, 1.0)));
      plot.series.push_back({"P3 = " + fixed(c.p3_deg, 0) + " deg", c.p4_deg, c.counts, e,
                             SeriesStyle::Scatter});
      Series model{"fit", {}, {}, {}, SeriesStyle::Line};
      for (int k = 0; k <= 360; ++k) {
        const double x = c.p4_deg.front() + (c.p4_deg.back() - c.p4_deg.front()) * k / 360.0;
        model.x.push_back(x);
        model.y.push_back(c.fit.eval(x));
      }
      plot.series.push_back(std::move(model));
    }
    write_file(o.out_dir / "polarization.svg", render_svg(plot));
  }
  for (const auto& c : run.curves) {
    out << "polarization P3=" << fixed(c.p3_deg, 1) << " deg: visibility "
        << fixed(c.fit.visibility, 3) << " +/- " << fixed(c.fit.visibility_std, 3) << '\n';
  }
}

namespace {

json tomography_json(const RunConfig& cfg, const TomographyRun& run) {
  json j{{"metadata", metadata(cfg, "tomography")},
         {"source", std::string(to_string(cfg.tomography.source))},
         {"density", density_to_json(run.mle.rho.mat())},
         {"n0", run.mle.n0},
         {"log_likelihood", run.mle.log_likelihood},
         {"iterations", run.mle.iterations},
         {"converged", run.mle.converged},
         {"purity", run.mle.rho.purity()},
         {"target", cfg.tomography.target},
         {"fidelity", run.fidelity}};
  if (run.truth) j["trace_distance_to_source"] = trace_distance(run.mle.rho.mat(), run.truth->mat());
  if (run.errors) {
    j["bootstrap"] = {{"resamples", run.errors->resamples},
                      {"re_std", real_matrix(run.errors->re_std)},
                      {"im_std", real_matrix(run.errors->im_std)},
                      {"s_mean", run.errors->s_mean},
                      {"s_std", run.errors->s_std}};
  }
  return j;
}

void write_records(const OutputOptions& o, const TomographyRun& run) {
  std::ostringstream os;
  write_records_csv(os, run.records);
  write_file(o.out_dir / "tomography_records.csv", os.str());
}

Plot density_plot(const CMat& rho) {
  Plot plot{"Reconstructed density matrix", "element (row-major, HH HV VH VV)", "value", {}};
  Series re{"Re", {}, {}, {}, SeriesStyle::Scatter};
  Series im{"Im", {}, {}, {}, SeriesStyle::Scatter};
  for (int i = 0; i < 16; ++i) {
    re.x.push_back(i);
    re.y.push_back(rho(i / 4, i % 4).real());
    im.x.push_back(i);
    im.y.push_back(rho(i / 4, i % 4).imag());
  }
  plot.series = {re, im};
  return plot;
}

}  // namespace

void cmd_tomography(const RunConfig& cfg, const OutputOptions& o, std::ostream& out) {
  const auto run = run_tomography(cfg);
  write_run_yaml(cfg, o);
  if (o.wants("csv")) write_records(o, run);
  write_json(o.out_dir / "density.json", tomography_json(cfg, run));
  if (o.wants("svg")) write_file(o.out_dir / "density.svg", render_svg(density_plot(run.mle.rho.mat())));
  out << "tomography: fidelity to " << cfg.tomography.target << " " << fixed(run.fidelity, 4)
      << ", purity " << fixed(run.mle.rho.purity(), 4)
      << (run.mle.converged ? "" : " (optimizer did not converge; best iterate reported)") << '\n';
}

void cmd_chsh(const RunConfig& cfg, const OutputOptions& o, std::ostream& out) {
  const auto run = run_chsh(cfg);
  write_run_yaml(cfg, o);
  if (o.wants("csv")) write_records(o, run.tomography);
  json j{{"metadata", metadata(cfg, "chsh")},
         {"s_max", run.chsh.s_max},
         {"s_search", run.chsh.s_search},
         {"violates", run.chsh.violates()},
         {"angles", angles_json(run.chsh.angles)},
         {"fidelity", run.tomography.fidelity},
         {"target", cfg.tomography.target},
         {"density", density_to_json(run.tomography.mle.rho.mat())}};
  if (run.tomography.errors) {
    j["s_std"] = run.tomography.errors->s_std;
    j["s_mean_bootstrap"] = run.tomography.errors->s_mean;
    j["bootstrap_resamples"] = run.tomography.errors->resamples;
  }
  write_json(o.out_dir / "chsh.json", j);
  out << "chsh: S = " << fixed(run.chsh.s_max, 3);
  if (run.tomography.errors) out << " +/- " << fixed(run.tomography.errors->s_std, 3);
  out << (run.chsh.violates() ? " (violates the classical bound)" : " (no violation)") << '\n';
}

void cmd_states(const OutputOptions& o, std::ostream& out) {
  json list = json::array();
  for (const auto& entry : catalog_states()) {
    const auto& s = entry.state;
    out << entry.name << " [" << ordering_name(s.ordering()) << "]:";
    json amps = json::object();
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (int br = 0; br < 2; ++br) {
          const cplx v = s.amplitude(a, b, br);
          if (std::abs(v) < 1e-15) continue;
          out << "  " << fixed(v.real(), 4) << (v.imag() < 0 ? "-" : "+")
              << fixed(std::abs(v.imag()), 4) << "i " << basis_label(a, b, br);
          amps[basis_label(a, b, br)] = {v.real(), v.imag()};
        }
      }
    }
    out << '\n';
    list.push_back({{"name", entry.name}, {"ordering", ordering_name(s.ordering())}, {"amplitudes", amps}});
  }
  if (o.wants("json")) write_json(o.out_dir / "states.json", json{{"states", list}});
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and analyze polarization-frequency hyperentangled photon pairs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::vector<std::string> formats;
  std::vector<std::string> sets;
  bool noiseless = false;

  app.add_option("-c,--config", config_path, "YAML run configuration")
      ->envname("HYPERBELL_CONFIG");
  app.add_option("--seed", seed, "Override the configured seed")->envname("HYPERBELL_SEED");
  app.add_option("-o,--out-dir", out_dir, "Output directory")
      ->envname("HYPERBELL_OUT_DIR")
      ->capture_default_str();
  app.add_option("--format", formats, "Output formats (csv, json, svg); comma separated")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json", "svg"}))
      ->envname("HYPERBELL_FORMAT");
  app.add_option("--set", sets, "Override a config key: section.key=value")
      ->envname("HYPERBELL_SET")
      ->delimiter(';');

  auto* envelope = app.add_subcommand("envelope", "Two-sided coincidence histogram before the splitter");
  auto* beating = app.add_subcommand("beating", "Two-photon beating after the splitter");
  std::string mode;
  std::optional<double> theta;
  beating->add_option("--mode", mode, "eq6 (frequency Bell state) or eq12 (phase-shifted)")
      ->check(CLI::IsMember({"eq6", "eq12"}));
  beating->add_option("--theta", theta, "Analyzer phase in rad (eq12)");
  beating->add_flag("--noiseless", noiseless, "Analyze expected instead of sampled counts");
  auto* polarization = app.add_subcommand("polarization", "Window-integrated polarization correlation");
  polarization->add_flag("--noiseless", noiseless, "Analyze expected instead of sampled counts");
  auto* tomography = app.add_subcommand("tomography", "Maximum-likelihood state reconstruction");
  auto* chsh = app.add_subcommand("chsh", "CHSH value of the reconstructed state");
  std::string records;
  for (auto* sub : {tomography, chsh}) {
    sub->add_option("--records", records, "Ingest measured records CSV instead of simulating");
  }
  auto* states = app.add_subcommand("states", "Print the 16-state hyperentangled catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    Overrides overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--set " + s + ": expected section.key=value");
      }
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (!mode.empty()) overrides.emplace_back("beating.mode", mode);
    if (theta) overrides.emplace_back("beating.theta_rad", format_double(*theta));
    if (!records.empty()) {
      overrides.emplace_back("tomography.source", "records");
      overrides.emplace_back("tomography.records_csv",
                             std::filesystem::absolute(records).string());
    }

    OutputOptions options;
    options.out_dir = out_dir;
    if (!formats.empty()) options.formats = {formats.begin(), formats.end()};
    options.noiseless = noiseless;

    if (states->parsed()) {
      cmd_states(options, out);
      return kExitOk;
    }
    RunConfig cfg = config_path.empty() ? parse_config("", "<defaults>", overrides)
                                        : load_config(config_path, overrides);
    if (envelope->parsed()) cmd_envelope(cfg, options, out);
    if (beating->parsed()) cmd_beating(cfg, options, out);
    if (polarization->parsed()) cmd_polarization(cfg, options, out, err);
    if (tomography->parsed()) cmd_tomography(cfg, options, out);
    if (chsh->parsed()) cmd_chsh(cfg, options, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "i/o failure: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o failure: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace hyperbell::app
