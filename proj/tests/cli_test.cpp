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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hyperbell/app/cli.hpp"
#include "hyperbell/app/config.hpp"
#include "hyperbell/app/pipelines.hpp"
#include "hyperbell/error.hpp"
#include "hyperbell/fixtures.hpp"

namespace hyperbell::app {
namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

RunConfig defaults() { return load_config(HYPERBELL_DEFAULTS_FILE); }

// Fresh scratch directory per test.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hyperbell_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "hyperbell");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config_error(const std::string& text, const Overrides& overrides = {}) {
  try {
    parse_config(text, "cfg.yaml", overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ShippedDefaultsMatchBuiltInDefaults) {
  EXPECT_TRUE(defaults() == parse_config("", "<empty>"));
}

TEST(Config, YamlRoundTripIsExact) {
  const Overrides overrides{{"seed", "18446744073709551615"},
                            {"source.delta_rad_per_ns", "0.1234567890123456789"},
                            {"envelope.shape", "damped-oscillation"},
                            {"detection.background_per_bin", "3.3"},
                            {"beating.mode", "eq12"},
                            {"beating.theta_rad", "4.71238898038469"},
                            {"polarization.p3_angles_deg", "[10, 20.5, 30]"},
                            {"polarization.target_visibility", "[0.9, 0.8, 0.7]"},
                            {"tomography.source", "measured"},
                            {"tomography.noiseless", "true"}};
  for (const RunConfig& c : {defaults(), parse_config("", "<o>", overrides)}) {
    const RunConfig back = parse_config(to_yaml(c), "<round-trip>");
    EXPECT_TRUE(back == c);
    EXPECT_EQ(to_yaml(back), to_yaml(c));
  }
  const RunConfig o = parse_config("", "<o>", overrides);
  EXPECT_EQ(o.seed, 18446744073709551615ull);
  EXPECT_EQ(o.beating.mode, BeatMode::Eq12);
  ASSERT_TRUE(o.detection.background.has_value());
  EXPECT_EQ(*o.detection.background, 3.3);
  EXPECT_EQ(o.polarization.p3_angles, (std::vector<double>{10, 20.5, 30}));
}

TEST(Config, UnknownKeysAreRejectedWithLocation) {
  const std::string top = config_error("seed: 1\nsorce:\n  p1: H\n");
  EXPECT_NE(top.find("cfg.yaml:2:"), std::string::npos) << top;
  EXPECT_NE(top.find("sorce"), std::string::npos) << top;
  const std::string nested = config_error("detection:\n  eta: 0.1\n  bin_widht_ns: 2\n");
  EXPECT_NE(nested.find("cfg.yaml:3:"), std::string::npos) << nested;
  EXPECT_NE(nested.find("bin_widht_ns"), std::string::npos) << nested;
  EXPECT_NE(config_error("", {{"detection.nope", "1"}}), "");
}

TEST(Config, BadValuesNameTheKey) {
  const std::string eta = config_error("detection:\n  eta: -0.5\n");
  EXPECT_NE(eta.find("cfg.yaml:2:"), std::string::npos) << eta;
  EXPECT_NE(eta.find("eta"), std::string::npos) << eta;
  EXPECT_NE(config_error("beating:\n  mode: eq7\n").find("mode"), std::string::npos);
  EXPECT_NE(config_error("source:\n  p1: Q\n").find("p1"), std::string::npos);
  EXPECT_NE(config_error("envelope:\n  decay_time_ns: nan\n").find("decay_time_ns"),
            std::string::npos);
  EXPECT_NE(config_error("detection:\n  tau_min_ns: 5\n  tau_max_ns: 5\n"), "");
  EXPECT_NE(config_error("seed: -1\n"), "");
  EXPECT_NE(config_error("- just\n- a list\n"), "");
  const std::string set = config_error("", {{"detection.eta", "abc"}});
  EXPECT_NE(set.find("--set detection.eta"), std::string::npos) << set;
}

TEST(Config, RelativeRecordsPathResolvesAgainstConfigDirectory) {
  const fs::path dir = scratch("relative");
  {
    std::ofstream f(dir / "run.yaml");
    f << "tomography:\n  source: records\n  records_csv: data.csv\n";
  }
  const RunConfig c = load_config(dir / "run.yaml");
  EXPECT_EQ(c.base_dir, dir);
  EXPECT_THROW(run_tomography(c), IoError);
  {
    std::ofstream f(dir / "data.csv");
    write_records_csv(f, simulate_tomography(fixtures::measured_singlet_state(), canonical_settings(), 1e6, 9));
  }
  EXPECT_NEAR(run_tomography(c, false).fidelity, 0.883, 0.01);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  EXPECT_EQ(run({"--version"}).code, kExitOk);
  EXPECT_EQ(run({}).code, kExitConfig);
  EXPECT_EQ(run({"beating", "--mode", "eq9"}).code, kExitConfig);
  EXPECT_EQ(run({"--bogus", "states"}).code, kExitConfig);
  EXPECT_EQ(run({"--set", "noequals", "envelope", "-o", dir.string()}).code, kExitConfig);
  EXPECT_EQ(run({"--set", "detection.eta=2", "envelope", "-o", dir.string()}).code, kExitConfig);

  // Fit window shorter than two beat periods.
  const CliResult numeric = run({"-c", HYPERBELL_DEFAULTS_FILE, "-o", dir.string(), "--set",
                                 "beating.fit_stop_ns=12", "beating"});
  EXPECT_EQ(numeric.code, kExitNumeric) << numeric.err;

  EXPECT_EQ(run({"-c", (dir / "missing.yaml").string(), "envelope"}).code, kExitIo);
  {
    std::ofstream f(dir / "blocker");
    f << "x";
  }
  EXPECT_EQ(run({"-o", (dir / "blocker" / "sub").string(), "envelope"}).code, kExitIo);
}

TEST(Cli, BinaryReportsConfigErrorsThroughExitStatus) {
  const fs::path dir = scratch("binary");
  const std::string base = std::string("\"") + HYPERBELL_CLI_BINARY + "\" -o \"" +
                           dir.string() + "\" ";
  const int ok = std::system((base + "states > /dev/null").c_str());
  const int bad = std::system((base + "--set seed=x envelope 2> /dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(ok) && WIFEXITED(bad));
  EXPECT_EQ(WEXITSTATUS(ok), kExitOk);
  EXPECT_EQ(WEXITSTATUS(bad), kExitConfig);
}

TEST(Cli, OutputsAreByteIdenticalForFixedSeed) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  for (const std::string cmd : {"envelope", "beating", "polarization", "tomography"}) {
    for (const fs::path& dir : {a, b}) {
      const CliResult r = run({"-c", HYPERBELL_DEFAULTS_FILE, "--seed", "11", "--format",
                               "csv,json,svg", "-o", (dir / cmd).string(), cmd});
      ASSERT_EQ(r.code, kExitOk) << cmd << ": " << r.err;
    }
  }
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path other = b / fs::relative(entry.path(), a);
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path();
    ++compared;
  }
  EXPECT_GE(compared, 20);

  const fs::path c = scratch("det_c");
  ASSERT_EQ(run({"-c", HYPERBELL_DEFAULTS_FILE, "--seed", "12", "-o", c.string(), "beating"}).code,
            kExitOk);
  EXPECT_NE(slurp(c / "beating_signal.csv"), slurp(a / "beating" / "beating_signal.csv"));
}

TEST(Cli, ResolvedConfigIsWrittenAndReloadable) {
  const fs::path dir = scratch("runyaml");
  ASSERT_EQ(run({"-c", HYPERBELL_DEFAULTS_FILE, "--seed", "5", "-o", dir.string(), "--set",
                 "beating.theta_rad=1.25", "beating"})
                .code,
            kExitOk);
  const RunConfig written = load_config(dir / "run.yaml");
  EXPECT_EQ(written.seed, 5u);
  EXPECT_EQ(written.beating.theta, 1.25);
  const auto meta = nlohmann::json::parse(slurp(dir / "beating.json"));
  EXPECT_EQ(meta.at("metadata").at("command"), "beating");
  EXPECT_EQ(meta.at("metadata").at("seed"), 5);
}

TEST(Cli, FormatSelectionControlsFiles) {
  const fs::path dir = scratch("formats");
  ASSERT_EQ(run({"--format", "svg", "-o", dir.string(), "envelope"}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir / "envelope.svg"));
  EXPECT_FALSE(fs::exists(dir / "envelope_sampled.csv"));
  EXPECT_EQ(slurp(dir / "envelope.svg").rfind("<svg", 0), 0u);
}

TEST(Cli, StatesListsSixteenCatalogEntries) {
  const fs::path dir = scratch("states");
  const CliResult r = run({"-o", dir.string(), "states"});
  ASSERT_EQ(r.code, kExitOk);
  for (const char* name : {"Psi1+", "Psi1-", "Psi2+", "Psi2-", "Phi1+", "Phi1-", "Phi2+", "Phi2-"}) {
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
  }
  const auto j = nlohmann::json::parse(slurp(dir / "states.json"));
  EXPECT_EQ(j.at("states").size(), 16u);
}

TEST(Envelope, ExpectedCountsScaleWithDuration) {
  RunConfig c = defaults();
  c.detection.background = 0.0;
  const EnvelopeRun one = run_envelope(c);
  c.detection.duration *= 2.0;
  const EnvelopeRun two = run_envelope(c);
  ASSERT_EQ(one.expected.size(), two.expected.size());
  double total_one = 0.0, total_two = 0.0;
  for (std::size_t i = 0; i < one.expected.size(); ++i) {
    EXPECT_NEAR(two.expected.counts[i], 2.0 * one.expected.counts[i],
                1e-12 * std::max(1.0, one.expected.counts[i]));
    total_one += one.sampled.counts[i];
    total_two += two.sampled.counts[i];
  }
  EXPECT_NEAR(total_two / total_one, 2.0, 0.05);
}

TEST(Envelope, VanishesAtZeroDelayWithoutBackground) {
  RunConfig c = defaults();
  c.detection.background = 0.0;
  const EnvelopeRun r = run_envelope(c);
  const auto it = std::find(r.expected.tau_centers.begin(), r.expected.tau_centers.end(), 0.0);
  ASSERT_NE(it, r.expected.tau_centers.end());
  const auto i = static_cast<std::size_t>(it - r.expected.tau_centers.begin());
  EXPECT_LT(r.expected.counts[i], 1e-9);
  EXPECT_EQ(r.sampled.counts[i], 0.0);
  EXPECT_GT(*std::max_element(r.expected.counts.begin(), r.expected.counts.end()), 100.0);
}

TEST(Beating, PhaseShiftOfPiPutsMinimumAtZeroDelay) {
  RunConfig c = defaults();
  c.beating.mode = BeatMode::Eq12;
  c.beating.theta = kPi;
  const BeatingRun r = run_beating(c, true);
  ASSERT_GE(r.beat.tau.size(), 20u);
  // The bin at tau = 0 is dropped (envelope below threshold); minima recur
  // every 10 ns, so the first-period minimum sits one bin from a node.
  const auto lo = std::min_element(r.beat.ratio.begin(), r.beat.ratio.begin() + 19);
  const auto hi = std::max_element(r.beat.ratio.begin(), r.beat.ratio.begin() + 19);
  const double tmin = r.beat.tau[static_cast<std::size_t>(lo - r.beat.ratio.begin())];
  const double tmax = r.beat.tau[static_cast<std::size_t>(hi - r.beat.ratio.begin())];
  EXPECT_LE(std::min(std::fmod(tmin, 10.0), 10.0 - std::fmod(tmin, 10.0)), 1.0) << tmin;
  EXPECT_NEAR(std::fmod(tmax, 10.0), 5.0, 1.0) << tmax;
  EXPECT_NEAR(angular_distance(r.phase.theta, kPi), 0.0, 0.05);
}

TEST(Beating, CalibratedBackgroundHitsTargetVisibility) {
  for (BeatMode mode : {BeatMode::Eq6, BeatMode::Eq12}) {
    RunConfig c = defaults();
    c.beating.mode = mode;
    const BeatingRun r = run_beating(c, true);
    EXPECT_GT(r.background, 0.0);
    EXPECT_NEAR(r.phase.visibility, c.detection.target_visibility, 1e-6);
  }
}

TEST(Polarization, DecoupledSourceGivesUnitNoiselessVisibility) {
  RunConfig c = defaults();
  c.polarization.background = 0.0;
  const PolarizationRun r = run_polarization(c, true);
  EXPECT_FALSE(r.coupled);
  ASSERT_EQ(r.curves.size(), 2u);
  for (const auto& curve : r.curves) {
    EXPECT_EQ(curve.p4_deg.size(), 18u);
    EXPECT_NEAR(curve.fit.visibility, 1.0, 1e-9) << curve.p3_deg;
  }
}

TEST(Polarization, CoupledSourceWashesOutDiagonalFringe) {
  RunConfig c = defaults();
  c.polarization.background = 0.0;
  c.polarization.delta = c.source.delta;
  const PolarizationRun r = run_polarization(c, true);
  EXPECT_TRUE(r.coupled);
  // H-basis correlation survives as a classical mixture; the D fringe does not.
  EXPECT_NEAR(r.curves[0].fit.visibility, 1.0, 1e-9);
  EXPECT_LT(r.curves[1].fit.visibility, 0.05);
}

TEST(Polarization, SampledVisibilitiesCenterOnTargets) {
  RunConfig c = defaults();
  const int seeds = 40;
  std::vector<double> mean(c.polarization.target_visibility.size(), 0.0);
  for (int s = 0; s < seeds; ++s) {
    c.seed = static_cast<std::uint64_t>(s);
    const PolarizationRun r = run_polarization(c);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += r.curves[k].fit.visibility / seeds;
  }
  for (std::size_t k = 0; k < mean.size(); ++k) {
    EXPECT_NEAR(mean[k], c.polarization.target_visibility[k], 0.03) << k;
  }
}

TEST(Tomography, SampledSingletReconstructsWithHighFidelity) {
  RunConfig c = defaults();
  c.tomography.source = TomoSource::Singlet;
  c.tomography.n0 = 1e6;
  const TomographyRun r = run_tomography(c, false);
  EXPECT_GT(r.fidelity, 0.999);
  EXPECT_TRUE(is_physical(r.mle.rho.mat()));
}

TEST(Tomography, MeasuredFixtureRecordsReproduceFidelityAndViolation) {
  RunConfig c = defaults();
  c.tomography.source = TomoSource::Measured;
  c.tomography.noiseless = true;
  const ChshRun r = run_chsh(c, false);
  EXPECT_NEAR(r.tomography.fidelity, 0.883, 0.01);
  EXPECT_NEAR(r.chsh.s_max, 2.2, 0.1);
  EXPECT_TRUE(r.chsh.violates());
}

TEST(Tomography, MaximallyMixedSourceDoesNotViolate) {
  RunConfig c = defaults();
  c.tomography.source = TomoSource::MaximallyMixed;
  c.tomography.noiseless = true;
  const ChshRun r = run_chsh(c, false);
  EXPECT_LT(r.chsh.s_max, 0.01);
  EXPECT_FALSE(r.chsh.violates());
  EXPECT_NEAR(r.tomography.fidelity, 0.5, 1e-3);
}

TEST(Tomography, RecordsCommandIngestsCsv) {
  const fs::path dir = scratch("records");
  {
    std::ofstream f(dir / "records.csv");
    write_records_csv(f, simulate_tomography(fixtures::measured_singlet_state(), canonical_settings(), 1e5, 3));
  }
  const CliResult r =
      run({"-o", (dir / "out").string(), "chsh", "--records", (dir / "records.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "chsh.json"));
  EXPECT_NEAR(j.at("s_max").get<double>(), 2.2, 0.1);

  {
    std::ofstream f(dir / "broken.csv");
    f << "setting3,setting4,counts,exposure_s\nH,V,oops,1\n";
  }
  EXPECT_NE(run({"-o", (dir / "out2").string(), "tomography", "--records",
                 (dir / "broken.csv").string()})
                .code,
            kExitOk);
}

}  // namespace
}  // namespace hyperbell::app
