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

// Polarization state tomography from projective coincidence counts and the
// CHSH analysis of the reconstructed state.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hyperbell/optics.hpp"
#include "hyperbell/qalgebra.hpp"

namespace hyperbell {

/// A product analyzer setting. Labels name the analyzers for file I/O and
/// must be one of H, V, D, A, R, L when the setting is serialized.
struct TomoSetting {
  std::string label3;
  std::string label4;
  PolarizerState analyzer3;
  PolarizerState analyzer4;

  static TomoSetting from_names(std::string_view name3, std::string_view name4);
  /// Projector |a3 a4><a3 a4| in (HH, HV, VH, VV) order.
  CMat projector() const;
};

struct TomoRecord {
  TomoSetting setting;
  double counts = 0.0;  // integer-valued for measured data
  double exposure = 1.0;  // s
};

/// {H, V, D, R} x {H, V, D, R}, port-3 label major.
std::vector<TomoSetting> canonical_settings();

double born_probability(const PolDensityMatrix& rho, const TomoSetting& setting);

/// Noiseless records with counts n0 * p_i.
std::vector<TomoRecord> expected_tomography(const PolDensityMatrix& rho,
                                            std::span<const TomoSetting> settings, double n0,
                                            double exposure = 1.0);

/// Poisson(n0 * p_i) counts per setting, drawn from per-setting substreams.
std::vector<TomoRecord> simulate_tomography(const PolDensityMatrix& rho,
                                            std::span<const TomoSetting> settings, double n0,
                                            std::uint64_t seed, double exposure = 1.0);

/// Lower-triangular T with real diagonal; rho = T^dagger T / tr(T^dagger T).
/// Layout: 4 diagonal entries, then (re, im) of T(1,0), T(2,0), T(2,1),
/// T(3,0), T(3,1), T(3,2).
struct CholeskyParams {
  std::array<double, 16> values{};

  CMat lower() const;
  CMat unnormalized() const;  // T^dagger T
  PolDensityMatrix density() const;
};

struct MleOptions {
  int max_evaluations = 100000;
  int stall_iterations = 50;
  double stall_tolerance = 1e-9;  // on the count-normalized log-likelihood
};

struct MleResult {
  PolDensityMatrix rho = PolDensityMatrix::maximally_mixed();
  double n0 = 0.0;  // fitted counts per unit exposure for a complete basis
  double log_likelihood = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> history;  // log-likelihood after each accepted step
};

/// Maximizes sum_i c_i log mu_i - mu_i with mu_i = exposure_i tr(M Pi_i) over
/// M = T^dagger T, T as in CholeskyParams. The fitted n0 is tr(M), so the
/// overall flux is the 17th fitted degree of freedom. Starts from the
/// maximally mixed state. Throws InvalidArgument for an incomplete setting
/// set or zero total counts; a run that hits the evaluation cap returns its
/// best iterate with converged = false.
MleResult mle_reconstruct(std::span<const TomoRecord> records, const MleOptions& options = {});

/// Analyzer (cos angle, e^{i phase} sin angle); phase 0 is a linear polarizer.
struct AnalyzerAngles {
  double angle = 0.0;
  double phase = 0.0;

  PolarizerState plus() const { return PolarizerState::elliptical(angle, phase); }
};

/// Coincidence-ratio correlation (p++ + p-- - p+- - p-+) / (sum).
double correlation(const PolDensityMatrix& rho, const AnalyzerAngles& a, const AnalyzerAngles& b);

/// S = E(a,b) - E(a,b') + E(a',b) + E(a',b').
double chsh_value(const PolDensityMatrix& rho, const AnalyzerAngles& a,
                  const AnalyzerAngles& a_prime, const AnalyzerAngles& b,
                  const AnalyzerAngles& b_prime);

/// T_ij = tr(rho sigma_i x sigma_j), i, j over (x, y, z); z is H/V, x is D/A.
Eigen::Matrix3d pauli_correlation(const PolDensityMatrix& rho);

/// 2 sqrt(m1 + m2) from the two largest eigenvalues of T^T T.
double horodecki_bound(const PolDensityMatrix& rho);

struct ChshResult {
  double s_max = 0.0;     // Horodecki value
  double s_search = 0.0;  // best value found by direct angle search
  std::array<AnalyzerAngles, 4> angles{};  // a, a', b, b' reaching s_search
  bool violates() const { return s_max > 2.0; }
};

/// Optimal CHSH value by the Horodecki criterion, cross-checked by a
/// deterministic multi-start simplex search over the four analyzers.
ChshResult chsh_optimize(const PolDensityMatrix& rho);

struct BootstrapResult {
  Eigen::Matrix4d re_std = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d im_std = Eigen::Matrix4d::Zero();
  double s_mean = 0.0;
  double s_std = 0.0;
  int resamples = 0;
};

/// Parametric bootstrap: redraw each count as Poisson(observed), reconstruct,
/// and report element-wise and CHSH spreads. Resamples run in parallel with
/// per-resample substreams; the result does not depend on thread count.
BootstrapResult tomo_error_bars(std::span<const TomoRecord> records, int n_resamples,
                                std::uint64_t seed, const MleOptions& options = {});

/// CSV `setting3,setting4,counts,exposure_s`.
void write_records_csv(std::ostream& out, std::span<const TomoRecord> records);
std::vector<TomoRecord> read_records_csv(std::istream& in);

/// {"basis": [...], "rho": 4x4 of [re, im]} row-major.
nlohmann::json density_to_json(const CMat& rho);
CMat density_from_json(const nlohmann::json& j);

}  // namespace hyperbell
