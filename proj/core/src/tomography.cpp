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

#include "hyperbell/tomography.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hyperbell/detection.hpp"
#include "hyperbell/error.hpp"
#include "hyperbell/rng.hpp"

namespace hyperbell {

namespace {

constexpr std::array<const char*, 4> kCanonicalNames{"H", "V", "D", "R"};
constexpr std::array<const char*, 4> kBasisNames{"HH", "HV", "VH", "VV"};

// (row, col) of the off-diagonal lower-triangular entries, in parameter order.
constexpr std::array<std::pair<int, int>, 6> kOffDiagonal{
    {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}}};

using Params = Eigen::Matrix<double, 16, 1>;

CMat lower_from(const Params& x) {
  CMat t = CMat::Zero(4, 4);
  for (int k = 0; k < 4; ++k) t(k, k) = x(k);
  for (int k = 0; k < 6; ++k) {
    const auto [r, c] = kOffDiagonal[k];
    t(r, c) = cplx{x(4 + 2 * k), x(5 + 2 * k)};
  }
  return t;
}

// Count-normalized negative log-likelihood with the overall count scale
// factored out: f = -sum_i w_i log nu_i + sum_i e_i nu_i, nu_i = |T phi_i|^2.
class LikelihoodObjective {
 public:
  explicit LikelihoodObjective(std::span<const TomoRecord> records) {
    for (const auto& r : records) {
      phis_.push_back(tensor(r.setting.analyzer3.ket(), r.setting.analyzer4.ket()));
      counts_.push_back(r.counts);
      exposures_.push_back(r.exposure);
      total_ += r.counts;
    }
  }

  double total_counts() const { return total_; }
  double total_exposure() const {
    double s = 0.0;
    for (double e : exposures_) s += e;
    return s;
  }

  // Returns +inf where a setting with counts has zero predicted rate.
  double value(const Params& x, Params* grad) const {
    const CMat t = lower_from(x);
    CMat g = CMat::Zero(4, 4);
    double f = 0.0;
    for (std::size_t i = 0; i < phis_.size(); ++i) {
      const CVec u = t * phis_[i];
      const double nu = u.squaredNorm();
      const double w = counts_[i] / total_;
      if (w > 0.0) {
        if (!(nu > 0.0)) return std::numeric_limits<double>::infinity();
        f -= w * std::log(nu);
      }
      f += exposures_[i] * nu;
      if (grad != nullptr) {
        const double dnu = (w > 0.0 ? -w / nu : 0.0) + exposures_[i];
        g += (2.0 * dnu) * u * phis_[i].adjoint();
      }
    }
    if (grad != nullptr) {
      for (int k = 0; k < 4; ++k) (*grad)(k) = g(k, k).real();
      for (int k = 0; k < 6; ++k) {
        const auto [r, c] = kOffDiagonal[k];
        (*grad)(4 + 2 * k) = g(r, c).real();
        (*grad)(5 + 2 * k) = g(r, c).imag();
      }
    }
    return f;
  }

  // Poisson log-likelihood in counts for the unnormalized matrix total * T^dag T.
  double log_likelihood(const Params& x) const {
    const CMat t = lower_from(x);
    double ll = 0.0;
    for (std::size_t i = 0; i < phis_.size(); ++i) {
      const double mu = total_ * exposures_[i] * (t * phis_[i]).squaredNorm();
      if (counts_[i] > 0.0) ll += counts_[i] * std::log(mu);
      ll -= mu;
    }
    return ll;
  }

 private:
  std::vector<CVec> phis_;
  std::vector<double> counts_;
  std::vector<double> exposures_;
  double total_ = 0.0;
};

// Rank of the settings in the 16-dimensional real space of Hermitian 4x4
// matrices.
int design_rank(std::span<const TomoRecord> records) {
  Eigen::MatrixXd design(static_cast<Eigen::Index>(records.size()), 16);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const CMat p = records[i].setting.projector();
    int col = 0;
    for (int r = 0; r < 4; ++r) {
      design(static_cast<Eigen::Index>(i), col++) = p(r, r).real();
      for (int c = r + 1; c < 4; ++c) {
        design(static_cast<Eigen::Index>(i), col++) = p(r, c).real();
        design(static_cast<Eigen::Index>(i), col++) = p(r, c).imag();
      }
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > 1e-9 * sv(0)) ++rank;
  }
  return rank;
}

PolDensityMatrix normalized_density(const CMat& m) {
  CMat rho = 0.5 * (m + m.adjoint());
  rho /= rho.trace().real();
  return PolDensityMatrix(std::move(rho));
}

std::array<CMat, 3> pauli() {
  CMat x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, -kI, kI, 0;
  z << 1, 0, 0, -1;
  return {x, y, z};
}

}  // namespace

TomoSetting TomoSetting::from_names(std::string_view name3, std::string_view name4) {
  return TomoSetting{std::string(name3), std::string(name4), PolarizerState::from_name(name3),
                     PolarizerState::from_name(name4)};
}

CMat TomoSetting::projector() const {
  const CVec phi = tensor(analyzer3.ket(), analyzer4.ket());
  return phi * phi.adjoint();
}

std::vector<TomoSetting> canonical_settings() {
  std::vector<TomoSetting> out;
  out.reserve(16);
  for (const char* a : kCanonicalNames) {
    for (const char* b : kCanonicalNames) out.push_back(TomoSetting::from_names(a, b));
  }
  return out;
}

double born_probability(const PolDensityMatrix& rho, const TomoSetting& setting) {
  const CVec phi = tensor(setting.analyzer3.ket(), setting.analyzer4.ket());
  return std::clamp(phi.dot(rho.mat() * phi).real(), 0.0, 1.0);
}

std::vector<TomoRecord> expected_tomography(const PolDensityMatrix& rho,
                                            std::span<const TomoSetting> settings, double n0,
                                            double exposure) {
  if (!(n0 > 0.0) || !(exposure > 0.0)) {
    throw InvalidArgument("expected_tomography: n0 and exposure must be positive");
  }
  std::vector<TomoRecord> out;
  out.reserve(settings.size());
  for (const auto& s : settings) {
    out.push_back({s, n0 * exposure * born_probability(rho, s), exposure});
  }
  return out;
}

std::vector<TomoRecord> simulate_tomography(const PolDensityMatrix& rho,
                                            std::span<const TomoSetting> settings, double n0,
                                            std::uint64_t seed, double exposure) {
  auto out = expected_tomography(rho, settings, n0, exposure);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto engine = substream(seed, RngStream::Tomography, i);
    out[i].counts = static_cast<double>(poisson_draw(engine, out[i].counts));
  }
  return out;
}

CMat CholeskyParams::lower() const {
  return lower_from(Eigen::Map<const Params>(values.data()));
}

CMat CholeskyParams::unnormalized() const {
  const CMat t = lower();
  return t.adjoint() * t;
}

PolDensityMatrix CholeskyParams::density() const {
  const CMat m = unnormalized();
  const double tr = m.trace().real();
  if (!(tr > 0.0)) throw InvalidArgument("CholeskyParams: all parameters are zero");
  return normalized_density(m);
}

MleResult mle_reconstruct(std::span<const TomoRecord> records, const MleOptions& options) {
  if (records.size() < 16) {
    throw InvalidArgument("mle_reconstruct: need at least 16 settings, got " +
                          std::to_string(records.size()));
  }
  double total = 0.0;
  for (const auto& r : records) {
    if (!(r.counts >= 0.0) || !std::isfinite(r.counts)) {
      throw InvalidArgument("mle_reconstruct: counts must be finite and non-negative");
    }
    if (!(r.exposure > 0.0)) throw InvalidArgument("mle_reconstruct: exposure must be positive");
    total += r.counts;
  }
  if (!(total > 0.0)) throw InvalidArgument("mle_reconstruct: total counts are zero");
  if (const int rank = design_rank(records); rank < 16) {
    throw InvalidArgument("mle_reconstruct: settings are not informationally complete (rank " +
                          std::to_string(rank) + " < 16)");
  }

  const LikelihoodObjective objective(records);
  Params x = Params::Zero();
  const double t0 = std::sqrt(1.0 / objective.total_exposure());
  x.head<4>().setConstant(t0);

  MleResult result;
  Params g;
  double f = objective.value(x, &g);
  result.evaluations = 1;

  Eigen::Matrix<double, 16, 16> h = Eigen::Matrix<double, 16, 16>::Identity();
  bool scaled = false;
  std::vector<double> fs{f};
  result.history.push_back(objective.log_likelihood(x));

  while (true) {
    if (result.evaluations >= options.max_evaluations) break;
    if (g.lpNorm<Eigen::Infinity>() < 1e-14) {
      result.converged = true;
      break;
    }
    Params d = -h * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h.setIdentity();
      d = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    Params x_new, g_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < 60 && result.evaluations < options.max_evaluations; ++k) {
      x_new = x + step * d;
      f_new = objective.value(x_new, &g_new);
      ++result.evaluations;
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!h.isIdentity()) {
        h.setIdentity();
        continue;
      }
      // No descent left at working precision.
      result.converged = result.evaluations < options.max_evaluations;
      break;
    }
    const Params s = x_new - x;
    const Params y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (!scaled) {
        h *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::Matrix<double, 16, 16> left =
          Eigen::Matrix<double, 16, 16>::Identity() - rho * s * y.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
    }
    x = x_new;
    g = g_new;
    f = f_new;
    ++result.iterations;
    fs.push_back(f);
    result.history.push_back(objective.log_likelihood(x));
    const auto n = fs.size();
    if (n > static_cast<std::size_t>(options.stall_iterations) &&
        fs[n - 1 - options.stall_iterations] - f < options.stall_tolerance) {
      result.converged = true;
      break;
    }
  }

  const CMat t = lower_from(x);
  const CMat m = t.adjoint() * t;
  result.n0 = total * m.trace().real();
  result.rho = normalized_density(m);
  result.log_likelihood = objective.log_likelihood(x);
  return result;
}

double correlation(const PolDensityMatrix& rho, const AnalyzerAngles& a,
                   const AnalyzerAngles& b) {
  const PolarizerState a_plus = a.plus();
  const PolarizerState b_plus = b.plus();
  const std::array<PolarizerState, 2> as{a_plus, a_plus.orthogonal()};
  const std::array<PolarizerState, 2> bs{b_plus, b_plus.orthogonal()};
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const CVec phi = tensor(as[i].ket(), bs[j].ket());
      const double p = std::max(phi.dot(rho.mat() * phi).real(), 0.0);
      num += (i == j ? p : -p);
      den += p;
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

double chsh_value(const PolDensityMatrix& rho, const AnalyzerAngles& a,
                  const AnalyzerAngles& a_prime, const AnalyzerAngles& b,
                  const AnalyzerAngles& b_prime) {
  return correlation(rho, a, b) - correlation(rho, a, b_prime) + correlation(rho, a_prime, b) +
         correlation(rho, a_prime, b_prime);
}

Eigen::Matrix3d pauli_correlation(const PolDensityMatrix& rho) {
  const auto s = pauli();
  Eigen::Matrix3d t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t(i, j) = (rho.mat() * tensor(s[i], s[j])).trace().real();
  }
  return t;
}

double horodecki_bound(const PolDensityMatrix& rho) {
  const Eigen::Matrix3d t = pauli_correlation(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(t.transpose() * t);
  const auto& m = solver.eigenvalues();  // ascending
  return 2.0 * std::sqrt(std::max(m(1) + m(2), 0.0));
}

namespace {

// Same coincidence-ratio correlation as correlation(), on fixed-size types;
// the simplex search spends nearly all its time here.
struct SearchContext {
  Eigen::Matrix4cd rho;
};

using Ket2 = Eigen::Vector2cd;

std::array<Ket2, 2> analyzer_pair(double angle, double phase) {
  const cplx e = std::polar(1.0, phase);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {Ket2(c, e * s), Ket2(-std::conj(e) * s, c)};
}

double fast_correlation(const Eigen::Matrix4cd& rho, const std::array<Ket2, 2>& a,
                        const std::array<Ket2, 2>& b) {
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector4cd phi;
      phi << a[i](0) * b[j](0), a[i](0) * b[j](1), a[i](1) * b[j](0), a[i](1) * b[j](1);
      const double p = std::max(phi.dot(rho * phi).real(), 0.0);
      num += (i == j ? p : -p);
      den += p;
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

std::array<AnalyzerAngles, 4> unpack(const gsl_vector* v) {
  std::array<AnalyzerAngles, 4> out;
  for (int k = 0; k < 4; ++k) {
    out[k] = {gsl_vector_get(v, 2 * k), gsl_vector_get(v, 2 * k + 1)};
  }
  return out;
}

double negative_chsh(const gsl_vector* v, void* params) {
  const auto* ctx = static_cast<const SearchContext*>(params);
  std::array<std::array<Ket2, 2>, 4> k;
  for (std::size_t i = 0; i < 4; ++i) {
    k[i] = analyzer_pair(gsl_vector_get(v, 2 * i), gsl_vector_get(v, 2 * i + 1));
  }
  const auto& r = ctx->rho;
  return -(fast_correlation(r, k[0], k[2]) - fast_correlation(r, k[0], k[3]) +
           fast_correlation(r, k[1], k[2]) + fast_correlation(r, k[1], k[3]));
}

}  // namespace

ChshResult chsh_optimize(const PolDensityMatrix& rho) {
  ChshResult out;
  out.s_max = horodecki_bound(rho);

  constexpr int kStarts = 12;
  constexpr std::size_t kDim = 8;
  SearchContext ctx{rho.mat()};
  gsl_multimin_function fn{&negative_chsh, kDim, &ctx};
  gsl_vector* x = gsl_vector_alloc(kDim);
  gsl_vector* step = gsl_vector_alloc(kDim);
  gsl_multimin_fminimizer* solver =
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, kDim);
  out.s_search = -std::numeric_limits<double>::infinity();

  for (int start = 0; start < kStarts; ++start) {
    auto engine = substream(0, RngStream::Search, static_cast<std::uint64_t>(start));
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    for (std::size_t k = 0; k < 4; ++k) {
      gsl_vector_set(x, 2 * k, angle(engine));
      gsl_vector_set(x, 2 * k + 1, start == 0 ? 0.0 : phase(engine));
    }
    // Restarting the simplex at the previous optimum escapes early collapse.
    for (int restart = 0; restart < 3; ++restart) {
      gsl_vector_set_all(step, restart == 0 ? 0.4 : 0.05);
      gsl_multimin_fminimizer_set(solver, &fn, x, step);
      // Flat directions (phase at a pole) keep the simplex from shrinking,
      // so a stall in the best value also ends the run.
      double best = gsl_multimin_fminimizer_minimum(solver);
      int stalled = 0;
      for (int iter = 0; iter < 20000 && stalled < 400; ++iter) {
        if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-8) == GSL_SUCCESS) {
          break;
        }
        const double value = gsl_multimin_fminimizer_minimum(solver);
        stalled = value < best - 1e-14 ? 0 : stalled + 1;
        best = std::min(best, value);
      }
      gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(solver));
    }
    const double s = -gsl_multimin_fminimizer_minimum(solver);
    if (s > out.s_search) {
      out.s_search = s;
      out.angles = unpack(gsl_multimin_fminimizer_x(solver));
    }
  }
  gsl_multimin_fminimizer_free(solver);
  gsl_vector_free(step);
  gsl_vector_free(x);
  // Report the optimum through the public correlation path.
  const auto& a = out.angles;
  out.s_search = chsh_value(rho, a[0], a[1], a[2], a[3]);
  return out;
}

BootstrapResult tomo_error_bars(std::span<const TomoRecord> records, int n_resamples,
                                std::uint64_t seed, const MleOptions& options) {
  if (n_resamples < 2) throw InvalidArgument("tomo_error_bars: need at least 2 resamples");
  std::vector<CMat> rhos(static_cast<std::size_t>(n_resamples));
  std::vector<double> s_values(static_cast<std::size_t>(n_resamples));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_resamples));

  auto run = [&](std::size_t k) {
    try {
      auto engine = substream(seed, RngStream::Bootstrap, k);
      std::vector<TomoRecord> resampled(records.begin(), records.end());
      for (auto& r : resampled) r.counts = static_cast<double>(poisson_draw(engine, r.counts));
      const auto fit = mle_reconstruct(resampled, options);
      rhos[k] = fit.rho.mat();
      s_values[k] = horodecki_bound(fit.rho);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  const std::size_t n = rhos.size();
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::min<std::size_t>(n, 16));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < n; k += workers) run(k);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  BootstrapResult out;
  out.resamples = n_resamples;
  CMat mean = CMat::Zero(4, 4);
  for (const auto& r : rhos) mean += r;
  mean /= static_cast<double>(n);
  for (const auto& r : rhos) {
    const CMat d = r - mean;
    out.re_std += d.real().cwiseAbs2();
    out.im_std += d.imag().cwiseAbs2();
  }
  out.re_std = (out.re_std / static_cast<double>(n - 1)).cwiseSqrt();
  out.im_std = (out.im_std / static_cast<double>(n - 1)).cwiseSqrt();
  for (double s : s_values) out.s_mean += s;
  out.s_mean /= static_cast<double>(n);
  double var = 0.0;
  for (double s : s_values) var += (s - out.s_mean) * (s - out.s_mean);
  out.s_std = std::sqrt(var / static_cast<double>(n - 1));
  return out;
}

void write_records_csv(std::ostream& out, std::span<const TomoRecord> records) {
  out << "setting3,setting4,counts,exposure_s\n";
  for (const auto& r : records) {
    // Round-trips through from_name, so only the six named analyzers pass.
    PolarizerState::from_name(r.setting.label3);
    PolarizerState::from_name(r.setting.label4);
    out << r.setting.label3 << ',' << r.setting.label4 << ',' << format_double(r.counts) << ','
        << format_double(r.exposure) << '\n';
  }
  if (!out) throw IoError("write_records_csv: stream write failed");
}

std::vector<TomoRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("tomography CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "setting3,setting4,counts,exposure_s") {
    throw IoError("tomography CSV: unexpected header '" + line + "'");
  }
  std::vector<TomoRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      cols.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    const std::string where = "tomography CSV line " + std::to_string(line_no) + ": ";
    if (cols.size() != 4) throw IoError(where + "expected 4 columns");
    try {
      TomoRecord r{TomoSetting::from_names(cols[0], cols[1]), parse_double(cols[2]),
                   parse_double(cols[3])};
      if (!(r.counts >= 0.0) || r.counts != std::floor(r.counts)) {
        throw IoError("counts must be a non-negative integer");
      }
      if (!(r.exposure > 0.0)) throw IoError("exposure must be positive");
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError(where + e.what());
    }
  }
  return out;
}

nlohmann::json density_to_json(const CMat& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw InvalidArgument("density_to_json: need 4x4");
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 4; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < 4; ++c) row.push_back({rho(r, c).real(), rho(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"basis", kBasisNames}, {"rho", std::move(rows)}};
}

CMat density_from_json(const nlohmann::json& j) {
  try {
    const auto& rows = j.at("rho");
    if (rows.size() != 4) throw IoError("density JSON: expected 4 rows");
    CMat out(4, 4);
    for (int r = 0; r < 4; ++r) {
      if (rows[r].size() != 4) throw IoError("density JSON: expected 4 columns");
      for (int c = 0; c < 4; ++c) {
        const auto& z = rows[r][c];
        if (z.size() != 2) throw IoError("density JSON: entries must be [re, im] pairs");
        out(r, c) = cplx{z[0].get<double>(), z[1].get<double>()};
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("density JSON: ") + e.what());
  }
}

}  // namespace hyperbell
