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

#include "hyperbell/optics.hpp"

#include <cmath>
#include <numbers>

#include "hyperbell/error.hpp"

namespace hyperbell {

namespace {

constexpr int kH = 0;
constexpr int kV = 1;

CVec ket2(cplx h, cplx v) {
  CVec k(2);
  k << h, v;
  return k;
}

}  // namespace

JonesOperator::JonesOperator(CMat mat) : mat_(std::move(mat)) {
  if (mat_.rows() != 2 || mat_.cols() != 2) {
    throw InvalidArgument("JonesOperator: expected a 2x2 matrix");
  }
}

JonesOperator JonesOperator::canonical() const {
  CMat m = mat_;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const cplx z = m.data()[i];
    if (std::abs(z) > 1e-12) {
      m *= std::conj(z) / std::abs(z);
      break;
    }
  }
  return JonesOperator(std::move(m));
}

JonesOperator hwp(double theta) {
  const double c = std::cos(2.0 * theta);
  const double s = std::sin(2.0 * theta);
  CMat m(2, 2);
  m << c, s, s, -c;
  return JonesOperator(std::move(m));
}

JonesOperator qwp(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const cplx off = cplx{1.0, -1.0} * s * c;
  CMat m(2, 2);
  m << c * c + kI * s * s, off, off, s * s + kI * c * c;
  return JonesOperator(std::exp(-kI * (std::numbers::pi / 4.0)) * m);
}

PolarizerState::PolarizerState() : ket_(ket2(1.0, 0.0)) {}

PolarizerState::PolarizerState(CVec ket) : ket_(std::move(ket)) {
  if (ket_.size() != 2 || !is_normalized(ket_, 1e-10)) {
    throw InvalidArgument("PolarizerState: analyzer ket must be a normalized 2-vector");
  }
}

PolarizerState PolarizerState::H() { return PolarizerState(ket2(1.0, 0.0)); }
PolarizerState PolarizerState::V() { return PolarizerState(ket2(0.0, 1.0)); }
PolarizerState PolarizerState::D() {
  return PolarizerState(ket2(1.0, 1.0) / std::numbers::sqrt2);
}
PolarizerState PolarizerState::A() {
  return PolarizerState(ket2(1.0, -1.0) / std::numbers::sqrt2);
}
PolarizerState PolarizerState::R() {
  return PolarizerState(ket2(1.0, kI) / std::numbers::sqrt2);
}
PolarizerState PolarizerState::L() {
  return PolarizerState(ket2(1.0, -kI) / std::numbers::sqrt2);
}

PolarizerState PolarizerState::linear(double angle) {
  return PolarizerState(ket2(std::cos(angle), std::sin(angle)));
}

PolarizerState PolarizerState::elliptical(double angle, double phase) {
  return PolarizerState(ket2(std::cos(angle), std::exp(kI * phase) * std::sin(angle)));
}

PolarizerState PolarizerState::after_plates(const JonesOperator& plates) {
  if (!plates.unitary()) {
    throw InvalidArgument("PolarizerState::after_plates: wave plates must be unitary");
  }
  // <H| J |psi> = <J^dagger H | psi>
  CVec k = plates.mat().adjoint() * ket2(1.0, 0.0);
  return PolarizerState(k / k.norm());
}

PolarizerState PolarizerState::from_name(std::string_view name) {
  if (name == "H") return H();
  if (name == "V") return V();
  if (name == "D") return D();
  if (name == "A") return A();
  if (name == "R") return R();
  if (name == "L") return L();
  throw InvalidArgument("unknown analyzer setting '" + std::string(name) +
                        "' (expected one of H, V, D, A, R, L)");
}

PolarizerState PolarizerState::orthogonal() const {
  return PolarizerState(ket2(-std::conj(ket_(1)), std::conj(ket_(0))));
}

std::pair<double, double> branch_shifts(int branch, double delta) {
  return branch == 0 ? std::pair{delta, 0.0} : std::pair{0.0, delta};
}

TwoPhotonState build_hyperentangled(const SourceParams& params, TimeOrdering ordering) {
  if (!(params.delta >= 0.0) || !std::isfinite(params.delta)) {
    throw InvalidArgument("build_hyperentangled: delta must be finite and >= 0");
  }
  const CVec& p1 = params.p1.ket();
  const CVec& p2 = params.p2.ket();
  // Degenerate frequency modes collapse onto a single branch.
  const int second_branch = params.delta > 0.0 ? 1 : 0;

  CVec amps = CVec::Zero(TwoPhotonState::kDim);
  const double w = 1.0 / std::numbers::sqrt2;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      amps(TwoPhotonState::index(a, b, 0)) += w * p1(a) * p2(b);
      amps(TwoPhotonState::index(a, b, second_branch)) -= w * p2(a) * p1(b);
    }
  }
  const double n2 = amps.squaredNorm();
  if (n2 < 1e-12) {
    throw InvalidArgument(
        "build_hyperentangled: P1 parallel to P2 with delta = 0 gives a vanishing "
        "cross-port amplitude");
  }
  if (std::abs(n2 - 1.0) > 1e-14) amps /= std::sqrt(n2);
  return TwoPhotonState(std::move(amps), ordering);
}

TwoPhotonState apply_local(const TwoPhotonState& state, const JonesOperator& j3,
                           const JonesOperator& j4) {
  if (!j3.unitary() || !j4.unitary()) {
    throw InvalidArgument("apply_local: Jones operators must be unitary");
  }
  CVec out = CVec::Zero(TwoPhotonState::kDim);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int br = 0; br < 2; ++br) {
        const cplx amp = state.amplitude(a, b, br);
        if (amp == cplx{}) continue;
        for (int a2 = 0; a2 < 2; ++a2) {
          for (int b2 = 0; b2 < 2; ++b2) {
            out(TwoPhotonState::index(a2, b2, br)) += j3.mat()(a2, a) * j4.mat()(b2, b) * amp;
          }
        }
      }
    }
  }
  return TwoPhotonState(std::move(out), state.ordering());
}

namespace {

TwoPhotonState pair_state(int pol3_first, int pol4_first, int pol3_second, int pol4_second,
                          double sign, TimeOrdering ordering) {
  CVec amps = CVec::Zero(TwoPhotonState::kDim);
  const double w = 1.0 / std::numbers::sqrt2;
  amps(TwoPhotonState::index(pol3_first, pol4_first, 0)) = w;
  amps(TwoPhotonState::index(pol3_second, pol4_second, 1)) = sign * w;
  return TwoPhotonState(std::move(amps), ordering);
}

}  // namespace

std::vector<NamedState> catalog_states(TimeOrdering ordering) {
  std::vector<NamedState> out;
  out.reserve(8);
  for (double sign : {1.0, -1.0}) {
    const char* s = sign > 0 ? "+" : "-";
    out.push_back({std::string("Psi1") + s, pair_state(kH, kV, kV, kH, sign, ordering)});
  }
  for (double sign : {1.0, -1.0}) {
    const char* s = sign > 0 ? "+" : "-";
    out.push_back({std::string("Psi2") + s, pair_state(kV, kH, kH, kV, sign, ordering)});
  }
  for (double sign : {1.0, -1.0}) {
    const char* s = sign > 0 ? "+" : "-";
    out.push_back({std::string("Phi1") + s, pair_state(kH, kH, kV, kV, sign, ordering)});
  }
  for (double sign : {1.0, -1.0}) {
    const char* s = sign > 0 ? "+" : "-";
    out.push_back({std::string("Phi2") + s, pair_state(kV, kV, kH, kH, sign, ordering)});
  }
  return out;
}

std::vector<NamedState> catalog_states() {
  auto out = catalog_states(TimeOrdering::StokesAt3);
  auto second = catalog_states(TimeOrdering::StokesAt4);
  out.insert(out.end(), second.begin(), second.end());
  return out;
}

TwoPhotonState catalog_state(std::string_view name, TimeOrdering ordering) {
  for (auto& entry : catalog_states(ordering)) {
    if (entry.name == name) return entry.state;
  }
  throw InvalidArgument("unknown catalog state '" + std::string(name) + "'");
}

FrequencyProjection project_analyzers(const TwoPhotonState& state, const PolarizerState& p3,
                                      const PolarizerState& p4) {
  FrequencyProjection out;
  for (int br = 0; br < 2; ++br) {
    cplx sum{};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        sum += std::conj(p3.ket()(a)) * std::conj(p4.ket()(b)) * state.amplitude(a, b, br);
      }
    }
    out.amplitudes(br) = sum;
  }
  out.success_prob = out.amplitudes.squaredNorm();
  return out;
}

}  // namespace hyperbell
