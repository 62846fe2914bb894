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

// Jones calculus for the polarization optics and the two-photon states that
// leave the beam splitter. The beam splitter itself is not modeled; its
// output state in the cross-port (one photon per port) sector is written
// down directly.

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperbell/qalgebra.hpp"

namespace hyperbell {

/// 2x2 polarization transform in the (H, V) basis.
class JonesOperator {
 public:
  JonesOperator() : mat_(CMat::Identity(2, 2)) {}
  explicit JonesOperator(CMat mat);

  static JonesOperator identity() { return JonesOperator(); }

  const CMat& mat() const noexcept { return mat_; }
  bool unitary(double tol = 1e-10) const { return is_unitary(mat_, tol); }

  /// Same operator with its global phase fixed so the first element with
  /// modulus above 1e-12 is real and positive.
  JonesOperator canonical() const;

  JonesOperator operator*(const JonesOperator& rhs) const {
    return JonesOperator(mat_ * rhs.mat_);
  }
  CVec operator*(const CVec& ket) const { return mat_ * ket; }

 private:
  CMat mat_;
};

/// Half-wave plate with fast axis at `theta` from horizontal.
JonesOperator hwp(double theta);

/// Quarter-wave plate with fast axis at `theta` from horizontal.
JonesOperator qwp(double theta);

/// Normalized analyzer ket: the polarization a polarizer transmits.
class PolarizerState {
 public:
  /// Defaults to H.
  PolarizerState();
  /// Throws InvalidArgument unless `ket` is a normalized 2-vector.
  explicit PolarizerState(CVec ket);

  static PolarizerState H();
  static PolarizerState V();
  static PolarizerState D();
  static PolarizerState A();
  static PolarizerState R();
  static PolarizerState L();

  /// Linear polarizer at `angle` from horizontal: (cos a, sin a).
  static PolarizerState linear(double angle);
  /// (cos a, e^{i phi} sin a); covers every pure polarization.
  static PolarizerState elliptical(double angle, double phase);
  /// The state transmitted by `plates` followed by an H-transmitting PBS.
  static PolarizerState after_plates(const JonesOperator& plates);
  /// One of H, V, D, A, R, L.
  static PolarizerState from_name(std::string_view name);

  const CVec& ket() const noexcept { return ket_; }
  /// The analyzer selecting the orthogonal outcome.
  PolarizerState orthogonal() const;

 private:
  CVec ket_;
};

struct SourceParams {
  double delta = 0.0;  // rad/ns, frequency shift applied in path 1
  PolarizerState p1 = PolarizerState::H();
  PolarizerState p2 = PolarizerState::V();
};

/// Frequency shifts (port 3, port 4) carried by a branch; both sum to delta.
std::pair<double, double> branch_shifts(int branch, double delta);

/// Cross-port state after the beam splitter,
///   (|P1>_3 |P2>_4 |branch 0> - |P2>_3 |P1>_4 |branch 1>) / sqrt(2).
/// With delta == 0 the two frequency modes coincide and both terms are
/// stored on branch 0; the state is then renormalized, and InvalidArgument
/// is thrown when it vanishes (P1 parallel to P2).
TwoPhotonState build_hyperentangled(const SourceParams& params,
                                    TimeOrdering ordering = TimeOrdering::StokesAt3);

/// Applies `j3` to the port-3 polarization and `j4` to port 4.
TwoPhotonState apply_local(const TwoPhotonState& state, const JonesOperator& j3,
                           const JonesOperator& j4);

struct NamedState {
  std::string name;  // Psi1+, Psi1-, Psi2+, Psi2-, Phi1+, Phi1-, Phi2+, Phi2-
  TwoPhotonState state;
};

/// The eight polarization-frequency coupled states of one ordering sector.
std::vector<NamedState> catalog_states(TimeOrdering ordering);

/// Both sectors, Stokes-at-3 first (16 states).
std::vector<NamedState> catalog_states();

/// Looks up a catalog state by name; throws InvalidArgument if unknown.
TwoPhotonState catalog_state(std::string_view name,
                             TimeOrdering ordering = TimeOrdering::StokesAt3);

struct FrequencyProjection {
  CVec amplitudes = CVec::Zero(2);  // over frequency branches, unnormalized
  double success_prob = 0.0;
};

/// Projects both photons onto analyzer kets, leaving the frequency qubit.
FrequencyProjection project_analyzers(const TwoPhotonState& state, const PolarizerState& p3,
                                      const PolarizerState& p4);

}  // namespace hyperbell
