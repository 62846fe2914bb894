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

// Small dense complex linear algebra shared by the rest of the library.
// Dimensions never exceed 8, so everything is a dynamic Eigen object.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace hyperbell {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};

/// Two-photon polarization basis order used everywhere: HH, HV, VH, VV.
enum class PolBasis : int { HH = 0, HV = 1, VH = 2, VV = 3 };

/// Kronecker product with `a` as the major index.
CVec tensor(const CVec& a, const CVec& b);
CMat tensor(const CMat& a, const CMat& b);

bool is_hermitian(const CMat& m, double tol = 1e-12);
bool is_unitary(const CMat& m, double tol = 1e-10);
bool is_normalized(const CVec& v, double tol = 1e-12);

struct EigenSystem {
  std::vector<double> values;  // descending
  CMat vectors;                // column i pairs with values[i]
};

/// Hermitian eigendecomposition with a deterministic gauge: eigenvalues in
/// descending order, each eigenvector phased so its first component with
/// modulus above 1e-12 is real and positive. Throws InvalidArgument for a
/// non-Hermitian input.
EigenSystem eigh(const CMat& m, double hermitian_tol = 1e-10);

/// 4x4 polarization density matrix in (HH, HV, VH, VV) order.
///
/// Construction validates Hermiticity (1e-10), unit trace (1e-10) and
/// positivity (eigenvalues >= -1e-9). Use `from_unchecked` only for values
/// that are physical by construction.
class PolDensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kEigenTol = -1e-9;

  explicit PolDensityMatrix(CMat mat);

  static PolDensityMatrix from_unchecked(CMat mat);
  static PolDensityMatrix pure(const CVec& ket);
  static PolDensityMatrix maximally_mixed();

  const CMat& mat() const noexcept { return mat_; }
  cplx operator()(int r, int c) const { return mat_(r, c); }

  double purity() const;

 private:
  struct Unchecked {};
  PolDensityMatrix(CMat mat, Unchecked) : mat_(std::move(mat)) {}

  CMat mat_;
};

/// Checks the PolDensityMatrix invariants without constructing one.
bool is_physical(const CMat& m);

/// Overlap fidelity with a pure target, sqrt(<psi|rho|psi>).
double fidelity_pure(const PolDensityMatrix& rho, const CVec& psi);

/// Trace distance 0.5 * ||a - b||_1.
double trace_distance(const CMat& a, const CMat& b);

/// Root fidelity tr sqrt(sqrt(a) b sqrt(a)); reduces to fidelity_pure when
/// either argument is a pure state.
double state_fidelity(const CMat& a, const CMat& b);

enum class TimeOrdering { StokesAt3, StokesAt4 };

/// Amplitudes over (port-3 polarization) x (port-4 polarization) x
/// (frequency branch). Branch 0: the port-3 photon carries the +delta shift;
/// branch 1: the port-4 photon does. Each value lives in exactly one
/// time-ordering sector.
class TwoPhotonState {
 public:
  static constexpr int kDim = 8;

  TwoPhotonState() : amps_(CVec::Zero(kDim)) {}
  TwoPhotonState(CVec amplitudes, TimeOrdering ordering);

  static constexpr int index(int pol3, int pol4, int branch) {
    return (pol3 * 2 + pol4) * 2 + branch;
  }

  const CVec& amplitudes() const noexcept { return amps_; }
  cplx amplitude(int pol3, int pol4, int branch) const {
    return amps_(index(pol3, pol4, branch));
  }
  TimeOrdering ordering() const noexcept { return ordering_; }
  double norm2() const { return amps_.squaredNorm(); }

 private:
  CVec amps_;
  TimeOrdering ordering_ = TimeOrdering::StokesAt3;
};

/// Traces out the frequency branch. The result keeps the squared norm of the
/// input as its trace, so it is a PolDensityMatrix only for normalized input.
CMat reduce_frequency(const TwoPhotonState& state);

/// Polarization state of a normalized two-photon state.
PolDensityMatrix partial_trace_frequency(const TwoPhotonState& state);

/// Singlet (|HV> - |VH>)/sqrt(2).
CVec singlet();

}  // namespace hyperbell
