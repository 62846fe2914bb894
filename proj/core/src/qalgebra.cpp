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

#include "hyperbell/qalgebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hyperbell/error.hpp"

namespace hyperbell {

CVec tensor(const CVec& a, const CVec& b) {
  CVec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

CMat tensor(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

bool is_hermitian(const CMat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const CMat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const CMat id = CMat::Identity(m.rows(), m.cols());
  return (m.adjoint() * m - id).cwiseAbs().maxCoeff() <= tol;
}

bool is_normalized(const CVec& v, double tol) {
  return std::abs(v.squaredNorm() - 1.0) <= tol;
}

EigenSystem eigh(const CMat& m, double hermitian_tol) {
  if (!is_hermitian(m, hermitian_tol)) {
    throw InvalidArgument("eigh: matrix is not Hermitian");
  }
  const CMat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigh: eigensolver failed");
  }
  const auto n = m.rows();
  EigenSystem out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = n - 1 - k;
    out.values[k] = solver.eigenvalues()(src);
    CVec v = solver.eigenvectors().col(src);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        v *= std::conj(v(i)) / std::abs(v(i));
        v(i) = std::abs(v(i));
        break;
      }
    }
    out.vectors.col(k) = v;
  }
  return out;
}

namespace {

CMat psd_sqrt(const CMat& m) {
  const auto es = eigh(m, 1e-8);
  CMat out = CMat::Zero(m.rows(), m.cols());
  for (std::size_t k = 0; k < es.values.size(); ++k) {
    const double s = std::sqrt(std::max(es.values[k], 0.0));
    out += s * es.vectors.col(k) * es.vectors.col(k).adjoint();
  }
  return out;
}

}  // namespace

bool is_physical(const CMat& m) {
  if (m.rows() != 4 || m.cols() != 4) return false;
  if (!is_hermitian(m, PolDensityMatrix::kHermitianTol)) return false;
  if (std::abs(m.trace() - cplx{1.0, 0.0}) > PolDensityMatrix::kTraceTol) return false;
  const auto es = eigh(m, PolDensityMatrix::kHermitianTol);
  return es.values.back() >= PolDensityMatrix::kEigenTol;
}

PolDensityMatrix::PolDensityMatrix(CMat mat) : mat_(std::move(mat)) {
  if (mat_.rows() != 4 || mat_.cols() != 4) {
    throw InvalidArgument("PolDensityMatrix: expected a 4x4 matrix");
  }
  if (!is_hermitian(mat_, kHermitianTol)) {
    throw InvalidArgument("PolDensityMatrix: matrix is not Hermitian");
  }
  if (std::abs(mat_.trace() - cplx{1.0, 0.0}) > kTraceTol) {
    throw InvalidArgument("PolDensityMatrix: trace differs from 1");
  }
  if (eigh(mat_, kHermitianTol).values.back() < kEigenTol) {
    throw InvalidArgument("PolDensityMatrix: matrix has a negative eigenvalue");
  }
}

PolDensityMatrix PolDensityMatrix::from_unchecked(CMat mat) {
  return PolDensityMatrix(std::move(mat), Unchecked{});
}

PolDensityMatrix PolDensityMatrix::pure(const CVec& ket) {
  if (ket.size() != 4 || !is_normalized(ket, 1e-10)) {
    throw InvalidArgument("PolDensityMatrix::pure: expected a normalized 4-vector");
  }
  return PolDensityMatrix(ket * ket.adjoint(), Unchecked{});
}

PolDensityMatrix PolDensityMatrix::maximally_mixed() {
  return PolDensityMatrix(CMat::Identity(4, 4) * 0.25, Unchecked{});
}

double PolDensityMatrix::purity() const { return (mat_ * mat_).trace().real(); }

double fidelity_pure(const PolDensityMatrix& rho, const CVec& psi) {
  if (psi.size() != 4 || !is_normalized(psi)) {
    throw InvalidArgument("fidelity_pure: target ket must be a normalized 4-vector");
  }
  const double overlap = psi.dot(rho.mat() * psi).real();
  return std::sqrt(std::clamp(overlap, 0.0, 1.0));
}

double trace_distance(const CMat& a, const CMat& b) {
  const auto es = eigh(a - b, 1e-8);
  double sum = 0.0;
  for (double v : es.values) sum += std::abs(v);
  return 0.5 * sum;
}

double state_fidelity(const CMat& a, const CMat& b) {
  const CMat sa = psd_sqrt(a);
  const CMat inner = sa * b * sa;
  const auto es = eigh(0.5 * (inner + inner.adjoint()), 1e-8);
  double sum = 0.0;
  for (double v : es.values) sum += std::sqrt(std::max(v, 0.0));
  return std::min(sum, 1.0);
}

TwoPhotonState::TwoPhotonState(CVec amplitudes, TimeOrdering ordering)
    : amps_(std::move(amplitudes)), ordering_(ordering) {
  if (amps_.size() != kDim) {
    throw InvalidArgument("TwoPhotonState: expected 8 amplitudes");
  }
  if (!amps_.allFinite()) {
    throw InvalidArgument("TwoPhotonState: non-finite amplitude");
  }
}

CMat reduce_frequency(const TwoPhotonState& state) {
  CMat rho = CMat::Zero(4, 4);
  for (int branch = 0; branch < 2; ++branch) {
    CVec pol(4);
    for (int p = 0; p < 4; ++p) {
      pol(p) = state.amplitude(p / 2, p % 2, branch);
    }
    rho += pol * pol.adjoint();
  }
  return rho;
}

PolDensityMatrix partial_trace_frequency(const TwoPhotonState& state) {
  if (std::abs(state.norm2() - 1.0) > 1e-10) {
    throw InvalidArgument("partial_trace_frequency: state is not normalized");
  }
  return PolDensityMatrix::from_unchecked(reduce_frequency(state));
}

CVec singlet() {
  CVec psi = CVec::Zero(4);
  psi(static_cast<int>(PolBasis::HV)) = 1.0 / std::sqrt(2.0);
  psi(static_cast<int>(PolBasis::VH)) = -1.0 / std::sqrt(2.0);
  return psi;
}

}  // namespace hyperbell
