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

#include "hyperbell/fixtures.hpp"

namespace hyperbell::fixtures {

CMat measured_singlet_matrix() {
  CMat m(4, 4);
  // clang-format off
  m << cplx{0.02, 0.00},  cplx{0.04, 0.01},   cplx{0.00, 0.00},   cplx{0.01, 0.03},
       cplx{0.04, -0.01}, cplx{0.46, 0.00},   cplx{-0.33, 0.05},  cplx{0.02, 0.05},
       cplx{0.00, 0.00},  cplx{-0.33, -0.05}, cplx{0.44, 0.00},   cplx{0.00, -0.05},
       cplx{0.01, -0.03}, cplx{0.02, -0.05},  cplx{0.00, 0.05},   cplx{0.08, 0.00};
  // clang-format on
  return m;
}

PolDensityMatrix measured_singlet_state() { return PolDensityMatrix(measured_singlet_matrix()); }

}  // namespace hyperbell::fixtures
