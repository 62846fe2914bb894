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

#include <numbers>

#include "hyperbell/qalgebra.hpp"

namespace hyperbell::fixtures {

/// Experimentally reconstructed polarization state of a nominal singlet
/// source (two-decimal precision), used as a regression fixture.
CMat measured_singlet_matrix();
PolDensityMatrix measured_singlet_state();

/// 2 pi x 100 MHz in rad/ns.
inline constexpr double kAomShift = 2.0 * std::numbers::pi * 0.1;

}  // namespace hyperbell::fixtures
