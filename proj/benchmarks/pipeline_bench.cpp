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

#include <benchmark/benchmark.h>

#include "hyperbell/app/config.hpp"
#include "hyperbell/app/pipelines.hpp"

namespace hyperbell::app {
namespace {

// Background fixed so the timing excludes calibration.
RunConfig beating_config() {
  RunConfig cfg;
  cfg.detection.background = 15.0;
  return cfg;
}

void BM_BeatingPipeline(benchmark::State& state) {
  RunConfig cfg = beating_config();
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(run_beating(cfg).phase.visibility);
  }
}
BENCHMARK(BM_BeatingPipeline)->Unit(benchmark::kMillisecond);

void BM_BeatingCalibration(benchmark::State& state) {
  const RunConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_beating_background(cfg));
}
BENCHMARK(BM_BeatingCalibration)->Unit(benchmark::kMillisecond);

void BM_PolarizationPipeline(benchmark::State& state) {
  RunConfig cfg;
  cfg.polarization.background = 1.0;
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(run_polarization(cfg).curves.size());
  }
}
BENCHMARK(BM_PolarizationPipeline)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace hyperbell::app
