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

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>

#include "hyperbell/app/config.hpp"

namespace hyperbell::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitIo = 4,
};

struct OutputOptions {
  std::filesystem::path out_dir = "out";
  std::set<std::string> formats{"csv", "json"};  // any of csv, json, svg
  bool noiseless = false;

  bool wants(const std::string& f) const { return formats.count(f) > 0; }
};

// Each command writes its files under options.out_dir plus a resolved
// run.yaml, and prints a short summary to `out`.
void cmd_envelope(const RunConfig& cfg, const OutputOptions& options, std::ostream& out);
void cmd_beating(const RunConfig& cfg, const OutputOptions& options, std::ostream& out);
void cmd_polarization(const RunConfig& cfg, const OutputOptions& options, std::ostream& out,
                      std::ostream& err);
void cmd_tomography(const RunConfig& cfg, const OutputOptions& options, std::ostream& out);
void cmd_chsh(const RunConfig& cfg, const OutputOptions& options, std::ostream& out);
void cmd_states(const OutputOptions& options, std::ostream& out);

/// Full command line; returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hyperbell::app
