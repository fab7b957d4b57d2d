// Copyright 2026 The kerrgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command-line front end: single points, sigma scans, figure pipelines,
// power-law fits and manifest reruns.

#include <iosfwd>
#include <string>
#include <vector>

namespace kerrgate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // I/O and other unexpected errors
inline constexpr int kExitUsage = 2;    // bad flags, parameters or input files
inline constexpr int kExitNumerics = 3; // quadrature or sigma search did not converge

/// Runs one command. `args` excludes the program name. JSON summaries go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kerrgate::cli
