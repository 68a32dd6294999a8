// Copyright 2026 The dprecon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPRECON_CLI_H_
#define DPRECON_CLI_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace dprecon {

inline constexpr const char* kCommands[] = {
    "sanitize", "attack-blackbox", "finetune-export", "attack-whitebox-eval",
    "evaluate", "sweep",           "report",
};

struct CliOptions {
  std::string command;
  std::string config_path;
  // Run directory; defaults to runs/<timestamp>_<confighash8>.
  std::string out;
  // Input artifacts: a records or results JSONL file, or for `report` any
  // mix of report.json files and directories searched for them.
  std::vector<std::string> inputs;
  std::optional<uint64_t> seed;
  std::optional<double> budget;
  std::optional<std::string> mechanism;
  std::optional<std::string> model;
};

// Applies flag overrides to a config object.
nlohmann::json EffectiveConfig(nlohmann::json config, const CliOptions& opts);

// First 8 hex digits of the SHA-256 of the canonical config dump.
std::string ConfigHash8(const nlohmann::json& config);

// UTC "YYYYMMDDTHHMMSSZ"; honors SOURCE_DATE_EPOCH when set.
std::string RunTimestamp();

// Executes one command. Artifacts are written under the run directory;
// progress goes to `log`. Returns the run directory.
absl::StatusOr<std::string> RunCommand(const CliOptions& opts,
                                       std::ostream& log);

// {"error": {"code": "INVALID_ARGUMENT", "message": ...}}
std::string ErrorJson(const absl::Status& status);

// Runs a command and maps failures to exit code 1 plus ErrorJson on `err`.
int RunCli(const CliOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace dprecon

#endif  // DPRECON_CLI_H_
