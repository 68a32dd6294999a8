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

#ifndef DPRECON_JUDGE_H_
#define DPRECON_JUDGE_H_

#include <optional>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dprecon/llm_gateway.h"

namespace dprecon {

// Sent verbatim as the system message; the example block is left unfilled.
inline constexpr std::string_view kDefaultJudgeSystemTemplate =
    "Assume you are a helpful assistant. Your task is to analyze the match "
    "rate of the key information (e.g., time, place, person) in two "
    "documents. Based on your assessment, assign the response a numerical "
    "score ranging from 0 (low similarity) to 10 (high similarity). \n"
    "[Example]\n"
    "User: Text1: {text1} Text2: {text2}\n"
    "Assistant: {score}";

inline constexpr std::string_view kDefaultJudgeUserTemplate =
    "Text1: {text1} Text2: {text2}";

struct JudgeConfig {
  std::string model;
  std::string system_template = std::string(kDefaultJudgeSystemTemplate);
  // {text1} receives the original, {text2} the reconstruction.
  std::string user_template = std::string(kDefaultJudgeUserTemplate);
  // Extra asks after an unparseable reply.
  int max_retries = 2;
  double temperature = 0.0;
};

// The system template and the user template each need {text1} and {text2}.
absl::Status ValidateJudgeConfig(const JudgeConfig& config);

// First decimal integer token in [0, 10]. Tokens with a fractional part
// ("7.5") and out-of-range integers are skipped.
std::optional<int> ParseJudgeScore(std::string_view reply);

struct JudgeOutcome {
  std::optional<int> score;  // nullopt once retries are exhausted
  int attempts = 0;
};

// Gateway errors are returned; unparseable replies are retried with a fresh
// cache salt and end as an undefined score.
absl::StatusOr<JudgeOutcome> JudgeScore(std::string_view original,
                                        std::string_view reconstructed,
                                        LlmGateway& gateway,
                                        const JudgeConfig& config);

}  // namespace dprecon

#endif  // DPRECON_JUDGE_H_
