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

#include "dprecon/judge.h"

#include <cctype>

#include "absl/strings/str_cat.h"
#include "dprecon/text_util.h"

namespace dprecon {
namespace {

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

absl::Status ValidateJudgeConfig(const JudgeConfig& config) {
  if (config.model.empty()) {
    return absl::InvalidArgumentError("judge model id is empty");
  }
  for (const std::string* t : {&config.system_template, &config.user_template}) {
    if (CountOccurrences(*t, "{text1}") == 0 ||
        CountOccurrences(*t, "{text2}") == 0) {
      return absl::InvalidArgumentError(
          "judge templates need both {text1} and {text2} slots");
    }
  }
  if (config.max_retries < 0) {
    return absl::InvalidArgumentError("max_retries must be >= 0");
  }
  return absl::OkStatus();
}

std::optional<int> ParseJudgeScore(std::string_view reply) {
  size_t i = 0;
  while (i < reply.size()) {
    if (!IsDigit(reply[i])) {
      ++i;
      continue;
    }
    const size_t start = i;
    while (i < reply.size() && IsDigit(reply[i])) ++i;
    bool fractional = false;
    if (i + 1 < reply.size() && reply[i] == '.' && IsDigit(reply[i + 1])) {
      fractional = true;
      ++i;
      while (i < reply.size() && IsDigit(reply[i])) ++i;
    }
    if (fractional) continue;
    const std::string_view token = reply.substr(start, i - start);
    if (token.size() > 2) continue;
    const int value = token.size() == 1 ? token[0] - '0'
                                        : (token[0] - '0') * 10 + token[1] - '0';
    if (value <= 10) return value;
  }
  return std::nullopt;
}

absl::StatusOr<JudgeOutcome> JudgeScore(std::string_view original,
                                        std::string_view reconstructed,
                                        LlmGateway& gateway,
                                        const JudgeConfig& config) {
  if (absl::Status s = ValidateJudgeConfig(config); !s.ok()) return s;
  const std::pair<std::string_view, std::string_view> slots[] = {
      {"{text1}", original}, {"{text2}", reconstructed}};
  const std::string user = FillSlots(config.user_template, slots);
  ChatRequest request;
  request.model = config.model;
  request.messages = {{"system", config.system_template}, {"user", user}};
  request.temperature = config.temperature;
  request.max_tokens = 16;

  JudgeOutcome outcome;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    request.cache_salt = attempt;
    ++outcome.attempts;
    absl::StatusOr<ChatResponse> response = gateway.Complete(request);
    if (!response.ok()) return response.status();
    outcome.score = ParseJudgeScore(response->content);
    if (outcome.score) break;
  }
  return outcome;
}

}  // namespace dprecon
