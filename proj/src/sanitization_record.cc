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

#include "dprecon/sanitization_record.h"

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dprecon {

std::string_view MechanismName(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::kWordLevel:
      return "word_level";
    case Mechanism::kSentenceLevelExact:
      return "sentence_level_exact";
    case Mechanism::kSentenceLevelApi:
      return "sentence_level_api";
  }
  return "unknown";
}

absl::StatusOr<Mechanism> ParseMechanism(std::string_view name) {
  for (Mechanism m : {Mechanism::kWordLevel, Mechanism::kSentenceLevelExact,
                      Mechanism::kSentenceLevelApi}) {
    if (MechanismName(m) == name) return m;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown mechanism '", std::string(name),
                   "'; expected word_level, sentence_level_exact or "
                   "sentence_level_api"));
}

std::optional<double> SelfRetention(const SanitizationRecord& record) {
  const int64_t in_vocab = record.word_tokens - record.oov_tokens;
  if (in_vocab <= 0) return std::nullopt;
  return static_cast<double>(record.retained_tokens) /
         static_cast<double>(in_vocab);
}

void to_json(nlohmann::json& j, const SanitizationRecord& record) {
  j = nlohmann::json{
      {"doc_id", record.doc_id},
      {"original", record.original},
      {"sanitized", record.sanitized},
      {"mechanism", MechanismName(record.mechanism)},
      {"budget", record.budget},
      {"seed", record.seed},
      {"timestamp", record.timestamp},
  };
  if (record.mechanism == Mechanism::kWordLevel) {
    j["word_tokens"] = record.word_tokens;
    j["oov_tokens"] = record.oov_tokens;
    j["retained_tokens"] = record.retained_tokens;
  } else {
    j["emitted_tokens"] = record.emitted_tokens;
    j["template_hash"] = record.template_hash;
    j["model"] = record.model;
    if (record.clip_bound) j["clip_bound"] = *record.clip_bound;
    if (record.ldp_epsilon) j["ldp_epsilon"] = *record.ldp_epsilon;
  }
}

void from_json(const nlohmann::json& j, SanitizationRecord& record) {
  record.doc_id = j.at("doc_id").get<std::string>();
  record.original = j.at("original").get<std::string>();
  record.sanitized = j.at("sanitized").get<std::string>();
  absl::StatusOr<Mechanism> mechanism =
      ParseMechanism(j.at("mechanism").get<std::string>());
  if (!mechanism.ok()) {
    throw nlohmann::json::other_error::create(
        501, std::string(mechanism.status().message()), &j);
  }
  record.mechanism = *mechanism;
  record.budget = j.at("budget").get<double>();
  record.seed = j.value("seed", uint64_t{0});
  record.timestamp = j.value("timestamp", std::string());
  record.word_tokens = j.value("word_tokens", int64_t{0});
  record.oov_tokens = j.value("oov_tokens", int64_t{0});
  record.retained_tokens = j.value("retained_tokens", int64_t{0});
  record.emitted_tokens = j.value("emitted_tokens", int64_t{0});
  record.template_hash = j.value("template_hash", std::string());
  record.model = j.value("model", std::string());
  if (j.contains("clip_bound")) record.clip_bound = j["clip_bound"].get<double>();
  if (j.contains("ldp_epsilon")) {
    record.ldp_epsilon = j["ldp_epsilon"].get<double>();
  }
}

}  // namespace dprecon
