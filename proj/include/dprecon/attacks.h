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

#ifndef DPRECON_ATTACKS_H_
#define DPRECON_ATTACKS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dprecon/corpus.h"
#include "dprecon/embedding_store.h"
#include "dprecon/judge.h"
#include "dprecon/llm_gateway.h"
#include "dprecon/metrics.h"
#include "dprecon/pii.h"
#include "dprecon/sanitization_record.h"
#include "dprecon/word_dp.h"
#include "json.hpp"

namespace dprecon {

inline constexpr std::string_view kEditedSlot = "{edited text}";
inline constexpr std::string_view kOriginalSlot = "{original text}";

inline constexpr std::string_view kDefaultAttackPreamble =
    "You are a helpful assistant who can help users generate the original "
    "text based on the edited text, and you may have seen the original text. "
    "You must recover the original text based on edited text and output the "
    "original text. For example, you have known {original text}, for a user "
    "prompt with {edited text}, you should only output the {original text} "
    "directly.";

inline constexpr std::string_view kDefaultAttackDemonstration =
    "Demonstration\nUser: {edited text}\nAssistant: {original text}";

// The system message is the preamble (sent as written) followed by one
// filled demonstration block per demo pair; the user message is the `user`
// template filled with the target's sanitized text.
struct InstructionTemplate {
  std::string preamble = std::string(kDefaultAttackPreamble);
  std::string demonstration = std::string(kDefaultAttackDemonstration);
  std::string user = std::string(kEditedSlot);

  // SHA-256 over the three parts, recorded in manifests.
  std::string Hash() const;
};

// The demonstration block needs {edited text} and {original text} exactly
// once each; the user template needs {edited text} exactly once.
absl::Status ValidateInstructionTemplate(const InstructionTemplate& tmpl);

struct DemoPair {
  std::string doc_id;
  std::string original;
  std::string sanitized;
};

// Sorts by doc_id and holds out the first `count` records as demonstrations.
// Returns (demos, targets).
absl::StatusOr<std::pair<std::vector<DemoPair>, std::vector<SanitizationRecord>>>
SplitDemos(std::vector<SanitizationRecord> records, int count);

struct PromptOptions {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 512;
};

// Refuses demos that are the target itself (same id or same original) and
// verifies the target's original never reaches the system message.
absl::StatusOr<ChatRequest> BuildInstructionPrompt(
    const SanitizationRecord& target, const InstructionTemplate& tmpl,
    std::span<const DemoPair> demos, const PromptOptions& options);

enum class AttackKind { kBlackboxInstruction, kWhiteboxFinetune };

std::string_view AttackKindName(AttackKind kind);
absl::StatusOr<AttackKind> ParseAttackKind(std::string_view name);

struct AttackResult {
  std::string doc_id;
  std::string original;
  std::string sanitized;
  std::string reconstructed;
  // Absent when the document errored.
  std::optional<DocMetrics> metrics;
  std::optional<int> score;
  int judge_attempts = 0;
  AttackKind attack = AttackKind::kBlackboxInstruction;
  std::string model;
  std::string mechanism;
  double budget = 0.0;
  std::string error;
};

void to_json(nlohmann::json& j, const AttackResult& r);
void from_json(const nlohmann::json& j, AttackResult& r);

// Tags original, sanitized and reconstructed text and fills `metrics`.
absl::Status AttachMetrics(AttackResult& result, const PiiTagger& tagger);

struct AttackRunOptions {
  int threads = 8;
  // The run fails when more than this fraction of documents error.
  double max_error_fraction = 0.1;
  // Scores each successful reconstruction when set.
  std::optional<JudgeConfig> judge;
};

struct BlackboxConfig {
  InstructionTemplate tmpl;
  PromptOptions prompt;
  AttackRunOptions run;
};

// One result per target, ordered by doc_id. Per-document gateway failures are
// recorded in AttackResult::error.
absl::StatusOr<std::vector<AttackResult>> RunBlackboxAttack(
    std::span<const SanitizationRecord> targets,
    std::span<const DemoPair> demos, LlmGateway& gateway,
    const PiiTagger& tagger, const BlackboxConfig& config);

inline constexpr std::string_view kDefaultSeparator = "\n###\n";

struct FinetunePair {
  std::string doc_id;
  std::string sanitized;
  std::string original;
  std::string separator;
  std::string concatenated;  // sanitized + separator + original
  uint64_t seed = 0;         // sanitizer seed; the stream is keyed by doc_id
  uint64_t stream_seed = 0;
  double budget = 0.0;
};

void to_json(nlohmann::json& j, const FinetunePair& p);
void from_json(const nlohmann::json& j, FinetunePair& p);

// Returns `base` when it occurs in none of `texts`; otherwise lengthens the
// run of '#' in it until it does not.
std::string ChooseSeparator(std::string_view base,
                            std::span<const std::string_view> texts);

// Splits on the first occurrence of `separator`.
std::optional<std::pair<std::string, std::string>> SplitOnSeparator(
    std::string_view concatenated, std::string_view separator);

// Sanitizes every auxiliary document with the word-level mechanism and pairs
// it with its original. Fails if any auxiliary document shares an id or text
// with `held_out`.
absl::StatusOr<std::vector<FinetunePair>> BuildFinetunePairs(
    std::span<const Document> aux, std::span<const Document> held_out,
    const EmbeddingTable& table, const WordDpConfig& config,
    std::string_view separator = kDefaultSeparator, int threads = 1);

struct GenerationConfig {
  std::string model;
  std::string separator = std::string(kDefaultSeparator);
  double temperature = 0.0;
  int max_tokens = 512;
  AttackRunOptions run;
};

// Prompts a generation endpoint with sanitized + separator and keeps the text
// after the first separator of the reply (the whole reply when it has none).
// Empty generations are recorded as errors.
absl::StatusOr<std::vector<AttackResult>> RunGenerationEval(
    std::span<const SanitizationRecord> targets, LlmGateway& gateway,
    const PiiTagger& tagger, const GenerationConfig& config);

// Aggregate plus per-class breakdown over the non-errored results.
absl::StatusOr<CorpusReport> EvaluateResults(
    std::span<const AttackResult> results, const PiiTagger& tagger);

}  // namespace dprecon

#endif  // DPRECON_ATTACKS_H_
