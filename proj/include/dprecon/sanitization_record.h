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

#ifndef DPRECON_SANITIZATION_RECORD_H_
#define DPRECON_SANITIZATION_RECORD_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace dprecon {

enum class Mechanism {
  kWordLevel,
  kSentenceLevelExact,
  kSentenceLevelApi,
};

std::string_view MechanismName(Mechanism mechanism);
absl::StatusOr<Mechanism> ParseMechanism(std::string_view name);

// Provenance of one sanitized document. `budget` is epsilon for the word
// level and the sampling temperature for both sentence-level mechanisms.
struct SanitizationRecord {
  std::string doc_id;
  std::string original;
  std::string sanitized;
  Mechanism mechanism = Mechanism::kWordLevel;
  double budget = 0.0;
  uint64_t seed = 0;
  std::string timestamp;

  // Word level: counts over word tokens (separators excluded).
  int64_t word_tokens = 0;
  int64_t oov_tokens = 0;
  int64_t retained_tokens = 0;

  // Sentence level.
  int64_t emitted_tokens = 0;
  std::optional<double> clip_bound;
  std::optional<double> ldp_epsilon;
  std::string template_hash;
  std::string model;
};

// Fraction of in-vocabulary word tokens that the mechanism mapped back to
// themselves; nullopt when the document has none.
std::optional<double> SelfRetention(const SanitizationRecord& record);

void to_json(nlohmann::json& j, const SanitizationRecord& record);
void from_json(const nlohmann::json& j, SanitizationRecord& record);

}  // namespace dprecon

#endif  // DPRECON_SANITIZATION_RECORD_H_
