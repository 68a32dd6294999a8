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

#ifndef DPRECON_PII_H_
#define DPRECON_PII_H_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace dprecon {

// The 18 OntoNotes-style entity classes treated as PII.
enum class PiiClass {
  kCardinal,
  kDate,
  kEvent,
  kFac,
  kGpe,
  kLanguage,
  kLaw,
  kLoc,
  kMoney,
  kNorp,
  kOrdinal,
  kOrg,
  kPercent,
  kPerson,
  kProduct,
  kQuantity,
  kTime,
  kWorkOfArt,
};

inline constexpr std::array<PiiClass, 18> kAllPiiClasses = {
    PiiClass::kCardinal, PiiClass::kDate,     PiiClass::kEvent,
    PiiClass::kFac,      PiiClass::kGpe,      PiiClass::kLanguage,
    PiiClass::kLaw,      PiiClass::kLoc,      PiiClass::kMoney,
    PiiClass::kNorp,     PiiClass::kOrdinal,  PiiClass::kOrg,
    PiiClass::kPercent,  PiiClass::kPerson,   PiiClass::kProduct,
    PiiClass::kQuantity, PiiClass::kTime,     PiiClass::kWorkOfArt,
};

// Lowercase snake_case name, e.g. "work_of_art".
std::string_view PiiClassName(PiiClass cls);
absl::StatusOr<PiiClass> ParsePiiClass(std::string_view name);

// A tagged span; offsets are UTF-8 byte offsets into the tagged text.
struct PiiSpan {
  std::string surface;
  PiiClass cls = PiiClass::kCardinal;
  size_t start = 0;
  size_t end = 0;
};

// Matching unit for all metrics: (class, normalized surface).
using PiiEntry = std::pair<PiiClass, std::string>;
using PiiSet = std::set<PiiEntry>;

// NFKC, lowercase, internal whitespace collapsed to one space, leading and
// trailing punctuation and whitespace stripped. Idempotent.
std::string NormalizePiiText(std::string_view surface);
PiiEntry NormalizePii(const PiiSpan& span);
PiiSet ToPiiSet(std::span<const PiiSpan> spans);

struct TagResult {
  std::vector<PiiSpan> spans;  // sorted by start, non-overlapping
  // External labels with no PiiClass mapping; those spans are dropped.
  int64_t dropped_unknown_labels = 0;
};

class PiiTagger {
 public:
  virtual ~PiiTagger() = default;
  virtual absl::StatusOr<TagResult> Tag(std::string_view text) const = 0;
  // Configuration snapshot recorded in run manifests.
  virtual nlohmann::json Describe() const = 0;
};

// Class -> phrases matched case-insensitively on word boundaries.
using Gazetteer = std::map<PiiClass, std::vector<std::string>>;

// {"person": ["Emmelie de Forest", ...], "gpe": [...], ...}
absl::StatusOr<Gazetteer> ParseGazetteer(const nlohmann::json& j);
absl::StatusOr<Gazetteer> LoadGazetteer(const std::string& path);

// Deterministic tagger: gazetteer phrases (longest first), then regular
// expressions for time, date, money, percent, quantity, ordinal and
// cardinal expressions, in that priority. A candidate overlapping an
// accepted span is discarded.
class RuleTagger : public PiiTagger {
 public:
  explicit RuleTagger(Gazetteer gazetteer = {});
  absl::StatusOr<TagResult> Tag(std::string_view text) const override;
  nlohmann::json Describe() const override;

 private:
  Gazetteer gazetteer_;
  // Entries flattened and sorted by descending byte length.
  std::vector<std::pair<std::string, PiiClass>> phrases_;
  // Lowercased phrase -> indices into phrases_, bucketed by byte length.
  std::map<size_t, std::unordered_map<std::string, std::vector<int>>>
      by_length_;
};

// Service label -> PiiClass, e.g. {"PER": "person", "LOC": "loc"}.
using LabelMap = std::map<std::string, PiiClass>;
absl::StatusOr<LabelMap> ParseLabelMap(const nlohmann::json& j);

// Adapter for an HTTP NER service:
//   POST <url> {"text": ...}
//   -> {"entities": [{"text", "label", "start", "end"}, ...]}
// Transport failures come back as UNAVAILABLE ("transport: ..."); responses
// that do not fit the schema as DATA_LOSS ("mapping: ...").
class HttpNerTagger : public PiiTagger {
 public:
  HttpNerTagger(std::string url, LabelMap labels);
  absl::StatusOr<TagResult> Tag(std::string_view text) const override;
  nlohmann::json Describe() const override;

  // Maps a service response body onto PiiSpans.
  absl::StatusOr<TagResult> MapResponse(std::string_view text,
                                        std::string_view body) const;

 private:
  std::string url_;
  LabelMap labels_;
};

absl::StatusOr<std::vector<PiiSpan>> ExtractPii(std::string_view text,
                                                const PiiTagger& tagger);

// {"type": "rules", "gazetteer": <path or inline object>}
// {"type": "external", "url": ..., "label_map": <path or inline object>}
absl::StatusOr<std::unique_ptr<PiiTagger>> TaggerFromConfig(
    const nlohmann::json& config);

}  // namespace dprecon

#endif  // DPRECON_PII_H_
