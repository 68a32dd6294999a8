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

#ifndef DPRECON_WORD_DP_H_
#define DPRECON_WORD_DP_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dprecon/embedding_store.h"
#include "dprecon/rng.h"
#include "dprecon/sanitization_record.h"

namespace dprecon {

// Word-level metric-DP sanitizer (MadLib): each word's embedding is moved by
// isotropic multivariate Laplace noise and replaced by the vocabulary word
// nearest to the noisy point.

struct Token {
  // Original surface form, used when the token passes through.
  std::string text;
  // Lowercased form used for embedding lookup; empty for separators.
  std::string key;
  bool is_word = false;
  bool oov = false;
  // Whether whitespace preceded the token in the source text.
  bool space_before = false;
};

struct TokenizedText {
  std::vector<Token> tokens;
};

// Splits on whitespace, then peels leading and trailing punctuation off each
// chunk into separator tokens. Punctuation inside a word ("i'm", "b&w") stays
// part of it.
TokenizedText Tokenize(std::string_view text);

// Joins token texts, with a single space wherever the source had whitespace.
std::string Detokenize(const TokenizedText& tokenized);

// Sets `oov` on word tokens that have no row in `table`.
void MarkOov(TokenizedText& tokenized, const EmbeddingTable& table);

struct WordDpConfig {
  // Metric-DP budget per word, in inverse embedding distance units.
  double epsilon = 8.0;
  int dim = 50;
  uint64_t seed = 0;
  SearchMode search = SearchMode::kAccelerated;
};

// Draws z with density proportional to exp(-epsilon * ‖z‖) in R^dim:
// a uniform direction on the unit sphere scaled by a Gamma(dim, 1/epsilon)
// radius.
absl::StatusOr<std::vector<double>> SampleLaplaceNoise(double epsilon, int dim,
                                                       Rng& rng);

// Sanitizes one document. Noise is drawn from a stream derived from
// (config.seed, doc_id), so the record replays exactly. OOV words and
// separators pass through verbatim; replaced words are emitted in vocabulary
// casing.
absl::StatusOr<SanitizationRecord> SanitizeWordLevel(
    std::string_view doc_id, std::string_view text, const EmbeddingTable& table,
    const WordDpConfig& config, std::string_view timestamp = "");

struct DocumentRef {
  std::string_view id;
  std::string_view text;
};

// Sanitizes documents on up to `threads` workers. Output order matches input
// order and is identical to a serial run.
absl::StatusOr<std::vector<SanitizationRecord>> SanitizeWordLevelBatch(
    std::span<const DocumentRef> docs, const EmbeddingTable& table,
    const WordDpConfig& config, int threads = 1,
    std::string_view timestamp = "");

}  // namespace dprecon

#endif  // DPRECON_WORD_DP_H_
