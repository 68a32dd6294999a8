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

#include "dprecon/word_dp.h"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cmath>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dprecon/parallel.h"
#include "dprecon/text_util.h"

namespace dprecon {
namespace {

// Byte length of the punctuation run at the start of `chunk`.
size_t LeadingPunctuation(std::string_view chunk) {
  int32_t i = 0;
  const int32_t n = static_cast<int32_t>(chunk.size());
  while (i < n) {
    int32_t next = i;
    UChar32 c;
    U8_NEXT(chunk.data(), next, n, c);
    if (c < 0 || !u_ispunct(c)) break;
    i = next;
  }
  return static_cast<size_t>(i);
}

// Byte length of the punctuation run at the end of `chunk`.
size_t TrailingPunctuation(std::string_view chunk) {
  int32_t i = static_cast<int32_t>(chunk.size());
  while (i > 0) {
    int32_t prev = i;
    UChar32 c;
    U8_PREV(chunk.data(), 0, prev, c);
    if (c < 0 || !u_ispunct(c)) break;
    i = prev;
  }
  return chunk.size() - static_cast<size_t>(i);
}

void AddSeparator(TokenizedText& out, std::string_view text, bool space) {
  Token t;
  t.text = std::string(text);
  t.space_before = space;
  out.tokens.push_back(std::move(t));
}

}  // namespace

TokenizedText Tokenize(std::string_view text) {
  TokenizedText out;
  size_t i = 0;
  bool space = false;
  while (i < text.size()) {
    if (IsAsciiSpace(text[i])) {
      space = true;
      ++i;
      continue;
    }
    const size_t start = i;
    while (i < text.size() && !IsAsciiSpace(text[i])) ++i;
    std::string_view chunk = text.substr(start, i - start);
    const bool chunk_space = space;
    space = false;

    const size_t lead = LeadingPunctuation(chunk);
    if (lead == chunk.size()) {
      AddSeparator(out, chunk, chunk_space);
      continue;
    }
    const size_t trail = TrailingPunctuation(chunk.substr(lead));
    bool first = true;
    if (lead > 0) {
      AddSeparator(out, chunk.substr(0, lead), chunk_space);
      first = false;
    }
    Token word;
    word.text = std::string(chunk.substr(lead, chunk.size() - lead - trail));
    word.key = ToLowerUtf8(word.text);
    word.is_word = true;
    word.space_before = first && chunk_space;
    out.tokens.push_back(std::move(word));
    if (trail > 0) {
      AddSeparator(out, chunk.substr(chunk.size() - trail), false);
    }
  }
  if (!out.tokens.empty()) out.tokens.front().space_before = false;
  return out;
}

std::string Detokenize(const TokenizedText& tokenized) {
  std::string out;
  for (const Token& t : tokenized.tokens) {
    if (t.space_before && !out.empty()) out += ' ';
    out += t.text;
  }
  return out;
}

void MarkOov(TokenizedText& tokenized, const EmbeddingTable& table) {
  for (Token& t : tokenized.tokens) {
    t.oov = t.is_word && !table.Find(t.key).has_value();
  }
}

absl::StatusOr<std::vector<double>> SampleLaplaceNoise(double epsilon, int dim,
                                                       Rng& rng) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive and finite, got ", epsilon));
  }
  if (dim < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise dimension must be >= 1, got ", dim));
  }
  std::normal_distribution<double> gaussian(0.0, 1.0);
  std::vector<double> z(static_cast<size_t>(dim));
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : z) {
      x = gaussian(rng);
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  std::gamma_distribution<double> radius(static_cast<double>(dim),
                                         1.0 / epsilon);
  const double scale = radius(rng) / std::sqrt(norm2);
  for (double& x : z) x *= scale;
  return z;
}

absl::StatusOr<SanitizationRecord> SanitizeWordLevel(
    std::string_view doc_id, std::string_view text, const EmbeddingTable& table,
    const WordDpConfig& config, std::string_view timestamp) {
  if (config.dim != table.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("config dimension ", config.dim,
                     " does not match embedding dimension ", table.dim()));
  }
  if (!(config.epsilon > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", config.epsilon));
  }
  SanitizationRecord record;
  record.doc_id = std::string(doc_id);
  record.original = std::string(text);
  record.mechanism = Mechanism::kWordLevel;
  record.budget = config.epsilon;
  record.seed = config.seed;
  record.timestamp = std::string(timestamp);

  Rng rng = MakeStreamRng(config.seed, doc_id);
  TokenizedText tokenized = Tokenize(text);
  std::vector<double> noisy(static_cast<size_t>(table.dim()));
  for (Token& t : tokenized.tokens) {
    if (!t.is_word) continue;
    ++record.word_tokens;
    std::optional<size_t> row = table.Find(t.key);
    if (!row) {
      t.oov = true;
      ++record.oov_tokens;
      continue;
    }
    absl::StatusOr<std::vector<double>> z =
        SampleLaplaceNoise(config.epsilon, table.dim(), rng);
    if (!z.ok()) return z.status();
    std::span<const float> phi = table.vector(*row);
    for (size_t i = 0; i < noisy.size(); ++i) {
      noisy[i] = static_cast<double>(phi[i]) + (*z)[i];
    }
    absl::StatusOr<size_t> out = NearestRow(table, noisy, config.search);
    if (!out.ok()) return out.status();
    if (*out == *row) ++record.retained_tokens;
    t.text = table.word(*out);
  }
  record.sanitized = Detokenize(tokenized);
  return record;
}

absl::StatusOr<std::vector<SanitizationRecord>> SanitizeWordLevelBatch(
    std::span<const DocumentRef> docs, const EmbeddingTable& table,
    const WordDpConfig& config, int threads, std::string_view timestamp) {
  std::vector<absl::StatusOr<SanitizationRecord>> results(docs.size());
  ParallelFor(docs.size(), threads, [&](size_t i) {
    results[i] =
        SanitizeWordLevel(docs[i].id, docs[i].text, table, config, timestamp);
  });
  std::vector<SanitizationRecord> records;
  records.reserve(docs.size());
  for (auto& r : results) {
    if (!r.ok()) return r.status();
    records.push_back(*std::move(r));
  }
  return records;
}

}  // namespace dprecon
