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

#ifndef DPRECON_CORPUS_H_
#define DPRECON_CORPUS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace dprecon {

struct Document {
  std::string id;
  std::string text;
  // Free-form provenance tag, e.g. "wikimia-like" or "pile-cc-like".
  std::string source;
};

void to_json(nlohmann::json& j, const Document& doc);

// Reads a JSONL corpus. Each line is an object with "text" and optionally
// "id" and "source". Missing ids become the zero-padded 0-based line index.
// Fails on malformed lines, empty text and duplicate ids.
absl::StatusOr<std::vector<Document>> LoadCorpus(const std::string& path);
absl::StatusOr<std::vector<Document>> ParseCorpus(std::string_view contents,
                                                  std::string_view source = "");
absl::Status SaveCorpus(const std::string& path,
                        std::span<const Document> docs);

// Keeps the first `max_words` whitespace-delimited words. Text after the
// last kept word is dropped; shorter documents are returned unchanged.
Document TruncateDoc(const Document& doc, size_t max_words);

struct SplitSpec {
  size_t train = 0;
  size_t validation = 0;
  size_t test = 0;
  uint64_t seed = 0;
};

struct CorpusSplits {
  std::vector<Document> train;
  std::vector<Document> validation;
  std::vector<Document> test;
};

// Seeded uniform shuffle, then contiguous train/validation/test slices.
absl::StatusOr<CorpusSplits> SplitCorpus(std::span<const Document> docs,
                                         const SplitSpec& spec);

}  // namespace dprecon

#endif  // DPRECON_CORPUS_H_
