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

#ifndef DPRECON_EMBEDDING_STORE_H_
#define DPRECON_EMBEDDING_STORE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"

namespace dprecon {

// A word embedding space: a vocabulary with one fixed-dimension real vector
// per word. Words are stored lowercased and unique; the first occurrence of
// a duplicated word wins. Immutable after construction and safe to share
// across threads.
class EmbeddingTable {
 public:
  struct Row {
    std::string word;
    std::vector<float> vector;
  };

  // Builds a table from rows in order. Words are lowercased; later duplicates
  // are skipped and counted. Fails on dimension mismatch, non-finite
  // coordinates, empty words, or an empty row list.
  static absl::StatusOr<EmbeddingTable> FromRows(std::vector<Row> rows,
                                                 int dim);

  int dim() const { return dim_; }
  size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  size_t duplicate_count() const { return duplicate_count_; }

  const std::string& word(size_t row) const { return words_[row]; }
  std::span<const float> vector(size_t row) const {
    return {data_.data() + row * static_cast<size_t>(dim_),
            static_cast<size_t>(dim_)};
  }

  // Row of `word` after lowercasing, if present.
  std::optional<size_t> Find(std::string_view word) const;

  // Euclidean norm of each row, and row ids sorted by (norm, row).
  const std::vector<double>& row_norms() const { return norms_; }
  const std::vector<size_t>& rows_by_norm() const { return by_norm_; }

 private:
  EmbeddingTable() = default;

  int dim_ = 0;
  std::vector<std::string> words_;
  std::vector<float> data_;
  absl::flat_hash_map<std::string, size_t> index_;
  size_t duplicate_count_ = 0;
  std::vector<double> norms_;
  std::vector<size_t> by_norm_;
};

// Parses a whitespace-separated `word c1 ... cm` text file (the common GloVe
// distribution format). Blank lines are ignored.
absl::StatusOr<EmbeddingTable> LoadEmbeddings(const std::string& path,
                                              int expected_dim);

// Parses embedding text already in memory. `source` names it in errors.
absl::StatusOr<EmbeddingTable> ParseEmbeddings(std::string_view contents,
                                               int expected_dim,
                                               std::string_view source = "");

enum class SearchMode {
  // Linear scan over every row.
  kExactBruteForce,
  // Scan ordered outward from the query's norm, pruned with the reverse
  // triangle inequality and partial-distance early exit. Exact: returns the
  // same row as kExactBruteForce for every query.
  kAccelerated,
};

// Row minimizing squared Euclidean distance to `query`; ties go to the lowest
// row index.
absl::StatusOr<size_t> NearestRow(const EmbeddingTable& table,
                                  std::span<const double> query,
                                  SearchMode mode = SearchMode::kAccelerated);

absl::StatusOr<std::string> NearestWord(
    const EmbeddingTable& table, std::span<const double> query,
    SearchMode mode = SearchMode::kAccelerated);

}  // namespace dprecon

#endif  // DPRECON_EMBEDDING_STORE_H_
