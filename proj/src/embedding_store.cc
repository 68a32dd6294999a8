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

#include "dprecon/embedding_store.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dprecon/text_util.h"

namespace dprecon {
namespace {

// Squared distance accumulated in coordinate order. Once the running sum
// exceeds `bound` the partial sum is returned; it is then already greater
// than `bound`, and since every term is nonnegative the full sum would be
// too.
double SquaredDistance(std::span<const float> row,
                       std::span<const double> query, double bound) {
  double acc = 0.0;
  const size_t n = row.size();
  for (size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(row[i]) - query[i];
    acc += d * d;
    if ((i & 7) == 7 && acc > bound) return acc;
  }
  return acc;
}

double Norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

absl::Status CheckQuery(const EmbeddingTable& table,
                        std::span<const double> query) {
  if (table.empty()) {
    return absl::FailedPreconditionError("embedding table is empty");
  }
  if (query.size() != static_cast<size_t>(table.dim())) {
    return absl::InvalidArgumentError(
        absl::StrCat("query has dimension ", query.size(),
                     " but the embedding table has dimension ", table.dim()));
  }
  return absl::OkStatus();
}

size_t BruteForce(const EmbeddingTable& table, std::span<const double> query) {
  size_t best_row = 0;
  double best = std::numeric_limits<double>::infinity();
  for (size_t row = 0; row < table.size(); ++row) {
    const double d = SquaredDistance(table.vector(row), query,
                                     std::numeric_limits<double>::infinity());
    if (d < best) {
      best = d;
      best_row = row;
    }
  }
  return best_row;
}

size_t NormOrdered(const EmbeddingTable& table,
                   std::span<const double> query) {
  const std::vector<double>& norms = table.row_norms();
  const std::vector<size_t>& order = table.rows_by_norm();
  const double qn = Norm(query);

  // First position whose norm is >= qn; walk outward in both directions.
  const auto split = std::lower_bound(
      order.begin(), order.end(), qn,
      [&norms](size_t row, double value) { return norms[row] < value; });
  std::ptrdiff_t lo = (split - order.begin()) - 1;
  std::ptrdiff_t hi = split - order.begin();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(order.size());

  size_t best_row = table.size();
  double best = std::numeric_limits<double>::infinity();

  // |‖v‖ - ‖q‖| lower-bounds ‖v - q‖. The slack absorbs rounding in the
  // computed norms so pruning never drops a row that could tie or win.
  auto pruned = [&](double gap, double row_norm) {
    const double slack = 1e-9 * (1.0 + qn + row_norm);
    const double safe_gap = gap - slack;
    return safe_gap > 0.0 && safe_gap * safe_gap > best;
  };

  while (lo >= 0 || hi < n) {
    const double gap_lo =
        lo >= 0 ? qn - norms[order[lo]] : std::numeric_limits<double>::max();
    const double gap_hi =
        hi < n ? norms[order[hi]] - qn : std::numeric_limits<double>::max();
    const bool take_lo = gap_lo <= gap_hi;
    const size_t row = take_lo ? order[lo] : order[hi];
    // The side with the smaller gap failing the bound means both do.
    if (pruned(take_lo ? gap_lo : gap_hi, norms[row])) break;
    if (take_lo) {
      --lo;
    } else {
      ++hi;
    }
    const double d = SquaredDistance(table.vector(row), query, best);
    if (d < best || (d == best && row < best_row)) {
      best = d;
      best_row = row;
    }
  }
  return best_row;
}

}  // namespace

absl::StatusOr<EmbeddingTable> EmbeddingTable::FromRows(std::vector<Row> rows,
                                                        int dim) {
  if (dim <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("embedding dimension must be positive, got ", dim));
  }
  if (rows.empty()) {
    return absl::InvalidArgumentError("embedding table has no rows");
  }
  EmbeddingTable table;
  table.dim_ = dim;
  table.words_.reserve(rows.size());
  table.data_.reserve(rows.size() * static_cast<size_t>(dim));
  for (size_t i = 0; i < rows.size(); ++i) {
    Row& row = rows[i];
    if (row.word.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", i, " has an empty word"));
    }
    if (row.vector.size() != static_cast<size_t>(dim)) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", i, " (", row.word, ") has ", row.vector.size(),
                       " coordinates, expected ", dim));
    }
    for (float x : row.vector) {
      if (!std::isfinite(x)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "row ", i, " (", row.word, ") has a non-finite coordinate"));
      }
    }
    std::string word = ToLowerUtf8(row.word);
    auto [it, inserted] = table.index_.try_emplace(word, table.words_.size());
    if (!inserted) {
      ++table.duplicate_count_;
      continue;
    }
    table.words_.push_back(std::move(word));
    table.data_.insert(table.data_.end(), row.vector.begin(),
                       row.vector.end());
  }

  const size_t n = table.words_.size();
  table.norms_.resize(n);
  std::vector<double> buffer(static_cast<size_t>(dim));
  for (size_t r = 0; r < n; ++r) {
    auto v = table.vector(r);
    std::copy(v.begin(), v.end(), buffer.begin());
    table.norms_[r] = Norm(buffer);
  }
  table.by_norm_.resize(n);
  for (size_t r = 0; r < n; ++r) table.by_norm_[r] = r;
  std::stable_sort(table.by_norm_.begin(), table.by_norm_.end(),
                   [&table](size_t a, size_t b) {
                     return table.norms_[a] < table.norms_[b];
                   });
  return table;
}

std::optional<size_t> EmbeddingTable::Find(std::string_view word) const {
  auto it = index_.find(ToLowerUtf8(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

absl::StatusOr<EmbeddingTable> ParseEmbeddings(std::string_view contents,
                                               int expected_dim,
                                               std::string_view source) {
  if (expected_dim <= 0) {
    return absl::InvalidArgumentError("expected_dim must be positive");
  }
  std::vector<EmbeddingTable::Row> rows;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < contents.size()) {
    size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != static_cast<size_t>(expected_dim) + 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          std::string(source), ":", line_no, ": expected ", expected_dim,
          " coordinates after the word, found ", fields.size() - 1));
    }
    EmbeddingTable::Row row;
    row.word = std::string(fields[0]);
    row.vector.reserve(expected_dim);
    for (size_t i = 1; i < fields.size(); ++i) {
      float value = 0;
      const char* first = fields[i].data();
      const char* last = first + fields[i].size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        return absl::InvalidArgumentError(
            absl::StrCat(std::string(source), ":", line_no, ": coordinate ", i,
                         " is not a finite number: '", std::string(fields[i]), "'"));
      }
      row.vector.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(source), ": embedding file contains no vectors"));
  }
  return EmbeddingTable::FromRows(std::move(rows), expected_dim);
}

absl::StatusOr<EmbeddingTable> LoadEmbeddings(const std::string& path,
                                              int expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(
        absl::StrCat("cannot open embedding file ", path));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseEmbeddings(buffer.str(), expected_dim, path);
}

absl::StatusOr<size_t> NearestRow(const EmbeddingTable& table,
                                  std::span<const double> query,
                                  SearchMode mode) {
  if (absl::Status s = CheckQuery(table, query); !s.ok()) return s;
  switch (mode) {
    case SearchMode::kExactBruteForce:
      return BruteForce(table, query);
    case SearchMode::kAccelerated:
      return NormOrdered(table, query);
  }
  return absl::InternalError("unknown search mode");
}

absl::StatusOr<std::string> NearestWord(const EmbeddingTable& table,
                                        std::span<const double> query,
                                        SearchMode mode) {
  absl::StatusOr<size_t> row = NearestRow(table, query, mode);
  if (!row.ok()) return row.status();
  return table.word(*row);
}

}  // namespace dprecon
