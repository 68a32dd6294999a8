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

#include "test_fixtures.h"

#include <cmath>
#include <random>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dprecon/rng.h"

namespace dprecon::testing {

std::string WordName(size_t i) { return absl::StrFormat("w%05d", i); }

EmbeddingTable RandomTable(const TableSpec& spec) {
  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<EmbeddingTable::Row> rows;
  rows.reserve(spec.words);
  for (size_t i = 0; i < spec.words; ++i) {
    std::vector<double> v(spec.dim);
    double norm2 = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      norm2 += x * x;
    }
    const double norm =
        spec.median_norm * std::exp(spec.norm_sigma * gauss(rng));
    EmbeddingTable::Row row;
    row.word = WordName(i);
    for (double x : v) {
      row.vector.push_back(static_cast<float>(x / std::sqrt(norm2) * norm));
    }
    rows.push_back(std::move(row));
  }
  return *EmbeddingTable::FromRows(std::move(rows), spec.dim);
}

std::string FormatEmbeddings(const EmbeddingTable& table) {
  std::string out;
  for (size_t i = 0; i < table.size(); ++i) {
    out += table.word(i);
    for (float v : table.vector(i)) absl::StrAppendFormat(&out, " %.9g", v);
    out += '\n';
  }
  return out;
}

PlantedCorpus MakePlantedCorpus(size_t docs, size_t vocab_size,
                                size_t pii_per_doc, size_t filler_per_doc,
                                uint64_t seed, bool header) {
  static constexpr const char* kMonths[] = {
      "January", "February", "March",     "April",   "May",      "June",
      "July",    "August",   "September", "October", "November", "December"};
  static constexpr PiiClass kClasses[] = {PiiClass::kPerson, PiiClass::kGpe,
                                          PiiClass::kOrg};
  Rng rng(seed);
  std::uniform_int_distribution<size_t> word(0, vocab_size - 1);
  std::uniform_int_distribution<int> day(1, 28);
  std::uniform_int_distribution<int> month(0, 11);
  std::uniform_int_distribution<int> year(1950, 2019);

  PlantedCorpus corpus;
  std::set<size_t> pii_words;
  for (size_t d = 0; d < docs; ++d) {
    std::vector<std::string> parts;
    const std::string head = absl::StrCat("Case ", 1000 + d, ": on ", day(rng),
                                          " ", kMonths[month(rng)], " ", year(rng));
    if (header) parts.push_back(head);
    for (size_t k = 0; k < pii_per_doc; ++k) {
      size_t w = word(rng);
      while (pii_words.contains(w)) w = word(rng);
      pii_words.insert(w);
      corpus.gazetteer[kClasses[k % 3]].push_back(WordName(w));
      parts.push_back(WordName(w));
    }
    for (size_t k = 0; k < filler_per_doc; ++k) {
      size_t w = word(rng);
      while (pii_words.contains(w)) w = word(rng);
      parts.push_back(WordName(w));
    }
    std::string text;
    for (const std::string& p : parts) {
      if (!text.empty()) text += ' ';
      text += p;
    }
    text += " .";
    corpus.docs.push_back({absl::StrFormat("doc%04d", d), text, "planted"});
  }
  return corpus;
}

}  // namespace dprecon::testing
