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

#include "dprecon/corpus.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dprecon/io.h"
#include "dprecon/rng.h"
#include "dprecon/text_util.h"

namespace dprecon {

void to_json(nlohmann::json& j, const Document& doc) {
  j = nlohmann::json{{"id", doc.id}, {"text", doc.text}};
  if (!doc.source.empty()) j["source"] = doc.source;
}

absl::StatusOr<std::vector<Document>> ParseCorpus(std::string_view contents,
                                                  std::string_view source) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < contents.size()) {
    size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    const size_t index = line_no++;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat(std::string(source), ":", line_no, ": malformed JSON line"));
    }
    auto text = j.find("text");
    if (text == j.end() || !text->is_string() ||
        text->get_ref<const std::string&>().empty()) {
      return absl::InvalidArgumentError(absl::StrCat(
          std::string(source), ":", line_no, ": missing or empty \"text\" field"));
    }
    Document doc;
    doc.text = text->get<std::string>();
    if (auto id = j.find("id"); id != j.end() && !id->is_null()) {
      doc.id = id->is_string() ? id->get<std::string>() : id->dump();
    } else {
      doc.id = absl::StrFormat("%06d", index);
    }
    doc.source = j.value("source", std::string());
    if (!seen.insert(doc.id).second) {
      return absl::InvalidArgumentError(absl::StrCat(
          std::string(source), ":", line_no, ": duplicate document id '", doc.id, "'"));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

absl::StatusOr<std::vector<Document>> LoadCorpus(const std::string& path) {
  absl::StatusOr<std::string> contents = ReadFile(path);
  if (!contents.ok()) return contents.status();
  return ParseCorpus(*contents, path);
}

absl::Status SaveCorpus(const std::string& path,
                        std::span<const Document> docs) {
  std::vector<nlohmann::json> lines(docs.begin(), docs.end());
  return WriteFileAtomic(path, SerializeJsonLines(lines));
}

Document TruncateDoc(const Document& doc, size_t max_words) {
  const std::string& text = doc.text;
  size_t words = 0;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsAsciiSpace(text[i])) ++i;
    if (i == text.size()) break;
    while (i < text.size() && !IsAsciiSpace(text[i])) ++i;
    if (++words == max_words) break;
  }
  Document out = doc;
  if (words == max_words && i < text.size()) {
    // Only cut when another word follows; trailing whitespace stays put.
    size_t j = i;
    while (j < text.size() && IsAsciiSpace(text[j])) ++j;
    if (j < text.size()) out.text = text.substr(0, i);
  }
  return out;
}

absl::StatusOr<CorpusSplits> SplitCorpus(std::span<const Document> docs,
                                         const SplitSpec& spec) {
  const size_t needed = spec.train + spec.validation + spec.test;
  if (needed > docs.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("split needs ", needed, " documents but the corpus has ",
                     docs.size()));
  }
  std::vector<size_t> order(docs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  CorpusSplits splits;
  size_t k = 0;
  for (size_t i = 0; i < spec.train; ++i) splits.train.push_back(docs[order[k++]]);
  for (size_t i = 0; i < spec.validation; ++i) {
    splits.validation.push_back(docs[order[k++]]);
  }
  for (size_t i = 0; i < spec.test; ++i) splits.test.push_back(docs[order[k++]]);
  return splits;
}

}  // namespace dprecon
