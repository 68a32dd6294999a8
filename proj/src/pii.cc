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

#include "dprecon/pii.h"

#include "httplib.h"
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>
#include <regex>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "dprecon/io.h"
#include "dprecon/text_util.h"

namespace dprecon {
namespace {

constexpr std::array<std::string_view, 18> kClassNames = {
    "cardinal", "date",    "event", "fac",     "gpe",     "language",
    "law",      "loc",     "money", "norp",    "ordinal", "org",
    "percent",  "person",  "product", "quantity", "time",  "work_of_art",
};

bool IsWordByte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80 || c == '_';
}

bool AtWordBoundaries(std::string_view text, size_t start, size_t end) {
  const bool left =
      start == 0 || !IsWordByte(static_cast<unsigned char>(text[start - 1]));
  const bool right =
      end >= text.size() || !IsWordByte(static_cast<unsigned char>(text[end]));
  return left && right;
}

struct Candidate {
  size_t start;
  size_t end;
  PiiClass cls;
  int rank;
};

struct RegexRule {
  PiiClass cls;
  std::regex pattern;
};

const std::vector<RegexRule>& RegexRules() {
  static const std::vector<RegexRule>* rules = [] {
    const auto flags = std::regex::ECMAScript | std::regex::icase;
    const std::string month =
        "(?:january|february|march|april|may|june|july|august|september|"
        "october|november|december|jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|"
        "nov|dec)\\.?";
    const std::string number = "\\d{1,3}(?:,\\d{3})+(?:\\.\\d+)?|\\d+(?:\\.\\d+)?";
    auto* r = new std::vector<RegexRule>;
    auto add = [&](PiiClass cls, const std::string& re) {
      r->push_back({cls, std::regex(re, flags)});
    };
    add(PiiClass::kTime,
        "\\b\\d{1,2}:\\d{2}(?::\\d{2})?(?:\\s?[ap]\\.?m\\b\\.?)?");
    add(PiiClass::kTime, "\\b\\d{1,2}\\s?[ap]\\.?m\\b\\.?");
    add(PiiClass::kDate, "\\b\\d{1,2}(?:st|nd|rd|th)?\\s+" + month +
                             "(?:\\s*,?\\s*\\d{4})?\\b");
    add(PiiClass::kDate, "\\b" + month +
                             "\\s+\\d{1,2}(?:st|nd|rd|th)?(?:\\s*,?\\s*\\d{4})?\\b");
    add(PiiClass::kDate, "\\b\\d{4}\\s+" + month + "(?:\\s+\\d{1,2})?\\b");
    add(PiiClass::kDate, "\\b" + month + "\\s+\\d{4}\\b");
    add(PiiClass::kDate, "\\b\\d{4}-\\d{2}-\\d{2}\\b");
    add(PiiClass::kDate, "\\b\\d{1,2}/\\d{1,2}/\\d{2,4}\\b");
    add(PiiClass::kDate,
        "\\b(?:monday|tuesday|wednesday|thursday|friday|saturday|sunday)\\b");
    add(PiiClass::kDate, "\\b(?:1\\d{3}|20\\d{2})s?\\b");
    add(PiiClass::kMoney, "(?:US\\$|\\$|\u20ac|\u00a3|\u00a5)\\s?(?:" + number +
                              ")(?:\\s?(?:million|billion|thousand|trillion|"
                              "bn|m|k)\\b)?");
    add(PiiClass::kMoney, "\\b(?:" + number +
                              ")\\s?(?:million\\s|billion\\s)?(?:dollars|euros|"
                              "pounds|yen|usd|eur|gbp)\\b");
    add(PiiClass::kPercent, "\\b(?:" + number + ")\\s?(?:%|percent\\b|per cent\\b)");
    add(PiiClass::kQuantity,
        "\\b(?:" + number +
            ")\\s?(?:square\\s+)?(?:kilometres|kilometers|kilometre|kilometer|"
            "metres|meters|metre|meter|miles|mile|km|kg|kilograms|kilogram|"
            "grams|gram|tonnes|tons|tonne|ton|feet|foot|ft|inches|inch|cm|mm|"
            "litres|liters|litre|liter|acres|acre|hectares|hectare|lb|lbs)\\b");
    add(PiiClass::kOrdinal, "\\b\\d+(?:st|nd|rd|th)\\b");
    add(PiiClass::kOrdinal,
        "\\b(?:first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|"
        "tenth|eleventh|twelfth|thirteenth|fourteenth|fifteenth|twentieth|"
        "hundredth|thousandth)\\b");
    add(PiiClass::kCardinal, "\\b(?:" + number + ")\\b");
    add(PiiClass::kCardinal,
        "\\b(?:one|two|three|four|five|six|seven|eight|nine|ten|eleven|"
        "twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|"
        "nineteen|twenty|thirty|forty|fifty|sixty|seventy|eighty|ninety|"
        "hundred|thousand|million|billion)\\b");
    return r;
  }();
  return *rules;
}

// Greedy acceptance in candidate order; returns spans sorted by start.
std::vector<PiiSpan> Resolve(std::string_view text,
                             std::vector<Candidate> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.rank != b.rank) return a.rank < b.rank;
                     return a.start < b.start;
                   });
  std::vector<Candidate> accepted;
  for (const Candidate& c : candidates) {
    const bool overlaps = std::any_of(
        accepted.begin(), accepted.end(), [&c](const Candidate& a) {
          return c.start < a.end && a.start < c.end;
        });
    if (!overlaps) accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Candidate& a, const Candidate& b) {
              return a.start < b.start;
            });
  std::vector<PiiSpan> spans;
  spans.reserve(accepted.size());
  for (const Candidate& c : accepted) {
    spans.push_back({std::string(text.substr(c.start, c.end - c.start)), c.cls,
                     c.start, c.end});
  }
  return spans;
}

bool IsStrippable(UChar32 c) {
  return u_ispunct(c) || u_isUWhiteSpace(c);
}

std::string StripEdges(const std::string& s) {
  int32_t begin = 0;
  int32_t end = static_cast<int32_t>(s.size());
  while (begin < end) {
    int32_t next = begin;
    UChar32 c;
    U8_NEXT(s.data(), next, end, c);
    if (c < 0 || !IsStrippable(c)) break;
    begin = next;
  }
  while (end > begin) {
    int32_t prev = end;
    UChar32 c;
    U8_PREV(s.data(), begin, prev, c);
    if (c < 0 || !IsStrippable(c)) break;
    end = prev;
  }
  return s.substr(static_cast<size_t>(begin),
                  static_cast<size_t>(end - begin));
}

std::string CollapseWhitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  int32_t i = 0;
  const int32_t n = static_cast<int32_t>(s.size());
  while (i < n) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s.data(), i, n, c);
    if (c >= 0 && u_isUWhiteSpace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out.append(s.substr(static_cast<size_t>(start),
                        static_cast<size_t>(i - start)));
  }
  return out;
}

absl::StatusOr<nlohmann::json> JsonFromPathOrInline(const nlohmann::json& v) {
  if (v.is_string()) {
    absl::StatusOr<std::string> contents = ReadFile(v.get<std::string>());
    if (!contents.ok()) return contents.status();
    nlohmann::json j = nlohmann::json::parse(*contents, nullptr, false);
    if (j.is_discarded()) {
      return absl::InvalidArgumentError(
          absl::StrCat(v.get<std::string>(), " is not valid JSON"));
    }
    return j;
  }
  return v;
}

}  // namespace

std::string_view PiiClassName(PiiClass cls) {
  return kClassNames[static_cast<size_t>(cls)];
}

absl::StatusOr<PiiClass> ParsePiiClass(std::string_view name) {
  for (PiiClass cls : kAllPiiClasses) {
    if (PiiClassName(cls) == name) return cls;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown PII class '", std::string(name), "'"));
}

std::string NormalizePiiText(std::string_view surface) {
  std::string s = NfkcUtf8(ToLowerUtf8(NfkcUtf8(surface)));
  return StripEdges(CollapseWhitespace(s));
}

PiiEntry NormalizePii(const PiiSpan& span) {
  return {span.cls, NormalizePiiText(span.surface)};
}

PiiSet ToPiiSet(std::span<const PiiSpan> spans) {
  PiiSet set;
  for (const PiiSpan& span : spans) {
    PiiEntry entry = NormalizePii(span);
    if (!entry.second.empty()) set.insert(std::move(entry));
  }
  return set;
}

absl::StatusOr<Gazetteer> ParseGazetteer(const nlohmann::json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("gazetteer must be a JSON object");
  }
  Gazetteer gazetteer;
  for (const auto& [name, phrases] : j.items()) {
    absl::StatusOr<PiiClass> cls = ParsePiiClass(name);
    if (!cls.ok()) return cls.status();
    if (!phrases.is_array()) {
      return absl::InvalidArgumentError(
          absl::StrCat("gazetteer class '", name, "' must map to an array"));
    }
    for (const nlohmann::json& p : phrases) {
      if (!p.is_string() || p.get_ref<const std::string&>().empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "gazetteer class '", name, "' has a non-string or empty entry"));
      }
      gazetteer[*cls].push_back(p.get<std::string>());
    }
  }
  return gazetteer;
}

absl::StatusOr<Gazetteer> LoadGazetteer(const std::string& path) {
  absl::StatusOr<nlohmann::json> j = JsonFromPathOrInline(path);
  if (!j.ok()) return j.status();
  return ParseGazetteer(*j);
}

RuleTagger::RuleTagger(Gazetteer gazetteer) : gazetteer_(std::move(gazetteer)) {
  for (const auto& [cls, phrases] : gazetteer_) {
    for (const std::string& p : phrases) phrases_.emplace_back(p, cls);
  }
  std::stable_sort(phrases_.begin(), phrases_.end(),
                   [](const auto& a, const auto& b) {
                     return a.first.size() > b.first.size();
                   });
  for (size_t k = 0; k < phrases_.size(); ++k) {
    const std::string& phrase = phrases_[k].first;
    by_length_[phrase.size()][absl::AsciiStrToLower(phrase)].push_back(
        static_cast<int>(k));
  }
}

absl::StatusOr<TagResult> RuleTagger::Tag(std::string_view text) const {
  std::vector<Candidate> candidates;
  // Gazetteer phrases, longest first: rank by descending length.
  const std::string lowered = absl::AsciiStrToLower(std::string(text));
  for (size_t pos = 0; pos < text.size(); ++pos) {
    if (pos > 0 && IsWordByte(static_cast<unsigned char>(text[pos - 1]))) {
      continue;
    }
    for (const auto& [length, phrases] : by_length_) {
      if (pos + length > text.size()) break;
      if (!AtWordBoundaries(text, pos, pos + length)) continue;
      auto it = phrases.find(lowered.substr(pos, length));
      if (it == phrases.end()) continue;
      for (int k : it->second) {
        candidates.push_back({pos, pos + length, phrases_[k].second, k});
      }
    }
  }
  const int base = static_cast<int>(phrases_.size());
  const std::vector<RegexRule>& rules = RegexRules();
  const std::string owned(text);
  for (size_t r = 0; r < rules.size(); ++r) {
    for (auto it = std::sregex_iterator(owned.begin(), owned.end(),
                                        rules[r].pattern);
         it != std::sregex_iterator(); ++it) {
      const size_t start = static_cast<size_t>(it->position());
      const size_t end = start + static_cast<size_t>(it->length());
      if (end > start) {
        candidates.push_back(
            {start, end, rules[r].cls, base + static_cast<int>(r)});
      }
    }
  }
  TagResult result;
  result.spans = Resolve(text, std::move(candidates));
  return result;
}

nlohmann::json RuleTagger::Describe() const {
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [cls, phrases] : gazetteer_) {
    classes[std::string(PiiClassName(cls))] = phrases.size();
  }
  std::string digest_input;
  for (const auto& [phrase, cls] : phrases_) {
    absl::StrAppend(&digest_input, std::string(PiiClassName(cls)), "\t", phrase, "\n");
  }
  return {{"type", "rules"},
          {"gazetteer_sizes", classes},
          {"gazetteer_sha256", Sha256Hex(digest_input)}};
}

absl::StatusOr<LabelMap> ParseLabelMap(const nlohmann::json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("label map must be a JSON object");
  }
  LabelMap labels;
  for (const auto& [label, name] : j.items()) {
    if (!name.is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat("label '", label, "' must map to a class name"));
    }
    absl::StatusOr<PiiClass> cls = ParsePiiClass(name.get<std::string>());
    if (!cls.ok()) return cls.status();
    labels.emplace(label, *cls);
  }
  return labels;
}

HttpNerTagger::HttpNerTagger(std::string url, LabelMap labels)
    : url_(std::move(url)), labels_(std::move(labels)) {}

absl::StatusOr<TagResult> HttpNerTagger::MapResponse(
    std::string_view text, std::string_view body) const {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("entities") ||
      !j["entities"].is_array()) {
    return absl::DataLossError(
        "mapping: NER response lacks an 'entities' array");
  }
  TagResult result;
  std::vector<Candidate> candidates;
  for (const nlohmann::json& e : j["entities"]) {
    if (!e.is_object() || !e.contains("label") || !e["label"].is_string() ||
        !e.contains("start") || !e["start"].is_number_unsigned() ||
        !e.contains("end") || !e["end"].is_number_unsigned()) {
      return absl::DataLossError("mapping: malformed entity in NER response");
    }
    const size_t start = e["start"].get<size_t>();
    const size_t end = e["end"].get<size_t>();
    if (start >= end || end > text.size()) {
      return absl::DataLossError(absl::StrCat(
          "mapping: entity offsets [", start, ", ", end, ") out of range"));
    }
    auto label = labels_.find(e["label"].get<std::string>());
    if (label == labels_.end()) {
      ++result.dropped_unknown_labels;
      continue;
    }
    candidates.push_back({start, end, label->second, 0});
  }
  result.spans = Resolve(text, std::move(candidates));
  return result;
}

absl::StatusOr<TagResult> HttpNerTagger::Tag(std::string_view text) const {
  // Split "http://host:port/path" into client base and request path.
  const size_t scheme = url_.find("://");
  const size_t path_start =
      url_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  const std::string base =
      path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : url_.substr(path_start);
  httplib::Client client(base);
  nlohmann::json request = {{"text", text}};
  httplib::Result response = client.Post(
      path,
      request.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace),
      "application/json");
  if (!response) {
    return absl::UnavailableError(absl::StrCat(
        "transport: NER service ", url_, ": ",
        httplib::to_string(response.error())));
  }
  if (response->status != 200) {
    return absl::UnavailableError(absl::StrCat(
        "transport: NER service returned HTTP ", response->status));
  }
  return MapResponse(text, response->body);
}

nlohmann::json HttpNerTagger::Describe() const {
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [label, cls] : labels_) {
    labels[label] = PiiClassName(cls);
  }
  return {{"type", "external"}, {"url", url_}, {"label_map", labels}};
}

absl::StatusOr<std::vector<PiiSpan>> ExtractPii(std::string_view text,
                                                const PiiTagger& tagger) {
  absl::StatusOr<TagResult> result = tagger.Tag(text);
  if (!result.ok()) return result.status();
  return std::move(result->spans);
}

absl::StatusOr<std::unique_ptr<PiiTagger>> TaggerFromConfig(
    const nlohmann::json& config) {
  const std::string type = config.value("type", std::string("rules"));
  if (type == "rules") {
    Gazetteer gazetteer;
    if (auto g = config.find("gazetteer"); g != config.end() && !g->is_null()) {
      absl::StatusOr<nlohmann::json> j = JsonFromPathOrInline(*g);
      if (!j.ok()) return j.status();
      absl::StatusOr<Gazetteer> parsed = ParseGazetteer(*j);
      if (!parsed.ok()) return parsed.status();
      gazetteer = *std::move(parsed);
    }
    return std::make_unique<RuleTagger>(std::move(gazetteer));
  }
  if (type == "external") {
    const std::string url = config.value("url", std::string());
    if (url.empty()) {
      return absl::InvalidArgumentError("external tagger needs a url");
    }
    auto lm = config.find("label_map");
    if (lm == config.end()) {
      return absl::InvalidArgumentError("external tagger needs a label_map");
    }
    absl::StatusOr<nlohmann::json> j = JsonFromPathOrInline(*lm);
    if (!j.ok()) return j.status();
    absl::StatusOr<LabelMap> labels = ParseLabelMap(*j);
    if (!labels.ok()) return labels.status();
    return std::make_unique<HttpNerTagger>(url, *std::move(labels));
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown tagger type '", type, "'"));
}

}  // namespace dprecon
