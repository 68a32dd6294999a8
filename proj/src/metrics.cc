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

#include "dprecon/metrics.h"

#include <algorithm>
#include <functional>
#include <iterator>
#include <set>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"

namespace dprecon {
namespace {

PiiSet Difference(const PiiSet& a, const PiiSet& b) {
  PiiSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(out, out.end()));
  return out;
}

PiiSet Intersection(const PiiSet& a, const PiiSet& b) {
  PiiSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

class MeanAccumulator {
 public:
  void Add(const std::optional<double>& v) {
    if (!v) return;
    sum_ += *v;
    ++n_;
  }
  MetricSummary Summary(double scale) const {
    MetricSummary s;
    s.n_defined = n_;
    if (n_ > 0) s.mean = scale * sum_ / static_cast<double>(n_);
    return s;
  }

 private:
  double sum_ = 0.0;
  int64_t n_ = 0;
};

nlohmann::json SummaryJson(const MetricSummary& s) {
  nlohmann::json j = {{"n_defined", s.n_defined}};
  j["mean"] = s.mean ? nlohmann::json(*s.mean) : nlohmann::json(nullptr);
  return j;
}

MetricSummary SummaryFromJson(const nlohmann::json& j) {
  MetricSummary s;
  s.n_defined = j.at("n_defined").get<int64_t>();
  if (!j.at("mean").is_null()) s.mean = j.at("mean").get<double>();
  return s;
}

std::optional<double> OptionalDouble(const nlohmann::json& j,
                                     const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

DocMetrics ComputeDocMetrics(const PiiSet& original, const PiiSet& sanitized,
                             const PiiSet& reconstructed) {
  const PiiSet hits =
      Difference(Intersection(original, reconstructed), sanitized);
  const PiiSet removed = Difference(original, sanitized);
  const PiiSet novel = Difference(reconstructed, sanitized);

  DocMetrics m;
  m.counts.original = static_cast<int64_t>(original.size());
  m.counts.sanitized = static_cast<int64_t>(sanitized.size());
  m.counts.reconstructed = static_cast<int64_t>(reconstructed.size());
  m.counts.hits = static_cast<int64_t>(hits.size());
  m.counts.removed = static_cast<int64_t>(removed.size());
  m.counts.novel = static_cast<int64_t>(novel.size());
  m.succ = hits.empty() ? 0 : 1;
  if (m.counts.removed > 0) {
    m.recall = static_cast<double>(m.counts.hits) /
               static_cast<double>(m.counts.removed);
  }
  if (m.counts.novel > 0) {
    m.precision = static_cast<double>(m.counts.hits) /
                  static_cast<double>(m.counts.novel);
  }
  return m;
}

PiiSet RestrictToClass(const PiiSet& set, PiiClass cls) {
  PiiSet out;
  for (const PiiEntry& e : set) {
    if (e.first == cls) out.insert(e);
  }
  return out;
}

absl::StatusOr<CorpusReport> Aggregate(
    std::span<const DocMetrics> docs,
    std::span<const std::optional<int>> scores) {
  if (docs.empty()) {
    return absl::InvalidArgumentError("cannot aggregate zero documents");
  }
  if (!scores.empty() && scores.size() != docs.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("got ", scores.size(), " scores for ", docs.size(),
                     " documents"));
  }
  MeanAccumulator succ, recall, precision, score;
  for (const DocMetrics& d : docs) {
    succ.Add(static_cast<double>(d.succ));
    recall.Add(d.recall);
    precision.Add(d.precision);
  }
  for (const std::optional<int>& s : scores) {
    if (s) score.Add(static_cast<double>(*s));
  }
  CorpusReport report;
  report.n_docs = static_cast<int64_t>(docs.size());
  report.succ = succ.Summary(100.0);
  report.recall = recall.Summary(100.0);
  report.precision = precision.Summary(100.0);
  report.score = score.Summary(1.0);
  return report;
}

std::map<PiiClass, ClassMetrics> PerClassBreakdown(
    std::span<const PiiTriple> docs) {
  std::map<PiiClass, ClassMetrics> out;
  for (PiiClass cls : kAllPiiClasses) {
    MeanAccumulator recall, precision;
    for (const PiiTriple& t : docs) {
      const DocMetrics m = ComputeDocMetrics(
          RestrictToClass(t.original, cls), RestrictToClass(t.sanitized, cls),
          RestrictToClass(t.reconstructed, cls));
      recall.Add(m.recall);
      precision.Add(m.precision);
    }
    ClassMetrics c{recall.Summary(100.0), precision.Summary(100.0)};
    if (c.recall.n_defined > 0 || c.precision.n_defined > 0) out[cls] = c;
  }
  return out;
}

void to_json(nlohmann::json& j, const DocMetrics& m) {
  j = {{"succ", m.succ},
       {"recall", m.recall ? nlohmann::json(*m.recall) : nullptr},
       {"precision", m.precision ? nlohmann::json(*m.precision) : nullptr},
       {"counts",
        {{"original", m.counts.original},
         {"sanitized", m.counts.sanitized},
         {"reconstructed", m.counts.reconstructed},
         {"hits", m.counts.hits},
         {"removed", m.counts.removed},
         {"novel", m.counts.novel}}}};
}

void from_json(const nlohmann::json& j, DocMetrics& m) {
  m.succ = j.at("succ").get<int>();
  m.recall = OptionalDouble(j, "recall");
  m.precision = OptionalDouble(j, "precision");
  const nlohmann::json& c = j.at("counts");
  m.counts.original = c.at("original").get<int64_t>();
  m.counts.sanitized = c.at("sanitized").get<int64_t>();
  m.counts.reconstructed = c.at("reconstructed").get<int64_t>();
  m.counts.hits = c.at("hits").get<int64_t>();
  m.counts.removed = c.at("removed").get<int64_t>();
  m.counts.novel = c.at("novel").get<int64_t>();
}

void to_json(nlohmann::json& j, const CorpusReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [cls, m] : r.per_class) {
    per_class[std::string(PiiClassName(cls))] = {
        {"recall", SummaryJson(m.recall)},
        {"precision", SummaryJson(m.precision)}};
  }
  j = {{"model", r.model},
       {"mechanism", r.mechanism},
       {"budget", r.budget},
       {"n_docs", r.n_docs},
       {"n_errors", r.n_errors},
       {"succ", SummaryJson(r.succ)},
       {"recall", SummaryJson(r.recall)},
       {"precision", SummaryJson(r.precision)},
       {"score", SummaryJson(r.score)},
       {"per_class", per_class},
       {"undefined_policy", r.undefined_policy}};
}

absl::StatusOr<CorpusReport> CorpusReportFromJson(const nlohmann::json& j) {
  try {
    CorpusReport r;
    r.model = j.at("model").get<std::string>();
    r.mechanism = j.at("mechanism").get<std::string>();
    r.budget = j.at("budget").get<double>();
    r.n_docs = j.at("n_docs").get<int64_t>();
    r.n_errors = j.value("n_errors", int64_t{0});
    r.succ = SummaryFromJson(j.at("succ"));
    r.recall = SummaryFromJson(j.at("recall"));
    r.precision = SummaryFromJson(j.at("precision"));
    r.score = SummaryFromJson(j.at("score"));
    for (const auto& [name, m] : j.at("per_class").items()) {
      absl::StatusOr<PiiClass> cls = ParsePiiClass(name);
      if (!cls.ok()) return cls.status();
      r.per_class[*cls] = {SummaryFromJson(m.at("recall")),
                           SummaryFromJson(m.at("precision"))};
    }
    r.undefined_policy = j.value("undefined_policy", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed report: ", e.what()));
  }
}

std::string FormatMetric(const std::optional<double>& value) {
  if (!value) return "";
  return absl::StrFormat("%.2f", *value);
}

std::string ReportCsvHeader() {
  return "model,mechanism,budget,n_docs,n_errors,succ,succ_n,recall,recall_n,"
         "precision,precision_n,score,score_n";
}

std::string ReportCsvRow(const CorpusReport& r) {
  return absl::StrJoin(
      {CsvField(r.model), CsvField(r.mechanism), absl::StrFormat("%g", r.budget),
       absl::StrCat(r.n_docs), absl::StrCat(r.n_errors),
       FormatMetric(r.succ.mean), absl::StrCat(r.succ.n_defined),
       FormatMetric(r.recall.mean), absl::StrCat(r.recall.n_defined),
       FormatMetric(r.precision.mean), absl::StrCat(r.precision.n_defined),
       FormatMetric(r.score.mean), absl::StrCat(r.score.n_defined)},
      ",");
}

std::string ReportsToCsv(std::span<const CorpusReport> reports) {
  std::string out = ReportCsvHeader() + "\n";
  for (const CorpusReport& r : reports) absl::StrAppend(&out, ReportCsvRow(r), "\n");
  return out;
}

std::string RenderReportTables(std::span<const CorpusReport> reports) {
  std::map<std::string, std::vector<const CorpusReport*>> by_mechanism;
  for (const CorpusReport& r : reports) by_mechanism[r.mechanism].push_back(&r);
  std::string out;
  for (const auto& [mechanism, group] : by_mechanism) {
    const std::string symbol = mechanism == "word_level" ? "eps" : "T";
    std::set<double, std::greater<>> budgets;
    std::map<std::string, std::map<double, const CorpusReport*>> rows;
    for (const CorpusReport* r : group) {
      budgets.insert(r->budget);
      rows[r->model][r->budget] = r;
    }
    if (!out.empty()) out += "\n";
    absl::StrAppend(&out, "### ", mechanism, "\n\n| model |");
    std::string rule = "|---|";
    for (double b : budgets) {
      const std::string label = absl::StrFormat("%s=%g", symbol, b);
      absl::StrAppend(&out, " ", label, " Succ | ", label, " Recall | ", label,
                      " Prec | ", label, " Score |");
      rule += "---:|---:|---:|---:|";
    }
    absl::StrAppend(&out, "\n", rule, "\n");
    for (const auto& [model, cells] : rows) {
      absl::StrAppend(&out, "| ", model, " |");
      for (double b : budgets) {
        auto it = cells.find(b);
        if (it == cells.end()) {
          out += " | | | |";
          continue;
        }
        const CorpusReport& r = *it->second;
        absl::StrAppend(&out, " ", FormatMetric(r.succ.mean), " | ",
                        FormatMetric(r.recall.mean), " | ",
                        FormatMetric(r.precision.mean), " | ",
                        FormatMetric(r.score.mean), " |");
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace dprecon
