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

#ifndef DPRECON_METRICS_H_
#define DPRECON_METRICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dprecon/pii.h"
#include "json.hpp"

namespace dprecon {

// With C the original's PII set, C~ the sanitized text's and C^ the
// reconstruction's:
//   hits      = |(C ∩ C^) − C~|
//   removed   = |C − C~|
//   novel     = |C^ − C~|
struct DocCounts {
  int64_t original = 0;
  int64_t sanitized = 0;
  int64_t reconstructed = 0;
  int64_t hits = 0;
  int64_t removed = 0;
  int64_t novel = 0;
};

// recall = hits / removed, precision = hits / novel, succ = [hits > 0].
// A ratio with a zero denominator is nullopt.
struct DocMetrics {
  int succ = 0;
  std::optional<double> recall;
  std::optional<double> precision;
  DocCounts counts;
};

DocMetrics ComputeDocMetrics(const PiiSet& original, const PiiSet& sanitized,
                             const PiiSet& reconstructed);

PiiSet RestrictToClass(const PiiSet& set, PiiClass cls);

struct PiiTriple {
  PiiSet original;
  PiiSet sanitized;
  PiiSet reconstructed;
};

// Mean over the documents where the value is defined.
struct MetricSummary {
  std::optional<double> mean;
  int64_t n_defined = 0;
};

struct ClassMetrics {
  MetricSummary recall;     // percent
  MetricSummary precision;  // percent
};

inline constexpr char kUndefinedPolicy[] =
    "ratios with an empty denominator are excluded from means; n_defined "
    "counts the documents that contributed";

struct CorpusReport {
  std::string model;
  std::string mechanism;
  double budget = 0.0;
  int64_t n_docs = 0;
  int64_t n_errors = 0;
  MetricSummary succ;       // percent, over every evaluated document
  MetricSummary recall;     // percent
  MetricSummary precision;  // percent
  MetricSummary score;      // 0..10
  std::map<PiiClass, ClassMetrics> per_class;
  std::string undefined_policy = kUndefinedPolicy;
};

// Aggregates per-document metrics. `scores` is either empty or parallel to
// `docs`. Empty input is an error.
absl::StatusOr<CorpusReport> Aggregate(
    std::span<const DocMetrics> docs,
    std::span<const std::optional<int>> scores = {});

// Recall and precision restricted to each class's subsets, averaged over the
// documents where the class ratio is defined. Classes with no defined ratio
// are omitted.
std::map<PiiClass, ClassMetrics> PerClassBreakdown(
    std::span<const PiiTriple> docs);

void to_json(nlohmann::json& j, const DocMetrics& m);
void from_json(const nlohmann::json& j, DocMetrics& m);
void to_json(nlohmann::json& j, const CorpusReport& r);
absl::StatusOr<CorpusReport> CorpusReportFromJson(const nlohmann::json& j);

// Fixed-point with two decimals; empty for an undefined value.
std::string FormatMetric(const std::optional<double>& value);

// One row per model x mechanism x budget.
std::string ReportCsvHeader();
std::string ReportCsvRow(const CorpusReport& report);
std::string ReportsToCsv(std::span<const CorpusReport> reports);

// Markdown tables, one per mechanism: rows are models, column groups are
// budgets in descending order, each with Succ, Recall, Prec and Score.
// Input order does not matter.
std::string RenderReportTables(std::span<const CorpusReport> reports);

}  // namespace dprecon

#endif  // DPRECON_METRICS_H_
