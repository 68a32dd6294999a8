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

// Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion and exits
// nonzero when any criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "boost/math/distributions/chi_squared.hpp"
#include "dprecon/attacks.h"
#include "dprecon/cli.h"
#include "dprecon/corpus.h"
#include "dprecon/embedding_store.h"
#include "dprecon/io.h"
#include "dprecon/judge.h"
#include "dprecon/metrics.h"
#include "dprecon/mock_models.h"
#include "dprecon/parallel.h"
#include "dprecon/pii.h"
#include "dprecon/rng.h"
#include "dprecon/sentence_dp.h"
#include "dprecon/text_util.h"
#include "dprecon/word_dp.h"
#include "test_fixtures.h"

namespace dprecon {
namespace {

namespace fs = std::filesystem;
using testing::MakePlantedCorpus;
using testing::PlantedCorpus;
using testing::RandomTable;

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict = Verdict::kFail;
  std::string detail;
};

Outcome Pass(std::string detail) { return {Verdict::kPass, std::move(detail)}; }
Outcome Fail(std::string detail) { return {Verdict::kFail, std::move(detail)}; }
Outcome Skip(std::string detail) { return {Verdict::kSkip, std::move(detail)}; }
Outcome FailStatus(const absl::Status& s) { return Fail(s.ToString()); }

int Threads() {
  return std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, 8);
}

std::string Percent(const std::optional<double>& v) {
  return v ? absl::StrFormat("%.2f", *v) : "undef";
}

// Metric-DP ratio bound on a 2-D toy vocabulary.
Outcome Criterion1() {
  constexpr double kEpsilon = 1.0;
  constexpr int kDocs = 1000;
  constexpr int kWordsPerDoc = 1000;
  constexpr double kSamples = static_cast<double>(kDocs) * kWordsPerDoc;
  const std::vector<EmbeddingTable::Row> rows = {{"alpha", {0.0f, 0.0f}},
                                                 {"bravo", {1.0f, 0.0f}},
                                                 {"charlie", {0.0f, 1.0f}},
                                                 {"delta", {1.5f, 1.5f}},
                                                 {"echo", {-1.0f, 0.5f}}};
  absl::StatusOr<EmbeddingTable> table = EmbeddingTable::FromRows(rows, 2);
  if (!table.ok()) return FailStatus(table.status());
  const size_t n = table->size();

  // counts[x][o]: how often input word x came out as word o.
  std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
  for (size_t x = 0; x < n; ++x) {
    std::string text;
    for (int k = 0; k < kWordsPerDoc; ++k) {
      absl::StrAppend(&text, k == 0 ? "" : " ", table->word(x));
    }
    std::vector<std::string> ids;
    for (int d = 0; d < kDocs; ++d) ids.push_back(absl::StrCat(table->word(x), "_", d));
    std::vector<DocumentRef> refs;
    for (const std::string& id : ids) refs.push_back({id, text});
    WordDpConfig config{.epsilon = kEpsilon, .dim = 2, .seed = 101,
                        .search = SearchMode::kExactBruteForce};
    absl::StatusOr<std::vector<SanitizationRecord>> records =
        SanitizeWordLevelBatch(refs, *table, config, Threads());
    if (!records.ok()) return FailStatus(records.status());
    for (const SanitizationRecord& r : *records) {
      for (std::string_view w : SplitWhitespace(r.sanitized)) {
        std::optional<size_t> o = table->Find(w);
        if (!o) return Fail(absl::StrCat("output word '", std::string(w), "' not in vocabulary"));
        counts[x][*o] += 1.0;
      }
    }
  }

  double worst_z = -1e300;
  std::string worst;
  int checks = 0;
  for (size_t x = 0; x < n; ++x) {
    for (size_t x2 = 0; x2 < n; ++x2) {
      if (x == x2) continue;
      const auto a = table->vector(x);
      const auto b = table->vector(x2);
      const double d = std::hypot(static_cast<double>(a[0]) - b[0],
                                  static_cast<double>(a[1]) - b[1]);
      const double bound = std::exp(kEpsilon * d);
      for (size_t o = 0; o < n; ++o) {
        const double p = counts[x][o] / kSamples;
        const double q = counts[x2][o] / kSamples;
        const double diff = p - bound * q;
        const double sigma = std::sqrt(p * (1 - p) / kSamples +
                                       bound * bound * q * (1 - q) / kSamples);
        ++checks;
        if (sigma > 0) {
          const double z = diff / sigma;
          if (z > worst_z) {
            worst_z = z;
            worst = absl::StrFormat("Pr[%s->%s]=%.5f vs e^%.3f*Pr[%s->%s]=%.5f",
                                    table->word(x), table->word(o), p, d,
                                    table->word(x2), table->word(o), bound * q);
          }
        }
        if (diff > 3.0 * sigma + 1e-12) {
          return Fail(absl::StrFormat("violation beyond 3 sigma: %s (z=%.2f)", worst,
                                      diff / sigma));
        }
      }
    }
  }
  return Pass(absl::StrFormat("%d ratio checks at 1e6 samples per word; tightest z=%.2f (%s)",
                              checks, worst_z, worst));
}

// Mean Laplace noise norm is m / epsilon.
Outcome Criterion2() {
  constexpr int kDraws = 1000000;
  Rng rng(202);
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    absl::StatusOr<std::vector<double>> z = SampleLaplaceNoise(8.0, 50, rng);
    if (!z.ok()) return FailStatus(z.status());
    double norm2 = 0.0;
    for (double v : *z) norm2 += v * v;
    sum += std::sqrt(norm2);
  }
  const double mean = sum / kDraws;
  const std::string detail = absl::StrFormat("mean |z| = %.5f (target 6.25 +/- 0.01)", mean);
  return std::abs(mean - 6.25) <= 0.01 ? Pass(detail) : Fail(detail);
}

// Retention and memorizer recall/precision trends across the budget grid.
Outcome Criterion3() {
  const std::vector<double> budgets = {1, 4, 8, 12, 32};
  const EmbeddingTable table = RandomTable(
      {.words = 10000, .dim = 50, .seed = 303, .median_norm = 3.0, .norm_sigma = 1.0});
  const PlantedCorpus corpus = MakePlantedCorpus(1000, 10000, 3, 12, 304, false);
  RuleTagger tagger(corpus.gazetteer);
  std::vector<std::string> planted;
  for (const Document& d : corpus.docs) planted.push_back(d.text);
  LlmGateway gateway{GatewayOptions{}};
  gateway.RegisterModel("memorizer", std::make_shared<MemorizingTransport>(planted, 0.1));
  std::vector<DocumentRef> refs;
  for (const Document& d : corpus.docs) refs.push_back({d.id, d.text});

  std::vector<double> retention, recall, precision;
  std::vector<std::string> rows;
  for (double eps : budgets) {
    WordDpConfig config{.epsilon = eps, .dim = 50, .seed = 305};
    absl::StatusOr<std::vector<SanitizationRecord>> records =
        SanitizeWordLevelBatch(refs, table, config, Threads());
    if (!records.ok()) return FailStatus(records.status());
    double sum = 0.0;
    int defined = 0;
    for (const SanitizationRecord& r : *records) {
      if (std::optional<double> s = SelfRetention(r)) {
        sum += *s;
        ++defined;
      }
    }
    retention.push_back(defined > 0 ? sum / defined : 0.0);

    auto split = SplitDemos(*records, 1);
    if (!split.ok()) return FailStatus(split.status());
    BlackboxConfig bc;
    bc.prompt.model = "memorizer";
    bc.run.threads = Threads();
    absl::StatusOr<std::vector<AttackResult>> results =
        RunBlackboxAttack(split->second, split->first, gateway, tagger, bc);
    if (!results.ok()) return FailStatus(results.status());
    absl::StatusOr<CorpusReport> report = EvaluateResults(*results, tagger);
    if (!report.ok()) return FailStatus(report.status());
    // An undefined mean (no document with a defined ratio) counts as 0.
    recall.push_back(report->recall.mean.value_or(0.0));
    precision.push_back(report->precision.mean.value_or(0.0));
    rows.push_back(absl::StrFormat("eps=%g retention=%.4f recall=%s(n=%d) precision=%s(n=%d)",
                                   eps, retention.back(), Percent(report->recall.mean),
                                   report->recall.n_defined,
                                   Percent(report->precision.mean),
                                   report->precision.n_defined));
  }
  const std::string detail = absl::StrJoin(rows, "; ");
  for (size_t i = 1; i < budgets.size(); ++i) {
    if (!(retention[i] > retention[i - 1])) {
      return Fail(absl::StrCat("retention not strictly increasing: ", detail));
    }
    if (recall[i] < recall[i - 1] || precision[i] < precision[i - 1]) {
      return Fail(absl::StrCat("recall/precision decreased: ", detail));
    }
  }
  return Pass(detail);
}

// Accelerated nearest-neighbor search agrees with brute force.
Outcome Criterion4() {
  constexpr int kQueries = 10000;
  const EmbeddingTable table = RandomTable(
      {.words = 10000, .dim = 50, .seed = 404, .median_norm = 3.0, .norm_sigma = 1.0});
  const double budgets[] = {1, 4, 8, 12, 32};
  std::vector<std::vector<double>> queries(kQueries);
  Rng rng(405);
  std::uniform_int_distribution<size_t> row(0, table.size() - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 20.0);
  for (int i = 0; i < kQueries; ++i) {
    std::vector<double>& q = queries[i];
    if (i % 2 == 0) {
      // A word embedding plus sanitizer noise.
      const auto v = table.vector(row(rng));
      absl::StatusOr<std::vector<double>> z = SampleLaplaceNoise(budgets[i % 5], 50, rng);
      if (!z.ok()) return FailStatus(z.status());
      q.resize(50);
      for (int k = 0; k < 50; ++k) q[k] = v[k] + (*z)[k];
    } else {
      const double s = scale(rng);
      for (int k = 0; k < 50; ++k) q.push_back(s * gauss(rng));
    }
  }
  std::vector<int> mismatch(kQueries, 0);
  std::vector<std::string> errors(kQueries);
  ParallelFor(kQueries, Threads(), [&](size_t i) {
    absl::StatusOr<size_t> fast = NearestRow(table, queries[i], SearchMode::kAccelerated);
    absl::StatusOr<size_t> slow = NearestRow(table, queries[i], SearchMode::kExactBruteForce);
    if (!fast.ok() || !slow.ok()) {
      errors[i] = (!fast.ok() ? fast.status() : slow.status()).ToString();
      mismatch[i] = 1;
    } else if (*fast != *slow) {
      mismatch[i] = 1;
    }
  });
  int bad = 0;
  for (int i = 0; i < kQueries; ++i) {
    bad += mismatch[i];
    if (!errors[i].empty()) return Fail(errors[i]);
  }
  const std::string detail =
      absl::StrFormat("%d/%d queries agree with brute force", kQueries - bad, kQueries);
  return bad == 0 ? Pass(detail) : Fail(detail);
}

// Per-document metrics against membership counting.
Outcome Criterion5() {
  const PiiSet c = {{PiiClass::kPerson, "a"}, {PiiClass::kPerson, "b"},
                    {PiiClass::kPerson, "c"}};
  const PiiSet c_tilde = {{PiiClass::kPerson, "a"}};
  const PiiSet c_hat = {{PiiClass::kPerson, "a"}, {PiiClass::kPerson, "b"}};
  const DocMetrics hand = ComputeDocMetrics(c, c_tilde, c_hat);
  if (hand.recall != 0.5 || hand.precision != 1.0 || hand.succ != 1) {
    return Fail(absl::StrFormat("hand example gave recall=%s precision=%s succ=%d",
                                Percent(hand.recall), Percent(hand.precision), hand.succ));
  }

  std::vector<PiiEntry> universe;
  for (PiiClass cls : {PiiClass::kPerson, PiiClass::kGpe, PiiClass::kDate,
                       PiiClass::kOrg, PiiClass::kMoney}) {
    for (const char* s : {"a", "b", "c"}) universe.push_back({cls, s});
  }
  Rng rng(505);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int kTriples = 10000;
  for (int t = 0; t < kTriples; ++t) {
    const double pc = density(rng), pt = density(rng), ph = density(rng);
    PiiSet a, b, h;
    int hits = 0, removed = 0, novel = 0;
    for (const PiiEntry& e : universe) {
      const bool in_a = u(rng) < pc, in_b = u(rng) < pt, in_h = u(rng) < ph;
      if (in_a) a.insert(e);
      if (in_b) b.insert(e);
      if (in_h) h.insert(e);
      hits += in_a && in_h && !in_b;
      removed += in_a && !in_b;
      novel += in_h && !in_b;
    }
    const DocMetrics m = ComputeDocMetrics(a, b, h);
    const std::optional<double> recall =
        removed > 0 ? std::optional<double>(static_cast<double>(hits) / removed)
                    : std::nullopt;
    const std::optional<double> precision =
        novel > 0 ? std::optional<double>(static_cast<double>(hits) / novel)
                  : std::nullopt;
    if (m.succ != (hits > 0 ? 1 : 0) || m.recall != recall ||
        m.precision != precision || m.counts.hits != hits ||
        m.counts.removed != removed || m.counts.novel != novel) {
      return Fail(absl::StrCat("triple ", t, " disagrees with the oracle"));
    }
  }
  return Pass(absl::StrCat("hand example 0.5/1.0/1 and ", kTriples,
                           " random triples match exactly"));
}

// Constant logits over a 10-token vocabulary with no end-of-sequence token.
class FixedLogits : public LogitProvider {
 public:
  explicit FixedLogits(std::vector<double> logits) : logits_(std::move(logits)) {}
  size_t vocab_size() const override { return logits_.size(); }
  std::optional<int> eos_token() const override { return std::nullopt; }
  absl::StatusOr<std::vector<int>> Encode(std::string_view) override {
    return std::vector<int>{0};
  }
  absl::StatusOr<std::vector<double>> NextLogits(std::span<const int>) override {
    return logits_;
  }
  absl::StatusOr<std::string> Decode(std::span<const int> tokens) override {
    std::string out;
    out.reserve(tokens.size());
    for (int t : tokens) out += static_cast<char>('0' + t);
    return out;
  }

 private:
  std::vector<double> logits_;
};

// Temperature sampling over clipped logits matches the analytic softmax.
Outcome Criterion6() {
  const std::vector<double> both = {3.0, 4.0};
  absl::StatusOr<std::vector<double>> clipped = ClipLogits(both, 1.0);
  if (!clipped.ok()) return FailStatus(clipped.status());
  if ((*clipped)[0] != 0.6 || (*clipped)[1] != 0.8) {
    return Fail(absl::StrFormat("clip((3,4),1) = (%.17g, %.17g)", (*clipped)[0],
                                (*clipped)[1]));
  }

  const std::vector<double> logits = {2.0, -1.0, 0.5, 3.0, 0.0,
                                      -2.5, 1.5, -0.5, 1.0, 2.5};
  constexpr double kClip = 4.0;
  constexpr int kDraws = 100000;
  // Oracle: clip by hand, then exp(u / T) normalized.
  double norm = 0.0;
  for (double u : logits) norm += u * u;
  norm = std::sqrt(norm);
  std::vector<std::string> rows;
  bool ok = true;
  for (double t : {1.0, 1.5, 2.0}) {
    std::vector<double> expected(logits.size());
    double z = 0.0;
    for (size_t j = 0; j < logits.size(); ++j) {
      const double u = norm > kClip ? logits[j] * kClip / norm : logits[j];
      expected[j] = std::exp(u / t);
      z += expected[j];
    }
    FixedLogits provider(logits);
    SentenceDpConfig config{.temperature = t, .clip_bound = kClip, .max_tokens = kDraws,
                            .seed = 606};
    absl::StatusOr<SanitizationRecord> r =
        DpDecode(absl::StrCat("T", t), "x", provider, config);
    if (!r.ok()) return FailStatus(r.status());
    if (r->emitted_tokens != kDraws || r->sanitized.size() != kDraws) {
      return Fail(absl::StrCat("expected ", kDraws, " draws, got ", r->emitted_tokens));
    }
    std::vector<double> observed(logits.size(), 0.0);
    for (char c : r->sanitized) observed[c - '0'] += 1.0;
    double chi2 = 0.0;
    for (size_t j = 0; j < logits.size(); ++j) {
      const double e = kDraws * expected[j] / z;
      chi2 += (observed[j] - e) * (observed[j] - e) / e;
    }
    const boost::math::chi_squared dist(static_cast<double>(logits.size() - 1));
    const double p = boost::math::cdf(boost::math::complement(dist, chi2));
    rows.push_back(absl::StrFormat("T=%g chi2=%.2f p=%.3f", t, chi2, p));
    ok = ok && p > 0.01;
  }
  const std::string detail =
      absl::StrCat("clip((3,4),1)=(0.6,0.8) exactly; ", absl::StrJoin(rows, "; "));
  return ok ? Pass(detail) : Fail(detail);
}

// Hermetic end-to-end attack on planted documents.
Outcome Criterion7() {
  const EmbeddingTable table =
      RandomTable({.words = 1000, .dim = 50, .seed = 707, .median_norm = 1.0});
  // 50 targets plus one document used only as the demonstration.
  const PlantedCorpus corpus = MakePlantedCorpus(51, 1000, 3, 12, 708);
  RuleTagger tagger(corpus.gazetteer);
  std::vector<std::string> planted;
  std::vector<DocumentRef> refs;
  for (const Document& d : corpus.docs) {
    planted.push_back(d.text);
    refs.push_back({d.id, d.text});
  }
  absl::StatusOr<std::vector<SanitizationRecord>> records = SanitizeWordLevelBatch(
      refs, table, {.epsilon = 12, .dim = 50, .seed = 709}, Threads());
  if (!records.ok()) return FailStatus(records.status());
  const SanitizationRecord& demo = records->back();
  const std::vector<DemoPair> demos = {{demo.doc_id, demo.original, demo.sanitized}};
  const std::vector<SanitizationRecord> targets(records->begin(), records->end() - 1);

  LlmGateway gateway{GatewayOptions{}};
  gateway.RegisterModel("memorizer", std::make_shared<MemorizingTransport>(planted, 0.1));
  gateway.RegisterModel("echo", std::make_shared<EchoTransport>());
  std::map<std::string, CorpusReport> reports;
  for (const char* model : {"memorizer", "echo"}) {
    BlackboxConfig bc;
    bc.prompt.model = model;
    bc.run.threads = Threads();
    absl::StatusOr<std::vector<AttackResult>> results =
        RunBlackboxAttack(targets, demos, gateway, tagger, bc);
    if (!results.ok()) return FailStatus(results.status());
    absl::StatusOr<CorpusReport> report = EvaluateResults(*results, tagger);
    if (!report.ok()) return FailStatus(report.status());
    reports[model] = *report;
  }
  const CorpusReport& mem = reports["memorizer"];
  const CorpusReport& echo = reports["echo"];
  const std::string detail = absl::StrFormat(
      "memorizer: n=%d errors=%d Succ=%s Recall=%s (n=%d); echo: Succ=%s",
      mem.n_docs, mem.n_errors, Percent(mem.succ.mean), Percent(mem.recall.mean),
      mem.recall.n_defined, Percent(echo.succ.mean));
  const bool ok = mem.n_docs == 50 && mem.n_errors == 0 && mem.succ.mean == 100.0 &&
                  mem.recall.mean == 100.0 && mem.recall.n_defined == 50 &&
                  echo.succ.mean == 0.0 && echo.n_docs == 50;
  return ok ? Pass(detail) : Fail(detail);
}

// Re-running a recorded attack against a warm cache, with every endpoint
// unreachable, reproduces the result and report files byte for byte.
Outcome Criterion8() {
  const fs::path ws = fs::temp_directory_path() /
                      absl::StrCat("dprecon_acceptance_", getpid());
  fs::remove_all(ws);
  fs::create_directories(ws);
  auto path = [&ws](std::string_view name) { return (ws / name).string(); };
  const PlantedCorpus corpus = MakePlantedCorpus(30, 1000, 3, 12, 808);
  if (absl::Status s = SaveCorpus(path("corpus.jsonl"), corpus.docs); !s.ok()) {
    return FailStatus(s);
  }
  const EmbeddingTable table = RandomTable({.words = 1000, .seed = 809});
  if (absl::Status s = WriteFileAtomic(path("emb.txt"), testing::FormatEmbeddings(table));
      !s.ok()) {
    return FailStatus(s);
  }
  nlohmann::json gazetteer = nlohmann::json::object();
  for (const auto& [cls, phrases] : corpus.gazetteer) {
    gazetteer[std::string(PiiClassName(cls))] = phrases;
  }
  nlohmann::json config = {
      {"seed", 810},
      {"corpus", {{"path", path("corpus.jsonl")}}},
      {"embeddings", {{"path", path("emb.txt")}, {"dim", 50}}},
      {"tagger", {{"type", "rules"}, {"gazetteer", gazetteer}}},
      {"sanitize", {{"mechanism", "word_level"}, {"budget", 12}}},
      {"gateway",
       {{"cache_dir", path("cache")},
        {"models",
         {{"memorizer", {{"type", "mock_memorize"}, {"corpus", path("corpus.jsonl")}}},
          {"judge", {{"type", "mock_constant"}, {"reply", "Score: 6"}}}}}}},
      {"attack", {{"model", "memorizer"}, {"judge", {{"model", "judge"}}}}}};

  auto run = [&](const std::string& out) -> absl::Status {
    if (absl::Status s = WriteFileAtomic(path("config.json"), config.dump(2)); !s.ok()) {
      return s;
    }
    CliOptions opts;
    opts.command = "attack-blackbox";
    opts.config_path = path("config.json");
    opts.out = path(out);
    std::ostringstream log;
    return RunCommand(opts, log).status();
  };
  if (absl::Status s = run("first"); !s.ok()) return FailStatus(s);
  // Same logical models, now pointing at a closed port.
  const nlohmann::json dead = {{"type", "openai"},
                               {"base_url", "http://127.0.0.1:1"},
                               {"timeout_seconds", 2}};
  config["gateway"]["models"]["memorizer"] = dead;
  config["gateway"]["models"]["judge"] = dead;
  config["gateway"]["retry"] = {{"max_attempts", 1}};
  if (absl::Status s = run("second"); !s.ok()) return FailStatus(s);

  std::vector<std::string> rows;
  bool ok = true;
  for (const char* f : {"results.jsonl", "report.json"}) {
    absl::StatusOr<std::string> a = ReadFile(path(absl::StrCat("first/", f)));
    absl::StatusOr<std::string> b = ReadFile(path(absl::StrCat("second/", f)));
    if (!a.ok()) return FailStatus(a.status());
    if (!b.ok()) return FailStatus(b.status());
    const bool same = *a == *b;
    ok = ok && same;
    rows.push_back(absl::StrFormat("%s %s (%d bytes, sha256 %s)", f,
                                   same ? "identical" : "DIFFERS", a->size(),
                                   Sha256Hex(*a).substr(0, 12)));
  }
  fs::remove_all(ws);
  const std::string detail = absl::StrJoin(rows, "; ");
  return ok ? Pass(detail) : Fail(detail);
}

// Live check against a real chat endpoint; skipped unless configured.
//   DPRECON_LIVE_API_KEY_ENV  name of the variable holding the key
//                             (default OPENAI_API_KEY)
//   DPRECON_LIVE_EMBEDDINGS   GloVe-format embedding file
//   DPRECON_LIVE_EMBEDDINGS_DIM (default 50)
//   DPRECON_LIVE_BASE_URL     (default https://api.openai.com)
//   DPRECON_LIVE_MODEL        (default gpt-4o-mini)
Outcome Criterion9() {
  auto env = [](const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? std::string(v) : fallback;
  };
  const std::string key_env = env("DPRECON_LIVE_API_KEY_ENV", "OPENAI_API_KEY");
  if (env(key_env.c_str(), "").empty()) {
    return Skip(absl::StrCat(key_env, " is not set"));
  }
  const std::string emb_path = env("DPRECON_LIVE_EMBEDDINGS", "");
  if (emb_path.empty()) return Skip("DPRECON_LIVE_EMBEDDINGS is not set");
  const int dim = std::atoi(env("DPRECON_LIVE_EMBEDDINGS_DIM", "50").c_str());
  absl::StatusOr<EmbeddingTable> table = LoadEmbeddings(emb_path, dim);
  if (!table.ok()) return FailStatus(table.status());

  const std::string model = env("DPRECON_LIVE_MODEL", "gpt-4o-mini");
  LlmGateway gateway{GatewayOptions{}};
  gateway.RegisterModel(
      "live", std::make_shared<HttpChatTransport>(HttpEndpoint{
                  .base_url = env("DPRECON_LIVE_BASE_URL", "https://api.openai.com"),
                  .api_key_env = key_env,
                  .wire_model = model}));
  const std::vector<Document> docs = {
      {"target",
       "It is a truth universally acknowledged, that a single man in possession "
       "of a good fortune, must be in want of a wife. \"My dear Mr. Bennet,\" "
       "said his lady to him one day, \"have you heard that Netherfield Park is "
       "let at last?\"",
       ""},
      {"demo",
       "It was the best of times, it was the worst of times, it was the age of "
       "wisdom, it was the age of foolishness.",
       ""}};
  RuleTagger tagger;
  std::map<double, std::optional<int>> scores;
  for (double eps : {4.0, 12.0}) {
    std::vector<DocumentRef> refs;
    for (const Document& d : docs) refs.push_back({d.id, d.text});
    absl::StatusOr<std::vector<SanitizationRecord>> records =
        SanitizeWordLevelBatch(refs, *table, {.epsilon = eps, .dim = dim, .seed = 909});
    if (!records.ok()) return FailStatus(records.status());
    const std::vector<DemoPair> demos = {
        {(*records)[1].doc_id, (*records)[1].original, (*records)[1].sanitized}};
    BlackboxConfig bc;
    bc.prompt.model = "live";
    bc.run.threads = 1;
    bc.run.judge = JudgeConfig{.model = "live"};
    absl::StatusOr<std::vector<AttackResult>> results = RunBlackboxAttack(
        std::span<const SanitizationRecord>(records->data(), 1), demos, gateway,
        tagger, bc);
    if (!results.ok()) return FailStatus(results.status());
    if (!(*results)[0].error.empty()) return Fail((*results)[0].error);
    scores[eps] = (*results)[0].score;
  }
  if (!scores[4.0] || !scores[12.0]) return Fail("judge returned no usable score");
  const std::string detail =
      absl::StrFormat("model %s: Score eps=12 %d, eps=4 %d", model, *scores[12.0],
                      *scores[4.0]);
  return *scores[12.0] >= *scores[4.0] ? Pass(detail) : Fail(detail);
}

struct Criterion {
  int number;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "metric-DP ratio bound", 60, Criterion1},
      {2, "noise calibration", 30, Criterion2},
      {3, "budget monotonicity", 180, Criterion3},
      {4, "nearest-neighbor oracle", 60, Criterion4},
      {5, "metrics oracle", 10, Criterion5},
      {6, "exponential-mechanism sampling", 60, Criterion6},
      {7, "end-to-end mock attack", 120, Criterion7},
      {8, "replay from warm cache", 120, Criterion8},
      {9, "live API direction check", 600, Criterion9},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out = c.run();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.verdict == Verdict::kPass && seconds > c.limit_seconds) {
      out = Fail(absl::StrFormat("%s; took %.1f s, limit %.0f s", out.detail, seconds,
                                 c.limit_seconds));
    }
    const char* verdict = out.verdict == Verdict::kPass   ? "PASS"
                          : out.verdict == Verdict::kSkip ? "SKIP"
                                                          : "FAIL";
    failures += out.verdict == Verdict::kFail;
    std::cout << absl::StrFormat("criterion %d (%s): %s [%.1f s] %s", c.number, c.name,
                                 verdict, seconds, out.detail)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace dprecon

int main() { return dprecon::Main(); }
