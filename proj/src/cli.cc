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

#include "dprecon/cli.h"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <memory>
#include <sstream>
#include <streambuf>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dprecon/attacks.h"
#include "dprecon/corpus.h"
#include "dprecon/embedding_store.h"
#include "dprecon/io.h"
#include "dprecon/judge.h"
#include "dprecon/metrics.h"
#include "dprecon/mock_models.h"
#include "dprecon/parallel.h"
#include "dprecon/pii.h"
#include "dprecon/sentence_dp.h"
#include "dprecon/status_macros.h"
#include "dprecon/text_util.h"
#include "dprecon/word_dp.h"

namespace dprecon {
namespace {

namespace fs = std::filesystem;

// Forwards every character to two buffers.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == traits_type::eof()) return traits_type::not_eof(c);
    const char ch = traits_type::to_char_type(c);
    a_->sputc(ch);
    b_->sputc(ch);
    return c;
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    a_->sputn(s, n);
    b_->sputn(s, n);
    return n;
  }
  int sync() override { return a_->pubsync() | b_->pubsync(); }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

const nlohmann::json& Section(const nlohmann::json& config, const char* key) {
  static const nlohmann::json* empty = new nlohmann::json(nlohmann::json::object());
  auto it = config.find(key);
  return it == config.end() || it->is_null() ? *empty : *it;
}

// One output artifact plus the record of everything it was derived from.
class RunDir {
 public:
  explicit RunDir(std::string root) : root_(std::move(root)) {}

  const std::string& root() const { return root_; }

  absl::Status Write(const std::string& relative, std::string_view bytes) {
    RETURN_IF_ERROR(WriteFileAtomic((fs::path(root_) / relative).string(), bytes));
    outputs_[relative] = Sha256Hex(bytes);
    return absl::OkStatus();
  }

  void AddInput(const std::string& path, std::string_view bytes) {
    inputs_[path] = Sha256Hex(bytes);
  }

  absl::Status WriteManifest(nlohmann::json manifest) {
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& [path, sha] : outputs_) {
      outputs.push_back({{"path", path}, {"sha256", sha}});
    }
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& [path, sha] : inputs_) {
      inputs.push_back({{"path", path}, {"sha256", sha}});
    }
    manifest["outputs"] = outputs;
    manifest["inputs"] = inputs;
    return WriteFileAtomic((fs::path(root_) / "manifest.json").string(),
                           manifest.dump(2) + "\n");
  }

 private:
  std::string root_;
  std::map<std::string, std::string> outputs_;
  std::map<std::string, std::string> inputs_;
};

struct SanitizeSettings {
  Mechanism mechanism = Mechanism::kWordLevel;
  double budget = 0.0;
};

// Lazily loaded shared state for one command.
class Pipeline {
 public:
  Pipeline(nlohmann::json config, std::ostream& log, RunDir& run)
      : config_(std::move(config)), log_(log), run_(run) {
    seed_ = config_.value("seed", uint64_t{0});
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    threads_ = config_.value("threads", std::clamp(hw, 1, 8));
    timestamp_ = RunTimestamp();
  }

  const nlohmann::json& config() const { return config_; }
  uint64_t seed() const { return seed_; }
  int threads() const { return threads_; }
  const std::string& timestamp() const { return timestamp_; }

  absl::StatusOr<const PiiTagger*> Tagger() {
    if (!tagger_) {
      ASSIGN_OR_RETURN(tagger_, TaggerFromConfig(Section(config_, "tagger")));
    }
    return tagger_.get();
  }

  absl::StatusOr<LlmGateway*> Gateway() {
    if (!gateway_) {
      ASSIGN_OR_RETURN(gateway_, GatewayFromConfig(Section(config_, "gateway")));
    }
    return gateway_.get();
  }

  absl::StatusOr<const EmbeddingTable*> Table() {
    if (!table_) {
      const nlohmann::json& e = Section(config_, "embeddings");
      const std::string path = e.value("path", std::string());
      if (path.empty()) {
        return absl::InvalidArgumentError(
            "word-level sanitization needs embeddings.path");
      }
      ASSIGN_OR_RETURN(EmbeddingTable table,
                       LoadEmbeddings(path, e.value("dim", 50)));
      table_ = std::make_unique<EmbeddingTable>(std::move(table));
      log_ << "loaded " << table_->size() << " embeddings from " << path
           << "\n";
    }
    return table_.get();
  }

  // Corpus after truncation; split when corpus.split is configured.
  absl::StatusOr<const CorpusSplits*> Splits() {
    if (splits_) return splits_.get();
    const nlohmann::json& c = Section(config_, "corpus");
    const std::string path = c.value("path", std::string());
    if (path.empty()) return absl::InvalidArgumentError("missing corpus.path");
    ASSIGN_OR_RETURN(std::string contents, ReadFile(path));
    run_.AddInput(path, contents);
    ASSIGN_OR_RETURN(std::vector<Document> docs, ParseCorpus(contents, path));
    const size_t max_words = c.value("max_words", size_t{64});
    if (max_words > 0) {
      for (Document& d : docs) d = TruncateDoc(d, max_words);
    }
    auto splits = std::make_unique<CorpusSplits>();
    if (auto s = c.find("split"); s != c.end() && !s->is_null()) {
      SplitSpec spec;
      spec.train = s->value("train", size_t{0});
      spec.validation = s->value("validation", size_t{0});
      spec.test = s->value("test", size_t{0});
      spec.seed = s->value("seed", seed_);
      ASSIGN_OR_RETURN(*splits, SplitCorpus(docs, spec));
      has_split_ = true;
    } else {
      splits->test = std::move(docs);
    }
    splits_ = std::move(splits);
    return splits_.get();
  }
  bool has_split() const { return has_split_; }

  absl::StatusOr<SanitizeSettings> Settings() const {
    const nlohmann::json& s = Section(config_, "sanitize");
    SanitizeSettings out;
    ASSIGN_OR_RETURN(out.mechanism,
                     ParseMechanism(s.value("mechanism", std::string("word_level"))));
    out.budget = s.value("budget", out.mechanism == Mechanism::kWordLevel ? 8.0 : 1.0);
    return out;
  }

  absl::StatusOr<std::vector<SanitizationRecord>> Sanitize(
      std::span<const Document> docs, const SanitizeSettings& settings) {
    const nlohmann::json& s = Section(config_, "sanitize");
    switch (settings.mechanism) {
      case Mechanism::kWordLevel: {
        ASSIGN_OR_RETURN(const EmbeddingTable* table, Table());
        WordDpConfig wc;
        wc.epsilon = settings.budget;
        wc.dim = Section(config_, "embeddings").value("dim", 50);
        wc.seed = seed_;
        if (s.value("search", std::string("accelerated")) == "exact") {
          wc.search = SearchMode::kExactBruteForce;
        }
        std::vector<DocumentRef> refs;
        for (const Document& d : docs) refs.push_back({d.id, d.text});
        return SanitizeWordLevelBatch(refs, *table, wc, threads_, timestamp_);
      }
      case Mechanism::kSentenceLevelExact: {
        const std::string url = s.value("logit_server", std::string());
        if (url.empty()) {
          return absl::InvalidArgumentError(
              "sentence_level_exact needs sanitize.logit_server");
        }
        ASSIGN_OR_RETURN(std::unique_ptr<HttpLogitProvider> provider,
                         HttpLogitProvider::Connect(url));
        SentenceDpConfig sc;
        sc.temperature = settings.budget;
        sc.clip_bound = s.value("clip_bound", sc.clip_bound);
        sc.max_tokens = s.value("max_tokens", sc.max_tokens);
        sc.paraphrase_template = s.value("template", sc.paraphrase_template);
        sc.seed = seed_;
        return ForEachDoc(docs, [&](const Document& d) {
          return DpDecode(d.id, d.text, *provider, sc, timestamp_);
        });
      }
      case Mechanism::kSentenceLevelApi: {
        ASSIGN_OR_RETURN(LlmGateway* gateway, Gateway());
        ApiParaphraseConfig ac;
        ac.model = s.value("model", std::string());
        if (!gateway->HasModel(ac.model)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "sanitize.model '", ac.model, "' is not a gateway model"));
        }
        ac.temperature = settings.budget;
        ac.paraphrase_template = s.value("template", ac.paraphrase_template);
        ac.max_tokens = s.value("max_tokens", ac.max_tokens);
        return ForEachDoc(docs, [&](const Document& d) {
          return ApiParaphrase(d.id, d.text, *gateway, ac, timestamp_);
        });
      }
    }
    return absl::InternalError("unhandled mechanism");
  }

  absl::StatusOr<InstructionTemplate> Template() const {
    InstructionTemplate t;
    const nlohmann::json& a = Section(config_, "attack");
    if (auto it = a.find("template"); it != a.end()) {
      t.preamble = it->value("preamble", t.preamble);
      t.demonstration = it->value("demonstration", t.demonstration);
      t.user = it->value("user", t.user);
    }
    RETURN_IF_ERROR(ValidateInstructionTemplate(t));
    return t;
  }

  absl::StatusOr<AttackRunOptions> RunOptions(const nlohmann::json& section) {
    AttackRunOptions run;
    run.threads = threads_;
    run.max_error_fraction =
        section.value("max_error_fraction", run.max_error_fraction);
    if (auto j = section.find("judge"); j != section.end() && !j->is_null()) {
      JudgeConfig jc;
      jc.model = j->value("model", std::string());
      jc.system_template = j->value("system_template", jc.system_template);
      jc.user_template = j->value("user_template", jc.user_template);
      jc.max_retries = j->value("max_retries", jc.max_retries);
      jc.temperature = j->value("temperature", jc.temperature);
      RETURN_IF_ERROR(ValidateJudgeConfig(jc));
      run.judge = jc;
    }
    return run;
  }

  absl::StatusOr<BlackboxConfig> Blackbox(const std::string& model) {
    const nlohmann::json& a = Section(config_, "attack");
    BlackboxConfig bc;
    ASSIGN_OR_RETURN(bc.tmpl, Template());
    bc.prompt.model = model;
    bc.prompt.temperature = a.value("temperature", 0.0);
    bc.prompt.max_tokens = a.value("max_tokens", 512);
    ASSIGN_OR_RETURN(bc.run, RunOptions(a));
    return bc;
  }

  int demo_count() const {
    return Section(config_, "attack").value("demo_count", 1);
  }

  // Sanitized targets and demonstrations for one budget point. With a
  // configured split the demos come from the validation split; otherwise the
  // first records by doc_id are held out.
  absl::StatusOr<std::pair<std::vector<DemoPair>, std::vector<SanitizationRecord>>>
  TargetsAndDemos(const SanitizeSettings& settings,
                  std::vector<SanitizationRecord>* all_records) {
    ASSIGN_OR_RETURN(const CorpusSplits* splits, Splits());
    ASSIGN_OR_RETURN(std::vector<SanitizationRecord> targets,
                     Sanitize(splits->test, settings));
    if (has_split_ && !splits->validation.empty()) {
      std::vector<Document> pool = splits->validation;
      std::sort(pool.begin(), pool.end(),
                [](const Document& a, const Document& b) { return a.id < b.id; });
      pool.resize(std::min<size_t>(pool.size(), std::max(demo_count(), 0)));
      ASSIGN_OR_RETURN(std::vector<SanitizationRecord> demo_records,
                       Sanitize(pool, settings));
      std::vector<DemoPair> demos;
      for (const SanitizationRecord& r : demo_records) {
        demos.push_back({r.doc_id, r.original, r.sanitized});
      }
      if (all_records) *all_records = targets;
      return std::make_pair(std::move(demos), std::move(targets));
    }
    if (all_records) *all_records = targets;
    return SplitDemos(std::move(targets), demo_count());
  }

  absl::StatusOr<std::vector<SanitizationRecord>> ReadRecords(
      const std::string& path) {
    ASSIGN_OR_RETURN(std::string contents, ReadFile(path));
    run_.AddInput(path, contents);
    ASSIGN_OR_RETURN(std::vector<nlohmann::json> lines,
                     ParseJsonLines(contents, path));
    std::vector<SanitizationRecord> records;
    for (const nlohmann::json& j : lines) records.push_back(j.get<SanitizationRecord>());
    return records;
  }

  nlohmann::json BaseManifest(const std::string& command) {
    nlohmann::json m = {{"command", command},
                        {"config", config_},
                        {"config_hash", ConfigHash8(config_)},
                        {"seed", seed_},
                        {"created", timestamp_}};
    if (absl::StatusOr<const PiiTagger*> t = Tagger(); t.ok()) {
      m["tagger"] = (*t)->Describe();
    }
    return m;
  }

 private:
  template <typename Fn>
  absl::StatusOr<std::vector<SanitizationRecord>> ForEachDoc(
      std::span<const Document> docs, Fn fn) {
    std::vector<absl::StatusOr<SanitizationRecord>> out(docs.size());
    ParallelFor(docs.size(), threads_, [&](size_t i) { out[i] = fn(docs[i]); });
    std::vector<SanitizationRecord> records;
    for (size_t i = 0; i < out.size(); ++i) {
      if (!out[i].ok()) {
        return absl::Status(out[i].status().code(),
                            absl::StrCat("doc ", docs[i].id, ": ",
                                         out[i].status().message()));
      }
      records.push_back(*std::move(out[i]));
    }
    return records;
  }

  nlohmann::json config_;
  std::ostream& log_;
  RunDir& run_;
  uint64_t seed_ = 0;
  int threads_ = 1;
  std::string timestamp_;
  bool has_split_ = false;
  std::unique_ptr<PiiTagger> tagger_;
  std::unique_ptr<LlmGateway> gateway_;
  std::unique_ptr<EmbeddingTable> table_;
  std::unique_ptr<CorpusSplits> splits_;
};

std::string BudgetLabel(double budget) { return absl::StrFormat("%g", budget); }

nlohmann::json RecordsSummary(const SanitizeSettings& s) {
  return {{"mechanism", MechanismName(s.mechanism)}, {"budget", s.budget}};
}

absl::StatusOr<std::string> AttackModel(const Pipeline& p) {
  const std::string model =
      Section(p.config(), "attack").value("model", std::string());
  if (model.empty()) {
    return absl::InvalidArgumentError("missing attack.model (or --model)");
  }
  return model;
}

absl::Status WriteResultsAndReport(RunDir& run, Pipeline& p,
                                   const std::vector<AttackResult>& results,
                                   const std::string& prefix,
                                   CorpusReport* report_out) {
  RETURN_IF_ERROR(run.Write(prefix + "results.jsonl", SerializeJsonLines(results)));
  ASSIGN_OR_RETURN(const PiiTagger* tagger, p.Tagger());
  ASSIGN_OR_RETURN(CorpusReport report, EvaluateResults(results, *tagger));
  RETURN_IF_ERROR(run.Write(prefix + "report.json",
                            nlohmann::json(report).dump(2) + "\n"));
  if (report_out) *report_out = report;
  return absl::OkStatus();
}

absl::Status CmdSanitize(Pipeline& p, RunDir& run, const CliOptions& opts) {
  ASSIGN_OR_RETURN(SanitizeSettings settings, p.Settings());
  ASSIGN_OR_RETURN(const CorpusSplits* splits, p.Splits());
  (void)opts;
  ASSIGN_OR_RETURN(std::vector<SanitizationRecord> records,
                   p.Sanitize(splits->test, settings));
  RETURN_IF_ERROR(run.Write("records.jsonl", SerializeJsonLines(records)));
  nlohmann::json m = p.BaseManifest("sanitize");
  m["sanitization"] = RecordsSummary(settings);
  return run.WriteManifest(m);
}

absl::Status CmdAttackBlackbox(Pipeline& p, RunDir& run, const CliOptions& opts) {
  ASSIGN_OR_RETURN(std::string model, AttackModel(p));
  ASSIGN_OR_RETURN(BlackboxConfig bc, p.Blackbox(model));
  ASSIGN_OR_RETURN(LlmGateway* gateway, p.Gateway());
  ASSIGN_OR_RETURN(const PiiTagger* tagger, p.Tagger());
  std::vector<DemoPair> demos;
  std::vector<SanitizationRecord> targets;
  if (!opts.inputs.empty()) {
    ASSIGN_OR_RETURN(std::vector<SanitizationRecord> records,
                     p.ReadRecords(opts.inputs[0]));
    ASSIGN_OR_RETURN(std::tie(demos, targets),
                     SplitDemos(std::move(records), p.demo_count()));
  } else {
    ASSIGN_OR_RETURN(SanitizeSettings settings, p.Settings());
    std::vector<SanitizationRecord> all;
    ASSIGN_OR_RETURN(std::tie(demos, targets), p.TargetsAndDemos(settings, &all));
    RETURN_IF_ERROR(run.Write("records.jsonl", SerializeJsonLines(all)));
  }
  ASSIGN_OR_RETURN(std::vector<AttackResult> results,
                   RunBlackboxAttack(targets, demos, *gateway, *tagger, bc));
  RETURN_IF_ERROR(WriteResultsAndReport(run, p, results, "", nullptr));
  nlohmann::json m = p.BaseManifest("attack-blackbox");
  m["model"] = model;
  m["template_hash"] = bc.tmpl.Hash();
  m["demo_ids"] = nlohmann::json::array();
  for (const DemoPair& d : demos) m["demo_ids"].push_back(d.doc_id);
  if (!targets.empty()) {
    m["sanitization"] = {{"mechanism", MechanismName(targets[0].mechanism)},
                         {"budget", targets[0].budget}};
  }
  return run.WriteManifest(m);
}

absl::Status CmdFinetuneExport(Pipeline& p, RunDir& run) {
  ASSIGN_OR_RETURN(const CorpusSplits* splits, p.Splits());
  if (!p.has_split()) {
    return absl::InvalidArgumentError(
        "finetune-export needs corpus.split so the auxiliary data is disjoint "
        "from the test split");
  }
  ASSIGN_OR_RETURN(const EmbeddingTable* table, p.Table());
  const nlohmann::json& f = Section(p.config(), "finetune");
  ASSIGN_OR_RETURN(SanitizeSettings settings, p.Settings());
  WordDpConfig wc;
  wc.epsilon = f.value("budget", settings.budget);
  wc.dim = Section(p.config(), "embeddings").value("dim", 50);
  wc.seed = p.seed();
  const std::string separator =
      f.value("separator", std::string(kDefaultSeparator));
  ASSIGN_OR_RETURN(std::vector<FinetunePair> pairs,
                   BuildFinetunePairs(splits->train, splits->test, *table, wc,
                                      separator, p.threads()));
  RETURN_IF_ERROR(run.Write("pairs.jsonl", SerializeJsonLines(pairs)));
  nlohmann::json m = p.BaseManifest("finetune-export");
  m["separator"] = pairs.empty() ? separator : pairs[0].separator;
  m["sanitization"] = {{"mechanism", "word_level"}, {"budget", wc.epsilon}};
  m["pairs"] = pairs.size();
  return run.WriteManifest(m);
}

absl::Status CmdWhiteboxEval(Pipeline& p, RunDir& run, const CliOptions& opts) {
  const nlohmann::json& f = Section(p.config(), "finetune");
  GenerationConfig gc;
  gc.model = opts.model.value_or(f.value("model", std::string()));
  if (gc.model.empty()) {
    return absl::InvalidArgumentError("missing finetune.model (or --model)");
  }
  gc.separator = f.value("separator", gc.separator);
  gc.temperature = f.value("temperature", gc.temperature);
  gc.max_tokens = f.value("max_tokens", gc.max_tokens);
  ASSIGN_OR_RETURN(gc.run, p.RunOptions(f));
  ASSIGN_OR_RETURN(LlmGateway* gateway, p.Gateway());
  ASSIGN_OR_RETURN(const PiiTagger* tagger, p.Tagger());
  std::vector<SanitizationRecord> targets;
  if (!opts.inputs.empty()) {
    ASSIGN_OR_RETURN(targets, p.ReadRecords(opts.inputs[0]));
  } else {
    ASSIGN_OR_RETURN(SanitizeSettings settings, p.Settings());
    ASSIGN_OR_RETURN(const CorpusSplits* splits, p.Splits());
    ASSIGN_OR_RETURN(targets, p.Sanitize(splits->test, settings));
    RETURN_IF_ERROR(run.Write("records.jsonl", SerializeJsonLines(targets)));
  }
  ASSIGN_OR_RETURN(std::vector<AttackResult> results,
                   RunGenerationEval(targets, *gateway, *tagger, gc));
  RETURN_IF_ERROR(WriteResultsAndReport(run, p, results, "", nullptr));
  nlohmann::json m = p.BaseManifest("attack-whitebox-eval");
  m["model"] = gc.model;
  m["separator"] = gc.separator;
  return run.WriteManifest(m);
}

absl::StatusOr<std::string> ResultsPath(const std::string& input) {
  if (fs::is_directory(input)) {
    const fs::path candidate = fs::path(input) / "results.jsonl";
    if (!fs::exists(candidate)) {
      return absl::NotFoundError(
          absl::StrCat("no results.jsonl in directory ", input));
    }
    return candidate.string();
  }
  return input;
}

absl::Status CmdEvaluate(Pipeline& p, RunDir& run, const CliOptions& opts) {
  if (opts.inputs.empty()) {
    return absl::InvalidArgumentError("evaluate needs --input <results>");
  }
  ASSIGN_OR_RETURN(std::string path, ResultsPath(opts.inputs[0]));
  ASSIGN_OR_RETURN(std::string contents, ReadFile(path));
  run.AddInput(path, contents);
  ASSIGN_OR_RETURN(std::vector<nlohmann::json> lines,
                   ParseJsonLines(contents, path));
  if (lines.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(path, " has no results"));
  }
  std::vector<AttackResult> results;
  for (const nlohmann::json& j : lines) results.push_back(j.get<AttackResult>());
  ASSIGN_OR_RETURN(const PiiTagger* tagger, p.Tagger());
  ASSIGN_OR_RETURN(CorpusReport report, EvaluateResults(results, *tagger));
  RETURN_IF_ERROR(run.Write("report.json", nlohmann::json(report).dump(2) + "\n"));
  const CorpusReport one[] = {report};
  RETURN_IF_ERROR(run.Write("report.csv", ReportsToCsv(one)));
  return run.WriteManifest(p.BaseManifest("evaluate"));
}

absl::Status CmdSweep(Pipeline& p, RunDir& run, const CliOptions& opts,
                      std::ostream& log) {
  ASSIGN_OR_RETURN(SanitizeSettings base, p.Settings());
  const nlohmann::json& s = Section(p.config(), "sweep");
  std::vector<double> budgets;
  if (opts.budget) {
    budgets = {*opts.budget};
  } else if (auto b = s.find("budgets"); b != s.end()) {
    budgets = b->get<std::vector<double>>();
  } else if (base.mechanism == Mechanism::kWordLevel) {
    budgets = {1, 4, 8, 12, 32};
  } else {
    budgets = {1.0, 1.5, 2.0};
  }
  std::vector<std::string> models;
  if (opts.model) {
    models = {*opts.model};
  } else if (auto m = s.find("models"); m != s.end()) {
    models = m->get<std::vector<std::string>>();
  } else {
    ASSIGN_OR_RETURN(std::string model, AttackModel(p));
    models = {model};
  }
  if (budgets.empty() || models.empty()) {
    return absl::InvalidArgumentError("sweep needs at least one budget and model");
  }
  ASSIGN_OR_RETURN(LlmGateway* gateway, p.Gateway());
  ASSIGN_OR_RETURN(const PiiTagger* tagger, p.Tagger());
  std::vector<CorpusReport> reports;
  nlohmann::json points = nlohmann::json::array();
  for (double budget : budgets) {
    SanitizeSettings settings = base;
    settings.budget = budget;
    std::vector<SanitizationRecord> all;
    ASSIGN_OR_RETURN(auto split, p.TargetsAndDemos(settings, &all));
    const std::string budget_dir = absl::StrCat("budget_", BudgetLabel(budget), "/");
    RETURN_IF_ERROR(run.Write(budget_dir + "records.jsonl", SerializeJsonLines(all)));
    for (const std::string& model : models) {
      ASSIGN_OR_RETURN(BlackboxConfig bc, p.Blackbox(model));
      ASSIGN_OR_RETURN(std::vector<AttackResult> results,
                       RunBlackboxAttack(split.second, split.first, *gateway,
                                         *tagger, bc));
      CorpusReport report;
      const std::string prefix = absl::StrCat(budget_dir, model, "/");
      RETURN_IF_ERROR(WriteResultsAndReport(run, p, results, prefix, &report));
      log << "sweep " << MechanismName(settings.mechanism) << " budget "
          << BudgetLabel(budget) << " model " << model << ": succ "
          << FormatMetric(report.succ.mean) << "% recall "
          << FormatMetric(report.recall.mean) << "% precision "
          << FormatMetric(report.precision.mean) << "%\n";
      points.push_back({{"budget", budget},
                        {"model", model},
                        {"template_hash", bc.tmpl.Hash()},
                        {"report", prefix + "report.json"}});
      reports.push_back(std::move(report));
    }
  }
  RETURN_IF_ERROR(run.Write("sweep.csv", ReportsToCsv(reports)));
  RETURN_IF_ERROR(run.Write("table.md", RenderReportTables(reports)));
  nlohmann::json m = p.BaseManifest("sweep");
  m["mechanism"] = MechanismName(base.mechanism);
  m["points"] = points;
  return run.WriteManifest(m);
}

absl::Status CollectReports(const std::string& input,
                            std::vector<std::string>& paths) {
  if (fs::is_directory(input)) {
    for (const fs::directory_entry& e : fs::recursive_directory_iterator(input)) {
      if (e.is_regular_file() && e.path().filename() == "report.json") {
        paths.push_back(e.path().string());
      }
    }
    return absl::OkStatus();
  }
  if (!fs::exists(input)) {
    return absl::NotFoundError(absl::StrCat(input, " does not exist"));
  }
  paths.push_back(input);
  return absl::OkStatus();
}

absl::Status CmdReport(RunDir& run, const CliOptions& opts, std::ostream& log) {
  std::vector<std::string> paths;
  for (const std::string& input : opts.inputs) {
    RETURN_IF_ERROR(CollectReports(input, paths));
  }
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  if (paths.empty()) {
    return absl::InvalidArgumentError("report found no report.json inputs");
  }
  std::vector<CorpusReport> reports;
  for (const std::string& path : paths) {
    ASSIGN_OR_RETURN(std::string contents, ReadFile(path));
    run.AddInput(path, contents);
    nlohmann::json j = nlohmann::json::parse(contents, nullptr, false);
    if (j.is_discarded()) {
      return absl::InvalidArgumentError(absl::StrCat(path, " is not valid JSON"));
    }
    ASSIGN_OR_RETURN(CorpusReport r, CorpusReportFromJson(j));
    reports.push_back(std::move(r));
  }
  std::sort(reports.begin(), reports.end(),
            [](const CorpusReport& a, const CorpusReport& b) {
              return std::tie(a.mechanism, a.model, a.budget) <
                     std::tie(b.mechanism, b.model, b.budget);
            });
  const std::string table = RenderReportTables(reports);
  RETURN_IF_ERROR(run.Write("table.md", table));
  RETURN_IF_ERROR(run.Write("table.csv", ReportsToCsv(reports)));
  log << table;
  return run.WriteManifest({{"command", "report"}});
}

absl::Status Dispatch(const CliOptions& opts, const nlohmann::json& config,
                      RunDir& run, std::ostream& log) {
  try {
    Pipeline p(config, log, run);
    absl::Status status;
    if (opts.command == "sanitize") {
      status = CmdSanitize(p, run, opts);
    } else if (opts.command == "attack-blackbox") {
      status = CmdAttackBlackbox(p, run, opts);
    } else if (opts.command == "finetune-export") {
      status = CmdFinetuneExport(p, run);
    } else if (opts.command == "attack-whitebox-eval") {
      status = CmdWhiteboxEval(p, run, opts);
    } else if (opts.command == "evaluate") {
      status = CmdEvaluate(p, run, opts);
    } else if (opts.command == "sweep") {
      status = CmdSweep(p, run, opts, log);
    } else {
      status = CmdReport(run, opts, log);
    }
    return status;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bad JSON value: ", e.what()));
  }
}

}  // namespace

nlohmann::json EffectiveConfig(nlohmann::json config, const CliOptions& opts) {
  if (!config.is_object()) config = nlohmann::json::object();
  if (opts.seed) config["seed"] = *opts.seed;
  if (opts.mechanism) config["sanitize"]["mechanism"] = *opts.mechanism;
  if (opts.budget) config["sanitize"]["budget"] = *opts.budget;
  if (opts.model) config["attack"]["model"] = *opts.model;
  return config;
}

std::string ConfigHash8(const nlohmann::json& config) {
  return Sha256Hex(config.dump()).substr(0, 8);
}

std::string RunTimestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
      epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

absl::StatusOr<std::string> RunCommand(const CliOptions& opts,
                                       std::ostream& log) {
  const auto known = std::find_if(
      std::begin(kCommands), std::end(kCommands),
      [&opts](const char* c) { return opts.command == c; });
  if (known == std::end(kCommands)) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown command '", opts.command, "'"));
  }
  nlohmann::json config = nlohmann::json::object();
  if (!opts.config_path.empty()) {
    ASSIGN_OR_RETURN(std::string contents, ReadFile(opts.config_path));
    config = nlohmann::json::parse(contents, nullptr, false);
    if (config.is_discarded() || !config.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat(opts.config_path, " is not a JSON object"));
    }
  } else if (opts.command != "evaluate" && opts.command != "report") {
    return absl::InvalidArgumentError(
        absl::StrCat(opts.command, " needs --config"));
  }
  config = EffectiveConfig(std::move(config), opts);
  const std::string root =
      !opts.out.empty()
          ? opts.out
          : (fs::path("runs") /
             absl::StrCat(RunTimestamp(), "_", ConfigHash8(config)))
                .string();
  RunDir run(root);
  // Progress also lands in <run>/run.log.
  std::ostringstream captured;
  TeeBuf tee(log.rdbuf(), captured.rdbuf());
  std::ostream both(&tee);
  absl::Status status = Dispatch(opts, config, run, both);
  both.flush();
  if (!captured.str().empty()) {
    RETURN_IF_ERROR(WriteFileAtomic((fs::path(root) / "run.log").string(),
                                    captured.str()));
  }
  RETURN_IF_ERROR(status);
  return root;
}

std::string ErrorJson(const absl::Status& status) {
  nlohmann::json j = {
      {"error",
       {{"code", absl::StatusCodeToString(status.code())},
        {"message", std::string(status.message())}}}};
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

int RunCli(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  absl::StatusOr<std::string> root = RunCommand(opts, err);
  if (!root.ok()) {
    err << ErrorJson(root.status()) << "\n";
    return 1;
  }
  out << *root << "\n";
  return 0;
}

}  // namespace dprecon
