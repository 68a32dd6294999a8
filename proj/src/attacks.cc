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

#include "dprecon/attacks.h"

#include <algorithm>
#include <functional>
#include <set>

#include "absl/strings/str_cat.h"
#include "dprecon/parallel.h"
#include "dprecon/rng.h"
#include "dprecon/text_util.h"

namespace dprecon {
namespace {

using Reconstructor =
    std::function<absl::StatusOr<std::string>(const SanitizationRecord&)>;

absl::StatusOr<PiiSet> TagSet(std::string_view text, const PiiTagger& tagger) {
  absl::StatusOr<std::vector<PiiSpan>> spans = ExtractPii(text, tagger);
  if (!spans.ok()) return spans.status();
  return ToPiiSet(*spans);
}

absl::StatusOr<std::vector<AttackResult>> RunAttack(
    std::span<const SanitizationRecord> targets, AttackKind kind,
    const std::string& model, LlmGateway& gateway, const PiiTagger& tagger,
    const AttackRunOptions& options, const Reconstructor& reconstruct) {
  if (targets.empty()) {
    return absl::InvalidArgumentError("no target documents");
  }
  std::vector<const SanitizationRecord*> ordered;
  for (const SanitizationRecord& r : targets) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const SanitizationRecord* a, const SanitizationRecord* b) {
                     return a->doc_id < b->doc_id;
                   });
  for (size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->doc_id == ordered[i - 1]->doc_id) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate target doc_id ", ordered[i]->doc_id));
    }
  }

  std::vector<AttackResult> results(ordered.size());
  ParallelFor(ordered.size(), options.threads, [&](size_t i) {
    const SanitizationRecord& target = *ordered[i];
    AttackResult& r = results[i];
    r.doc_id = target.doc_id;
    r.original = target.original;
    r.sanitized = target.sanitized;
    r.attack = kind;
    r.model = model;
    r.mechanism = std::string(MechanismName(target.mechanism));
    r.budget = target.budget;
    absl::StatusOr<std::string> reconstructed = reconstruct(target);
    if (!reconstructed.ok()) {
      r.error = reconstructed.status().ToString();
      return;
    }
    r.reconstructed = *std::move(reconstructed);
    if (absl::Status s = AttachMetrics(r, tagger); !s.ok()) {
      r.error = s.ToString();
      return;
    }
    if (options.judge) {
      absl::StatusOr<JudgeOutcome> judged =
          JudgeScore(r.original, r.reconstructed, gateway, *options.judge);
      if (judged.ok()) {
        r.score = judged->score;
        r.judge_attempts = judged->attempts;
      }
    }
  });

  const auto errors = std::count_if(
      results.begin(), results.end(),
      [](const AttackResult& r) { return !r.error.empty(); });
  const double fraction =
      static_cast<double>(errors) / static_cast<double>(results.size());
  if (fraction > options.max_error_fraction) {
    const AttackResult& first = *std::find_if(
        results.begin(), results.end(),
        [](const AttackResult& r) { return !r.error.empty(); });
    return absl::AbortedError(absl::StrCat(
        errors, " of ", results.size(),
        " documents failed, above the allowed fraction ",
        options.max_error_fraction, "; first failure (", first.doc_id,
        "): ", first.error));
  }
  return results;
}

}  // namespace

std::string InstructionTemplate::Hash() const {
  nlohmann::json j = {
      {"preamble", preamble}, {"demonstration", demonstration}, {"user", user}};
  return Sha256Hex(j.dump());
}

absl::Status ValidateInstructionTemplate(const InstructionTemplate& tmpl) {
  if (CountOccurrences(tmpl.demonstration, kEditedSlot) != 1 ||
      CountOccurrences(tmpl.demonstration, kOriginalSlot) != 1) {
    return absl::InvalidArgumentError(
        "demonstration block needs {edited text} and {original text} exactly "
        "once each");
  }
  if (CountOccurrences(tmpl.user, kEditedSlot) != 1) {
    return absl::InvalidArgumentError(
        "user template needs {edited text} exactly once");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::pair<std::vector<DemoPair>, std::vector<SanitizationRecord>>>
SplitDemos(std::vector<SanitizationRecord> records, int count) {
  if (count < 0) return absl::InvalidArgumentError("demo count must be >= 0");
  if (records.size() <= static_cast<size_t>(count)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "need more than ", count, " records to hold out ", count,
        " demonstrations; got ", records.size()));
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const SanitizationRecord& a, const SanitizationRecord& b) {
                     return a.doc_id < b.doc_id;
                   });
  std::vector<DemoPair> demos;
  for (int i = 0; i < count; ++i) {
    demos.push_back(
        {records[i].doc_id, records[i].original, records[i].sanitized});
  }
  records.erase(records.begin(), records.begin() + count);
  return std::make_pair(std::move(demos), std::move(records));
}

absl::StatusOr<ChatRequest> BuildInstructionPrompt(
    const SanitizationRecord& target, const InstructionTemplate& tmpl,
    std::span<const DemoPair> demos, const PromptOptions& options) {
  if (absl::Status s = ValidateInstructionTemplate(tmpl); !s.ok()) return s;
  std::string system = tmpl.preamble;
  for (const DemoPair& demo : demos) {
    if (demo.doc_id == target.doc_id ||
        (!target.original.empty() && demo.original == target.original)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "demonstration ", demo.doc_id, " is the target document ",
          target.doc_id));
    }
    const std::pair<std::string_view, std::string_view> slots[] = {
        {kEditedSlot, demo.sanitized}, {kOriginalSlot, demo.original}};
    absl::StrAppend(&system, "\n\n", FillSlots(tmpl.demonstration, slots));
  }
  if (!target.original.empty() &&
      system.find(target.original) != std::string::npos) {
    return absl::InvalidArgumentError(absl::StrCat(
        "original text of ", target.doc_id, " leaks into the system message"));
  }
  const std::pair<std::string_view, std::string_view> user_slots[] = {
      {kEditedSlot, target.sanitized}};
  ChatRequest request;
  request.model = options.model;
  request.messages = {{"system", std::move(system)},
                      {"user", FillSlots(tmpl.user, user_slots)}};
  request.temperature = options.temperature;
  request.max_tokens = options.max_tokens;
  return request;
}

std::string_view AttackKindName(AttackKind kind) {
  return kind == AttackKind::kBlackboxInstruction ? "blackbox_instruction"
                                                  : "whitebox_finetune";
}

absl::StatusOr<AttackKind> ParseAttackKind(std::string_view name) {
  if (name == "blackbox_instruction") return AttackKind::kBlackboxInstruction;
  if (name == "whitebox_finetune") return AttackKind::kWhiteboxFinetune;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown attack kind '", std::string(name), "'"));
}

void to_json(nlohmann::json& j, const AttackResult& r) {
  j = {{"doc_id", r.doc_id},
       {"original", r.original},
       {"sanitized", r.sanitized},
       {"reconstructed", r.reconstructed},
       {"metrics", r.metrics ? nlohmann::json(*r.metrics) : nullptr},
       {"score", r.score ? nlohmann::json(*r.score) : nullptr},
       {"judge_attempts", r.judge_attempts},
       {"attack", AttackKindName(r.attack)},
       {"model", r.model},
       {"mechanism", r.mechanism},
       {"budget", r.budget},
       {"error", r.error}};
}

void from_json(const nlohmann::json& j, AttackResult& r) {
  r.doc_id = j.at("doc_id").get<std::string>();
  r.original = j.at("original").get<std::string>();
  r.sanitized = j.at("sanitized").get<std::string>();
  r.reconstructed = j.at("reconstructed").get<std::string>();
  if (!j.at("metrics").is_null()) r.metrics = j.at("metrics").get<DocMetrics>();
  if (!j.at("score").is_null()) r.score = j.at("score").get<int>();
  r.judge_attempts = j.value("judge_attempts", 0);
  absl::StatusOr<AttackKind> kind =
      ParseAttackKind(j.at("attack").get<std::string>());
  if (!kind.ok()) {
    throw nlohmann::json::other_error::create(
        501, std::string(kind.status().message()), &j);
  }
  r.attack = *kind;
  r.model = j.at("model").get<std::string>();
  r.mechanism = j.at("mechanism").get<std::string>();
  r.budget = j.at("budget").get<double>();
  r.error = j.value("error", std::string());
}

absl::Status AttachMetrics(AttackResult& result, const PiiTagger& tagger) {
  absl::StatusOr<PiiSet> c = TagSet(result.original, tagger);
  if (!c.ok()) return c.status();
  absl::StatusOr<PiiSet> c_tilde = TagSet(result.sanitized, tagger);
  if (!c_tilde.ok()) return c_tilde.status();
  absl::StatusOr<PiiSet> c_hat = TagSet(result.reconstructed, tagger);
  if (!c_hat.ok()) return c_hat.status();
  result.metrics = ComputeDocMetrics(*c, *c_tilde, *c_hat);
  return absl::OkStatus();
}

absl::StatusOr<std::vector<AttackResult>> RunBlackboxAttack(
    std::span<const SanitizationRecord> targets,
    std::span<const DemoPair> demos, LlmGateway& gateway,
    const PiiTagger& tagger, const BlackboxConfig& config) {
  if (absl::Status s = ValidateInstructionTemplate(config.tmpl); !s.ok()) {
    return s;
  }
  if (!gateway.HasModel(config.prompt.model)) {
    return absl::NotFoundError(
        absl::StrCat("model '", config.prompt.model, "' is not registered"));
  }
  if (config.run.judge && !gateway.HasModel(config.run.judge->model)) {
    return absl::NotFoundError(absl::StrCat(
        "judge model '", config.run.judge->model, "' is not registered"));
  }
  return RunAttack(
      targets, AttackKind::kBlackboxInstruction, config.prompt.model, gateway,
      tagger, config.run,
      [&](const SanitizationRecord& target) -> absl::StatusOr<std::string> {
        absl::StatusOr<ChatRequest> request =
            BuildInstructionPrompt(target, config.tmpl, demos, config.prompt);
        if (!request.ok()) return request.status();
        absl::StatusOr<ChatResponse> response = gateway.Complete(*request);
        if (!response.ok()) return response.status();
        if (response->content.empty()) {
          return absl::DataLossError("model returned an empty completion");
        }
        return response->content;
      });
}

void to_json(nlohmann::json& j, const FinetunePair& p) {
  j = {{"doc_id", p.doc_id},
       {"sanitized", p.sanitized},
       {"original", p.original},
       {"separator", p.separator},
       {"concatenated", p.concatenated},
       {"seed", p.seed},
       {"stream_seed", p.stream_seed},
       {"budget", p.budget}};
}

void from_json(const nlohmann::json& j, FinetunePair& p) {
  p.doc_id = j.at("doc_id").get<std::string>();
  p.sanitized = j.at("sanitized").get<std::string>();
  p.original = j.at("original").get<std::string>();
  p.separator = j.at("separator").get<std::string>();
  p.concatenated = j.at("concatenated").get<std::string>();
  p.seed = j.at("seed").get<uint64_t>();
  p.stream_seed = j.at("stream_seed").get<uint64_t>();
  p.budget = j.at("budget").get<double>();
}

std::string ChooseSeparator(std::string_view base,
                            std::span<const std::string_view> texts) {
  std::string sep(base);
  auto occurs = [&texts](const std::string& s) {
    return std::any_of(texts.begin(), texts.end(), [&s](std::string_view t) {
      return t.find(s) != std::string_view::npos;
    });
  };
  while (occurs(sep)) {
    const size_t hash = sep.find('#');
    if (hash == std::string::npos) {
      sep += '#';
    } else {
      sep.insert(hash, "#");
    }
  }
  return sep;
}

std::optional<std::pair<std::string, std::string>> SplitOnSeparator(
    std::string_view concatenated, std::string_view separator) {
  const size_t at = concatenated.find(separator);
  if (separator.empty() || at == std::string_view::npos) return std::nullopt;
  return std::make_pair(std::string(concatenated.substr(0, at)),
                        std::string(concatenated.substr(at + separator.size())));
}

absl::StatusOr<std::vector<FinetunePair>> BuildFinetunePairs(
    std::span<const Document> aux, std::span<const Document> held_out,
    const EmbeddingTable& table, const WordDpConfig& config,
    std::string_view separator, int threads) {
  if (aux.empty()) return absl::InvalidArgumentError("auxiliary corpus is empty");
  if (separator.empty()) return absl::InvalidArgumentError("empty separator");
  std::set<std::string_view> held_ids;
  std::set<std::string_view> held_texts;
  for (const Document& d : held_out) {
    held_ids.insert(d.id);
    held_texts.insert(d.text);
  }
  std::vector<DocumentRef> refs;
  for (const Document& d : aux) {
    if (held_ids.contains(d.id) || held_texts.contains(d.text)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "auxiliary document ", d.id, " overlaps the held-out split"));
    }
    refs.push_back({d.id, d.text});
  }
  absl::StatusOr<std::vector<SanitizationRecord>> records =
      SanitizeWordLevelBatch(refs, table, config, threads);
  if (!records.ok()) return records.status();

  std::vector<std::string_view> texts;
  for (const SanitizationRecord& r : *records) {
    texts.push_back(r.original);
    texts.push_back(r.sanitized);
  }
  const std::string sep = ChooseSeparator(separator, texts);

  std::vector<FinetunePair> pairs;
  pairs.reserve(records->size());
  for (const SanitizationRecord& r : *records) {
    FinetunePair p;
    p.doc_id = r.doc_id;
    p.sanitized = r.sanitized;
    p.original = r.original;
    p.separator = sep;
    p.concatenated = absl::StrCat(r.sanitized, sep, r.original);
    p.seed = config.seed;
    p.stream_seed = DeriveStreamSeed(config.seed, r.doc_id);
    p.budget = config.epsilon;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

absl::StatusOr<std::vector<AttackResult>> RunGenerationEval(
    std::span<const SanitizationRecord> targets, LlmGateway& gateway,
    const PiiTagger& tagger, const GenerationConfig& config) {
  if (config.separator.empty()) {
    return absl::InvalidArgumentError("empty separator");
  }
  if (!gateway.HasModel(config.model)) {
    return absl::NotFoundError(
        absl::StrCat("model '", config.model, "' is not registered"));
  }
  return RunAttack(
      targets, AttackKind::kWhiteboxFinetune, config.model, gateway, tagger,
      config.run,
      [&](const SanitizationRecord& target) -> absl::StatusOr<std::string> {
        ChatRequest request;
        request.model = config.model;
        request.messages = {
            {"user", absl::StrCat(target.sanitized, config.separator)}};
        request.temperature = config.temperature;
        request.max_tokens = config.max_tokens;
        absl::StatusOr<ChatResponse> response = gateway.Complete(request);
        if (!response.ok()) return response.status();
        std::string text = response->content;
        if (auto parts = SplitOnSeparator(text, config.separator)) {
          text = std::move(parts->second);
        }
        if (text.empty()) {
          return absl::DataLossError("generation endpoint returned no text");
        }
        return text;
      });
}

absl::StatusOr<CorpusReport> EvaluateResults(
    std::span<const AttackResult> results, const PiiTagger& tagger) {
  if (results.empty()) {
    return absl::InvalidArgumentError("no attack results to evaluate");
  }
  std::vector<DocMetrics> metrics;
  std::vector<std::optional<int>> scores;
  std::vector<PiiTriple> triples;
  int64_t errors = 0;
  for (const AttackResult& r : results) {
    if (r.model != results[0].model || r.mechanism != results[0].mechanism ||
        r.budget != results[0].budget) {
      return absl::InvalidArgumentError(
          "results mix models, mechanisms or budgets; evaluate them separately");
    }
    if (!r.error.empty() || !r.metrics) {
      ++errors;
      continue;
    }
    metrics.push_back(*r.metrics);
    scores.push_back(r.score);
    PiiTriple t;
    for (auto [text, set] :
         {std::pair{&r.original, &t.original},
          std::pair{&r.sanitized, &t.sanitized},
          std::pair{&r.reconstructed, &t.reconstructed}}) {
      absl::StatusOr<PiiSet> tagged = TagSet(*text, tagger);
      if (!tagged.ok()) return tagged.status();
      *set = *std::move(tagged);
    }
    triples.push_back(std::move(t));
  }
  if (metrics.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("all ", results.size(), " results errored"));
  }
  absl::StatusOr<CorpusReport> report = Aggregate(metrics, scores);
  if (!report.ok()) return report.status();
  report->model = results[0].model;
  report->mechanism = results[0].mechanism;
  report->budget = results[0].budget;
  report->n_errors = errors;
  report->per_class = PerClassBreakdown(triples);
  return report;
}

}  // namespace dprecon
