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

#include "dprecon/sentence_dp.h"

#include "httplib.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dprecon/text_util.h"

namespace dprecon {

absl::Status ValidateSentenceDpConfig(const SentenceDpConfig& config) {
  if (!(config.temperature > 0.0)) {
    return absl::InvalidArgumentError("temperature must be positive");
  }
  if (!(config.clip_bound > 0.0)) {
    return absl::InvalidArgumentError("clip bound must be positive");
  }
  if (config.max_tokens < 1) {
    return absl::InvalidArgumentError("max_tokens must be >= 1");
  }
  if (CountOccurrences(config.paraphrase_template, "{text}") != 1) {
    return absl::InvalidArgumentError(
        "paraphrase template must contain exactly one {text} slot");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> GenPrompt(std::string_view tmpl,
                                      std::string_view text) {
  if (CountOccurrences(tmpl, "{text}") != 1) {
    return absl::InvalidArgumentError(
        "paraphrase template must contain exactly one {text} slot");
  }
  return ReplaceAll(tmpl, "{text}", text);
}

absl::StatusOr<std::vector<double>> ClipLogits(std::span<const double> logits,
                                               double clip_bound) {
  if (!(clip_bound > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("clip bound must be positive, got ", clip_bound));
  }
  double norm2 = 0.0;
  for (double u : logits) {
    if (!std::isfinite(u)) {
      return absl::InvalidArgumentError("logits must be finite");
    }
    norm2 += u * u;
  }
  std::vector<double> out(logits.begin(), logits.end());
  const double norm = std::sqrt(norm2);
  if (norm > clip_bound) {
    for (double& u : out) u = u * clip_bound / norm;
  }
  return out;
}

absl::StatusOr<std::vector<double>> TemperatureDistribution(
    std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("temperature must be positive, got ", temperature));
  }
  if (logits.empty()) {
    return absl::InvalidArgumentError("logit vector is empty");
  }
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  long double sum = 0.0L;
  for (size_t j = 0; j < logits.size(); ++j) {
    p[j] = std::exp((logits[j] - max) / temperature);
    sum += p[j];
  }
  for (double& x : p) x = static_cast<double>(x / sum);
  return p;
}

size_t SampleIndex(std::span<const double> probabilities, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double cumulative = 0.0;
  size_t last_positive = 0;
  for (size_t j = 0; j < probabilities.size(); ++j) {
    if (probabilities[j] <= 0.0) continue;
    cumulative += probabilities[j];
    last_positive = j;
    if (u < cumulative) return j;
  }
  // Rounding left the cumulative sum just below u.
  return last_positive;
}

absl::StatusOr<double> LdpBudget(int64_t tokens, double clip_bound,
                                 double temperature) {
  if (tokens < 0) {
    return absl::InvalidArgumentError("token count must be nonnegative");
  }
  if (!(clip_bound > 0.0) || !(temperature > 0.0)) {
    return absl::InvalidArgumentError(
        "clip bound and temperature must be positive");
  }
  return 2.0 * static_cast<double>(tokens) * clip_bound / temperature;
}

absl::StatusOr<SanitizationRecord> DpDecode(std::string_view doc_id,
                                            std::string_view text,
                                            LogitProvider& provider,
                                            const SentenceDpConfig& config,
                                            std::string_view timestamp) {
  if (absl::Status s = ValidateSentenceDpConfig(config); !s.ok()) return s;
  if (!provider.full_vocabulary()) {
    return absl::FailedPreconditionError(
        "logit provider exposes only top-k logits; clipping needs the full "
        "vocabulary");
  }
  absl::StatusOr<std::string> prompt =
      GenPrompt(config.paraphrase_template, text);
  if (!prompt.ok()) return prompt.status();
  absl::StatusOr<std::vector<int>> prefix = provider.Encode(*prompt);
  if (!prefix.ok()) return prefix.status();

  Rng rng = MakeStreamRng(config.seed, doc_id);
  std::vector<int> output;
  int64_t steps = 0;
  for (int i = 0; i < config.max_tokens; ++i) {
    absl::StatusOr<std::vector<double>> logits;
    for (int attempt = 1; attempt <= config.max_provider_attempts; ++attempt) {
      logits = provider.NextLogits(*prefix);
      if (logits.ok()) break;
    }
    if (!logits.ok()) {
      return absl::UnavailableError(absl::StrCat(
          "logit provider failed after ", config.max_provider_attempts,
          " attempts at step ", i, ": ", logits.status().message()));
    }
    if (logits->size() != provider.vocab_size()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "logit vector has ", logits->size(), " entries but the vocabulary has ",
          provider.vocab_size()));
    }
    absl::StatusOr<std::vector<double>> clipped =
        ClipLogits(*logits, config.clip_bound);
    if (!clipped.ok()) return clipped.status();
    absl::StatusOr<std::vector<double>> p =
        TemperatureDistribution(*clipped, config.temperature);
    if (!p.ok()) return p.status();
    const int token = static_cast<int>(SampleIndex(*p, rng));
    ++steps;
    if (provider.eos_token() && token == *provider.eos_token()) break;
    output.push_back(token);
    prefix->push_back(token);
  }

  absl::StatusOr<std::string> decoded = provider.Decode(output);
  if (!decoded.ok()) return decoded.status();
  absl::StatusOr<double> epsilon =
      LdpBudget(steps, config.clip_bound, config.temperature);
  if (!epsilon.ok()) return epsilon.status();

  SanitizationRecord record;
  record.doc_id = std::string(doc_id);
  record.original = std::string(text);
  record.sanitized = *std::move(decoded);
  record.mechanism = Mechanism::kSentenceLevelExact;
  record.budget = config.temperature;
  record.seed = config.seed;
  record.timestamp = std::string(timestamp);
  record.emitted_tokens = steps;
  record.clip_bound = config.clip_bound;
  record.ldp_epsilon = *epsilon;
  record.template_hash = Sha256Hex(config.paraphrase_template);
  return record;
}

absl::StatusOr<SanitizationRecord> ApiParaphrase(
    std::string_view doc_id, std::string_view text, LlmGateway& gateway,
    const ApiParaphraseConfig& config, std::string_view timestamp) {
  if (!(config.temperature > 0.0)) {
    return absl::InvalidArgumentError("temperature must be positive");
  }
  absl::StatusOr<std::string> prompt =
      GenPrompt(config.paraphrase_template, text);
  if (!prompt.ok()) return prompt.status();

  ChatRequest request;
  request.model = config.model;
  request.messages = {{"user", *prompt}};
  request.temperature = config.temperature;
  request.max_tokens = config.max_tokens;

  std::string paraphrase;
  for (int attempt = 0; attempt <= config.empty_retries; ++attempt) {
    request.cache_salt = attempt;
    absl::StatusOr<ChatResponse> response = gateway.Complete(request);
    if (!response.ok()) return response.status();
    if (!response->content.empty()) {
      paraphrase = response->content;
      break;
    }
  }
  if (paraphrase.empty()) {
    return absl::UnavailableError(
        absl::StrCat("endpoint returned an empty paraphrase ",
                     config.empty_retries + 1, " times"));
  }

  SanitizationRecord record;
  record.doc_id = std::string(doc_id);
  record.original = std::string(text);
  record.sanitized = std::move(paraphrase);
  record.mechanism = Mechanism::kSentenceLevelApi;
  record.budget = config.temperature;
  record.timestamp = std::string(timestamp);
  record.emitted_tokens =
      static_cast<int64_t>(SplitWhitespace(record.sanitized).size());
  record.template_hash = Sha256Hex(config.paraphrase_template);
  record.model = config.model;
  return record;
}

absl::StatusOr<std::unique_ptr<HttpLogitProvider>> HttpLogitProvider::Connect(
    std::string base_url) {
  std::unique_ptr<HttpLogitProvider> provider(
      new HttpLogitProvider(std::move(base_url)));
  httplib::Client client(provider->base_url_);
  httplib::Result result = client.Get("/info");
  if (!result) {
    return absl::UnavailableError(
        absl::StrCat("cannot reach logit server ", provider->base_url_, ": ",
                     httplib::to_string(result.error())));
  }
  if (result->status != 200) {
    return absl::UnavailableError(
        absl::StrCat("logit server /info returned HTTP ", result->status));
  }
  nlohmann::json info = nlohmann::json::parse(result->body, nullptr, false);
  if (info.is_discarded() || !info.contains("vocab_size") ||
      !info["vocab_size"].is_number_unsigned()) {
    return absl::DataLossError("logit server /info lacks vocab_size");
  }
  provider->vocab_size_ = info["vocab_size"].get<size_t>();
  if (auto eos = info.find("eos_token_id");
      eos != info.end() && eos->is_number_integer()) {
    provider->eos_ = eos->get<int>();
  }
  provider->full_vocabulary_ = info.value("full_vocabulary", true);
  return provider;
}

absl::StatusOr<nlohmann::json> HttpLogitProvider::PostJson(
    const std::string& path, const nlohmann::json& body) {
  httplib::Client client(base_url_);
  httplib::Result result = client.Post(path, body.dump(), "application/json");
  if (!result) {
    return absl::UnavailableError(absl::StrCat(
        "logit server ", path, ": ", httplib::to_string(result.error())));
  }
  if (result->status != 200) {
    return absl::UnavailableError(
        absl::StrCat("logit server ", path, " returned HTTP ", result->status));
  }
  nlohmann::json j = nlohmann::json::parse(result->body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::DataLossError(
        absl::StrCat("logit server ", path, " returned malformed JSON"));
  }
  return j;
}

absl::StatusOr<std::vector<int>> HttpLogitProvider::Encode(
    std::string_view text) {
  absl::StatusOr<nlohmann::json> j = PostJson("/tokenize", {{"text", text}});
  if (!j.ok()) return j.status();
  if (!j->contains("tokens") || !(*j)["tokens"].is_array()) {
    return absl::DataLossError("/tokenize response lacks tokens");
  }
  return (*j)["tokens"].get<std::vector<int>>();
}

absl::StatusOr<std::vector<double>> HttpLogitProvider::NextLogits(
    std::span<const int> prefix) {
  absl::StatusOr<nlohmann::json> j = PostJson(
      "/logits", {{"tokens", std::vector<int>(prefix.begin(), prefix.end())}});
  if (!j.ok()) return j.status();
  if (!j->contains("logits") || !(*j)["logits"].is_array()) {
    return absl::DataLossError("/logits response lacks logits");
  }
  return (*j)["logits"].get<std::vector<double>>();
}

absl::StatusOr<std::string> HttpLogitProvider::Decode(
    std::span<const int> tokens) {
  absl::StatusOr<nlohmann::json> j = PostJson(
      "/detokenize",
      {{"tokens", std::vector<int>(tokens.begin(), tokens.end())}});
  if (!j.ok()) return j.status();
  if (!j->contains("text") || !(*j)["text"].is_string()) {
    return absl::DataLossError("/detokenize response lacks text");
  }
  return (*j)["text"].get<std::string>();
}

}  // namespace dprecon
