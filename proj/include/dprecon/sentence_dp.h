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

#ifndef DPRECON_SENTENCE_DP_H_
#define DPRECON_SENTENCE_DP_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dprecon/llm_gateway.h"
#include "dprecon/rng.h"
#include "dprecon/sanitization_record.h"

namespace dprecon {

inline constexpr std::string_view kDefaultParaphraseTemplate =
    "Paraphrase the following text: {text}";

// Full next-token logits from a language model. Implementations must return
// vocab_size() values for every prefix and be deterministic for a fixed
// prefix.
class LogitProvider {
 public:
  virtual ~LogitProvider() = default;

  virtual size_t vocab_size() const = 0;
  virtual std::optional<int> eos_token() const = 0;
  // False for endpoints that only expose top-k logits. Clipping needs the
  // norm of the full vector, so such providers are rejected.
  virtual bool full_vocabulary() const { return true; }

  virtual absl::StatusOr<std::vector<int>> Encode(std::string_view text) = 0;
  virtual absl::StatusOr<std::vector<double>> NextLogits(
      std::span<const int> prefix) = 0;
  virtual absl::StatusOr<std::string> Decode(std::span<const int> tokens) = 0;
};

// Logit provider backed by a local inference server:
//   GET  /info        -> {"vocab_size": n, "eos_token_id": k|null,
//                         "full_vocabulary": true}
//   POST /tokenize    {"text": s}        -> {"tokens": [ids]}
//   POST /logits      {"tokens": [ids]}  -> {"logits": [n floats]}
//   POST /detokenize  {"tokens": [ids]}  -> {"text": s}
class HttpLogitProvider : public LogitProvider {
 public:
  // Queries /info once.
  static absl::StatusOr<std::unique_ptr<HttpLogitProvider>> Connect(
      std::string base_url);

  size_t vocab_size() const override { return vocab_size_; }
  std::optional<int> eos_token() const override { return eos_; }
  bool full_vocabulary() const override { return full_vocabulary_; }

  absl::StatusOr<std::vector<int>> Encode(std::string_view text) override;
  absl::StatusOr<std::vector<double>> NextLogits(
      std::span<const int> prefix) override;
  absl::StatusOr<std::string> Decode(std::span<const int> tokens) override;

 private:
  explicit HttpLogitProvider(std::string base_url)
      : base_url_(std::move(base_url)) {}
  absl::StatusOr<nlohmann::json> PostJson(const std::string& path,
                                          const nlohmann::json& body);

  std::string base_url_;
  size_t vocab_size_ = 0;
  std::optional<int> eos_;
  bool full_vocabulary_ = true;
};

struct SentenceDpConfig {
  double temperature = 1.0;
  // Bound on the L2 norm of the logit vector.
  double clip_bound = 50.0;
  // Maximum number of sampled tokens.
  int max_tokens = 64;
  std::string paraphrase_template = std::string(kDefaultParaphraseTemplate);
  uint64_t seed = 0;
  // Attempts per NextLogits call before the decode gives up.
  int max_provider_attempts = 3;
};

absl::Status ValidateSentenceDpConfig(const SentenceDpConfig& config);

// Fills the single {text} slot of a paraphrase template.
absl::StatusOr<std::string> GenPrompt(std::string_view tmpl,
                                      std::string_view text);

// u * min(1, C / ‖u‖₂).
absl::StatusOr<std::vector<double>> ClipLogits(std::span<const double> logits,
                                               double clip_bound);

// softmax(u / T), evaluated with max subtraction.
absl::StatusOr<std::vector<double>> TemperatureDistribution(
    std::span<const double> logits, double temperature);

// Inverse-CDF draw from a probability vector.
size_t SampleIndex(std::span<const double> probabilities, Rng& rng);

// Budget of sampling `tokens` tokens from clipped logits at temperature T:
// 2 * tokens * C / T. Zero tokens consume nothing.
absl::StatusOr<double> LdpBudget(int64_t tokens, double clip_bound,
                                 double temperature);

// Exponential-mechanism paraphrase: up to max_tokens rounds of
// clip -> temperature softmax -> sample, appending each token to both the
// output and the model prefix; stops after an end-of-sequence token.
// Randomness comes from the (config.seed, doc_id) stream.
absl::StatusOr<SanitizationRecord> DpDecode(std::string_view doc_id,
                                            std::string_view text,
                                            LogitProvider& provider,
                                            const SentenceDpConfig& config,
                                            std::string_view timestamp = "");

struct ApiParaphraseConfig {
  std::string model;
  double temperature = 1.0;
  std::string paraphrase_template = std::string(kDefaultParaphraseTemplate);
  int max_tokens = 256;
  // Extra asks after an empty completion.
  int empty_retries = 2;
};

// Paraphrase through a chat-completion endpoint at sampling temperature T.
// No clipping is possible here; the record is labeled sentence_level_api.
absl::StatusOr<SanitizationRecord> ApiParaphrase(
    std::string_view doc_id, std::string_view text, LlmGateway& gateway,
    const ApiParaphraseConfig& config, std::string_view timestamp = "");

}  // namespace dprecon

#endif  // DPRECON_SENTENCE_DP_H_
