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

#ifndef DPRECON_MOCK_MODELS_H_
#define DPRECON_MOCK_MODELS_H_

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dprecon/llm_gateway.h"
#include "json.hpp"

namespace dprecon {

// Hermetic stand-ins for chat endpoints. All of them answer with a
// well-formed chat-completions body, so the gateway's schema validation runs
// exactly as it does against a real server.

// Content of the last user message, or empty.
std::string LastUserMessage(const ChatRequest& request);

// Replies with the last user message verbatim.
class EchoTransport : public ChatTransport {
 public:
  absl::StatusOr<HttpReply> Post(const ChatRequest& request) override;
};

// Replies with a fixed string.
class ConstantTransport : public ChatTransport {
 public:
  explicit ConstantTransport(std::string reply) : reply_(std::move(reply)) {}
  absl::StatusOr<HttpReply> Post(const ChatRequest& request) override;

 private:
  std::string reply_;
};

// Lowercased alphanumeric word set used for fuzzy matching.
std::vector<std::string> MatchWords(std::string_view text);

// Jaccard similarity of the MatchWords sets of `a` and `b`.
double WordJaccard(std::string_view a, std::string_view b);

// A model that has memorized a planted corpus: it answers with the planted
// document most similar (word Jaccard) to the last user message, or echoes
// the message when no planted document reaches `threshold`. Ties go to the
// earliest planted document.
class MemorizingTransport : public ChatTransport {
 public:
  MemorizingTransport(std::vector<std::string> planted, double threshold);
  absl::StatusOr<HttpReply> Post(const ChatRequest& request) override;

  // Index of the matched planted document, or -1.
  int Match(std::string_view query) const;

 private:
  std::vector<std::string> planted_;
  std::vector<std::vector<std::string>> planted_words_;
  double threshold_;
};

// Behaves like a generation server fine-tuned on identity pairs: given
// "x + separator" it continues with x.
class ContinuationEchoTransport : public ChatTransport {
 public:
  explicit ContinuationEchoTransport(std::string separator)
      : separator_(std::move(separator)) {}
  absl::StatusOr<HttpReply> Post(const ChatRequest& request) override;

 private:
  std::string separator_;
};

// Builds a transport from a model entry of the gateway config:
//   {"type": "openai", "base_url": ..., "path": ..., "api_key_env": ...,
//    "wire_model": ..., "timeout_seconds": ...}
//   {"type": "mock_echo"}
//   {"type": "mock_constant", "reply": "..."}
//   {"type": "mock_memorize", "corpus": "<jsonl path>", "threshold": 0.1}
//   {"type": "mock_continuation_echo", "separator": "\n###\n"}
absl::StatusOr<std::shared_ptr<ChatTransport>> TransportFromConfig(
    const nlohmann::json& entry);

// Builds a gateway from {"cache_dir", "max_in_flight", "retry": {...},
// "models": {id: entry}}.
absl::StatusOr<std::unique_ptr<LlmGateway>> GatewayFromConfig(
    const nlohmann::json& config);

}  // namespace dprecon

#endif  // DPRECON_MOCK_MODELS_H_
