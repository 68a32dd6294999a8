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

#ifndef DPRECON_LLM_GATEWAY_H_
#define DPRECON_LLM_GATEWAY_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/time/time.h"
#include "json.hpp"

namespace dprecon {

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 256;
  // Part of the cache key but never sent. Callers bump it to deliberately
  // re-ask an identical request (e.g. after an unparseable judge reply).
  int cache_salt = 0;

  // Canonical serialization of every field; the cache key is its SHA-256.
  nlohmann::json CanonicalJson() const;
  std::string Hash() const;
};

absl::Status ValidateChatRequest(const ChatRequest& request);

// OpenAI-compatible chat-completions request body. `wire_model` replaces the
// logical model id when the endpoint names the model differently.
nlohmann::json ChatCompletionsBody(const ChatRequest& request,
                                   std::string_view wire_model = "");

enum class ResponseSource { kNetwork, kCache };

struct ChatResponse {
  std::string content;
  std::string finish_reason;
  int64_t prompt_tokens = 0;
  int64_t completion_tokens = 0;
  double latency_ms = 0.0;
  ResponseSource source = ResponseSource::kNetwork;
  // The endpoint's response body exactly as received.
  std::string raw_body;
};

// Validates a chat-completions response body against the subset of the
// schema the toolkit relies on and extracts the first choice.
absl::StatusOr<ChatResponse> ParseChatCompletionsBody(std::string_view body);

// Builds a minimal well-formed chat-completions response body.
std::string MakeChatCompletionsBody(std::string_view content,
                                    std::string_view model = "mock",
                                    std::string_view finish_reason = "stop");

struct HttpReply {
  int status = 0;
  std::string body;
};

// One endpoint. A non-OK status means the request never produced an HTTP
// response (connection refused, timeout); HTTP-level failures come back as a
// reply carrying the status code.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual absl::StatusOr<HttpReply> Post(const ChatRequest& request) = 0;
};

struct HttpEndpoint {
  // e.g. "https://api.openai.com" or "http://127.0.0.1:8000".
  std::string base_url;
  std::string path = "/v1/chat/completions";
  // Name of the environment variable holding the bearer token. Empty for
  // unauthenticated local servers.
  std::string api_key_env;
  std::string wire_model;
  absl::Duration timeout = absl::Seconds(120);
};

// Chat-completions over HTTP(S). The credential is read from the
// environment on every call and scrubbed from any text that leaves this
// class.
class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(HttpEndpoint endpoint);
  absl::StatusOr<HttpReply> Post(const ChatRequest& request) override;

 private:
  HttpEndpoint endpoint_;
};

// Replaces every occurrence of `secret` in `text`.
std::string Redact(std::string_view text, std::string_view secret);

struct RetryPolicy {
  int max_attempts = 5;
  absl::Duration initial_backoff = absl::Milliseconds(500);
  double multiplier = 2.0;
  absl::Duration max_backoff = absl::Seconds(30);
};

// Delay before retry number `retry` (1-based):
// min(initial_backoff * multiplier^(retry-1), max_backoff).
absl::Duration BackoffDelay(const RetryPolicy& policy, int retry);

// HTTP statuses worth retrying: 408, 429 and 5xx.
bool IsTransientHttpStatus(int status);

struct GatewayOptions {
  // Content-addressed response cache; empty disables caching.
  std::string cache_dir;
  int max_in_flight = 8;
  RetryPolicy retry;
  // Injected so tests can run the backoff schedule on a fake clock.
  std::function<void(absl::Duration)> sleep;
};

// Cached, rate-limited front door to every chat endpoint. Safe for
// concurrent callers. Identical requests in flight at the same time share a
// single network call.
class LlmGateway {
 public:
  explicit LlmGateway(GatewayOptions options);

  void RegisterModel(const std::string& model_id,
                     std::shared_ptr<ChatTransport> transport);
  bool HasModel(const std::string& model_id) const;

  // Returns the cached response for the request hash when present. On a miss
  // the request goes to the model's transport, retrying transient failures
  // with exponential backoff; successful nonempty responses are stored.
  absl::StatusOr<ChatResponse> Complete(const ChatRequest& request);

  int64_t network_calls() const { return network_calls_.load(); }
  int64_t cache_hits() const { return cache_hits_.load(); }
  int max_observed_in_flight() const { return max_in_flight_seen_.load(); }
  const GatewayOptions& options() const { return options_; }

 private:
  using Result = absl::StatusOr<ChatResponse>;

  Result CompleteUncoalesced(const ChatRequest& request,
                             const std::string& hash);
  Result SendWithRetries(ChatTransport& transport, const ChatRequest& request);
  std::optional<ChatResponse> LoadCached(const std::string& hash) const;
  void StoreCached(const std::string& hash, const ChatRequest& request,
                   const ChatResponse& response) const;
  std::string CachePath(const std::string& hash) const;

  GatewayOptions options_;
  std::map<std::string, std::shared_ptr<ChatTransport>> transports_;
  std::counting_semaphore<> slots_;

  std::mutex inflight_mu_;
  std::map<std::string, std::shared_future<Result>> inflight_;

  std::atomic<int64_t> network_calls_{0};
  std::atomic<int64_t> cache_hits_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_seen_{0};
};

}  // namespace dprecon

#endif  // DPRECON_LLM_GATEWAY_H_
