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

#include "dprecon/llm_gateway.h"

#include "httplib.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "absl/strings/str_cat.h"
#include "dprecon/io.h"
#include "dprecon/text_util.h"

namespace dprecon {
namespace {

constexpr size_t kMaxErrorBodyBytes = 512;

std::string_view SourceName(ResponseSource source) {
  return source == ResponseSource::kCache ? "cache" : "network";
}

void DefaultSleep(absl::Duration d) {
  std::this_thread::sleep_for(absl::ToChronoMicroseconds(d));
}

}  // namespace

nlohmann::json ChatRequest::CanonicalJson() const {
  nlohmann::json msgs = nlohmann::json::array();
  for (const ChatMessage& m : messages) {
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  }
  // nlohmann::json objects are key-sorted, so the dump is canonical.
  return {{"model", model},
          {"messages", std::move(msgs)},
          {"temperature", temperature},
          {"max_tokens", max_tokens},
          {"cache_salt", cache_salt}};
}

std::string ChatRequest::Hash() const {
  return Sha256Hex(CanonicalJson().dump(
      -1, ' ', false, nlohmann::json::error_handler_t::replace));
}

absl::Status ValidateChatRequest(const ChatRequest& request) {
  if (request.model.empty()) {
    return absl::InvalidArgumentError("chat request has no model id");
  }
  if (request.messages.empty()) {
    return absl::InvalidArgumentError("chat request has no messages");
  }
  for (const ChatMessage& m : request.messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid chat role '", m.role, "'"));
    }
  }
  if (!(request.temperature >= 0.0) || !std::isfinite(request.temperature)) {
    return absl::InvalidArgumentError("temperature must be >= 0");
  }
  if (request.max_tokens < 1) {
    return absl::InvalidArgumentError("max_tokens must be >= 1");
  }
  return absl::OkStatus();
}

nlohmann::json ChatCompletionsBody(const ChatRequest& request,
                                   std::string_view wire_model) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const ChatMessage& m : request.messages) {
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  }
  return {{"model", wire_model.empty() ? request.model : wire_model},
          {"messages", std::move(msgs)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens},
          {"stream", false}};
}

absl::StatusOr<ChatResponse> ParseChatCompletionsBody(std::string_view body) {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::DataLossError("chat response is not a JSON object");
  }
  auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    return absl::DataLossError("chat response has no 'choices' array");
  }
  const nlohmann::json& first = (*choices)[0];
  auto message = first.find("message");
  if (message == first.end() || !message->is_object()) {
    return absl::DataLossError("chat response choice has no 'message'");
  }
  auto content = message->find("content");
  if (content == message->end() ||
      !(content->is_string() || content->is_null())) {
    return absl::DataLossError("chat response message has no 'content'");
  }
  ChatResponse response;
  if (content->is_string()) response.content = content->get<std::string>();
  if (auto fr = first.find("finish_reason");
      fr != first.end() && fr->is_string()) {
    response.finish_reason = fr->get<std::string>();
  }
  if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
    response.prompt_tokens = usage->value("prompt_tokens", int64_t{0});
    response.completion_tokens = usage->value("completion_tokens", int64_t{0});
  }
  response.raw_body = std::string(body);
  return response;
}

std::string MakeChatCompletionsBody(std::string_view content,
                                    std::string_view model,
                                    std::string_view finish_reason) {
  nlohmann::json j = {
      {"object", "chat.completion"},
      {"model", model},
      {"choices",
       {{{"index", 0},
         {"message", {{"role", "assistant"}, {"content", content}}},
         {"finish_reason", finish_reason}}}},
      {"usage",
       {{"prompt_tokens", 0},
        {"completion_tokens", static_cast<int64_t>(
                                  SplitWhitespace(content).size())}}}};
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string Redact(std::string_view text, std::string_view secret) {
  if (secret.empty()) return std::string(text);
  return ReplaceAll(text, secret, "[REDACTED]");
}

HttpChatTransport::HttpChatTransport(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {}

absl::StatusOr<HttpReply> HttpChatTransport::Post(const ChatRequest& request) {
  std::string key;
  if (!endpoint_.api_key_env.empty()) {
    const char* value = std::getenv(endpoint_.api_key_env.c_str());
    if (value == nullptr || *value == '\0') {
      return absl::UnauthenticatedError(absl::StrCat(
          "environment variable ", endpoint_.api_key_env, " is not set"));
    }
    key = value;
  }
  httplib::Client client(endpoint_.base_url);
  const auto timeout = absl::ToChronoMicroseconds(endpoint_.timeout);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  const std::string body =
      ChatCompletionsBody(request, endpoint_.wire_model)
          .dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  httplib::Result result =
      client.Post(endpoint_.path, headers, body, "application/json");
  if (!result) {
    return absl::UnavailableError(
        Redact(absl::StrCat("transport error talking to ", endpoint_.base_url,
                            ": ", httplib::to_string(result.error())),
               key));
  }
  return HttpReply{result->status, Redact(result->body, key)};
}

absl::Duration BackoffDelay(const RetryPolicy& policy, int retry) {
  if (retry < 1) return absl::ZeroDuration();
  const double factor = std::pow(policy.multiplier, retry - 1);
  absl::Duration delay = policy.initial_backoff * factor;
  return std::min(delay, policy.max_backoff);
}

bool IsTransientHttpStatus(int status) {
  return status == 408 || status == 429 || (status >= 500 && status <= 599);
}

LlmGateway::LlmGateway(GatewayOptions options)
    : options_(std::move(options)),
      slots_(std::max(options_.max_in_flight, 1)) {
  if (!options_.sleep) options_.sleep = DefaultSleep;
  if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
}

void LlmGateway::RegisterModel(const std::string& model_id,
                               std::shared_ptr<ChatTransport> transport) {
  transports_[model_id] = std::move(transport);
}

bool LlmGateway::HasModel(const std::string& model_id) const {
  return transports_.contains(model_id);
}

absl::StatusOr<ChatResponse> LlmGateway::Complete(const ChatRequest& request) {
  if (absl::Status s = ValidateChatRequest(request); !s.ok()) return s;
  const std::string hash = request.Hash();

  std::promise<Result> promise;
  std::shared_future<Result> shared;
  bool leader = false;
  {
    std::lock_guard<std::mutex> lock(inflight_mu_);
    auto it = inflight_.find(hash);
    if (it != inflight_.end()) {
      shared = it->second;
    } else {
      shared = promise.get_future().share();
      inflight_.emplace(hash, shared);
      leader = true;
    }
  }
  if (!leader) {
    Result result = shared.get();
    if (result.ok()) result->source = ResponseSource::kCache;
    return result;
  }
  Result result = CompleteUncoalesced(request, hash);
  promise.set_value(result);
  {
    std::lock_guard<std::mutex> lock(inflight_mu_);
    inflight_.erase(hash);
  }
  return result;
}

LlmGateway::Result LlmGateway::CompleteUncoalesced(const ChatRequest& request,
                                                   const std::string& hash) {
  if (std::optional<ChatResponse> cached = LoadCached(hash)) {
    cache_hits_.fetch_add(1);
    return *cached;
  }
  auto it = transports_.find(request.model);
  if (it == transports_.end()) {
    return absl::NotFoundError(
        absl::StrCat("no endpoint configured for model '", request.model,
                     "'"));
  }
  Result result = SendWithRetries(*it->second, request);
  if (result.ok() && !result->content.empty()) {
    StoreCached(hash, request, *result);
  }
  return result;
}

LlmGateway::Result LlmGateway::SendWithRetries(ChatTransport& transport,
                                               const ChatRequest& request) {
  const RetryPolicy& policy = options_.retry;
  absl::Status last;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    if (attempt > 1) options_.sleep(BackoffDelay(policy, attempt - 1));

    slots_.acquire();
    const int now = in_flight_.fetch_add(1) + 1;
    int seen = max_in_flight_seen_.load();
    while (now > seen && !max_in_flight_seen_.compare_exchange_weak(seen, now)) {
    }
    network_calls_.fetch_add(1);
    const auto start = std::chrono::steady_clock::now();
    absl::StatusOr<HttpReply> reply = transport.Post(request);
    const auto end = std::chrono::steady_clock::now();
    in_flight_.fetch_sub(1);
    slots_.release();

    if (!reply.ok()) {
      if (absl::IsUnauthenticated(reply.status()) ||
          absl::IsPermissionDenied(reply.status())) {
        return reply.status();
      }
      last = reply.status();
      continue;
    }
    if (reply->status == 401 || reply->status == 403) {
      return absl::UnauthenticatedError(absl::StrCat(
          "endpoint rejected credentials (HTTP ", reply->status, ")"));
    }
    if (IsTransientHttpStatus(reply->status)) {
      last = absl::UnavailableError(
          absl::StrCat("HTTP ", reply->status, ": ",
                       reply->body.substr(0, kMaxErrorBodyBytes)));
      continue;
    }
    if (reply->status < 200 || reply->status >= 300) {
      return absl::InvalidArgumentError(
          absl::StrCat("HTTP ", reply->status, ": ",
                       reply->body.substr(0, kMaxErrorBodyBytes)));
    }
    absl::StatusOr<ChatResponse> parsed = ParseChatCompletionsBody(reply->body);
    if (!parsed.ok()) return parsed.status();
    parsed->latency_ms =
        std::chrono::duration<double, std::milli>(end - start).count();
    parsed->source = ResponseSource::kNetwork;
    return parsed;
  }
  return absl::UnavailableError(
      absl::StrCat("exhausted ", policy.max_attempts,
                   " attempts; last failure: ", last.message()));
}

std::string LlmGateway::CachePath(const std::string& hash) const {
  return (std::filesystem::path(options_.cache_dir) / hash.substr(0, 2) /
          (hash + ".json"))
      .string();
}

std::optional<ChatResponse> LlmGateway::LoadCached(
    const std::string& hash) const {
  if (options_.cache_dir.empty()) return std::nullopt;
  absl::StatusOr<std::string> contents = ReadFile(CachePath(hash));
  if (!contents.ok()) return std::nullopt;
  nlohmann::json entry = nlohmann::json::parse(*contents, nullptr, false);
  if (entry.is_discarded() || !entry.contains("response_body")) {
    return std::nullopt;
  }
  absl::StatusOr<ChatResponse> response =
      ParseChatCompletionsBody(entry["response_body"].get<std::string>());
  if (!response.ok()) return std::nullopt;
  response->source = ResponseSource::kCache;
  return *response;
}

void LlmGateway::StoreCached(const std::string& hash,
                             const ChatRequest& request,
                             const ChatResponse& response) const {
  if (options_.cache_dir.empty()) return;
  nlohmann::json entry = {{"hash", hash},
                          {"request", request.CanonicalJson()},
                          {"response_body", response.raw_body},
                          {"stored_from", SourceName(response.source)}};
  // A failed cache write only costs a future network call.
  (void)WriteFileAtomic(
      CachePath(hash),
      entry.dump(2, ' ', false, nlohmann::json::error_handler_t::replace));
}

}  // namespace dprecon
