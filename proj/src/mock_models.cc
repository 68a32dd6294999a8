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

#include "dprecon/mock_models.h"

#include <algorithm>
#include <cctype>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dprecon/corpus.h"
#include "dprecon/text_util.h"

namespace dprecon {
namespace {

HttpReply Ok(std::string_view content) {
  return HttpReply{200, MakeChatCompletionsBody(content)};
}

// Sorted, deduplicated.
std::vector<std::string> WordSet(std::string_view text) {
  std::vector<std::string> words = MatchWords(text);
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

double Jaccard(const std::vector<std::string>& a,
               const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) /
         static_cast<double>(a.size() + b.size() - common);
}

}  // namespace

std::string LastUserMessage(const ChatRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend();
       ++it) {
    if (it->role == "user") return it->content;
  }
  return "";
}

absl::StatusOr<HttpReply> EchoTransport::Post(const ChatRequest& request) {
  return Ok(LastUserMessage(request));
}

absl::StatusOr<HttpReply> ConstantTransport::Post(const ChatRequest&) {
  return Ok(reply_);
}

std::vector<std::string> MatchWords(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : ToLowerUtf8(text)) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      current += c;
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

double WordJaccard(std::string_view a, std::string_view b) {
  return Jaccard(WordSet(a), WordSet(b));
}

MemorizingTransport::MemorizingTransport(std::vector<std::string> planted,
                                         double threshold)
    : planted_(std::move(planted)), threshold_(threshold) {
  planted_words_.reserve(planted_.size());
  for (const std::string& doc : planted_) planted_words_.push_back(WordSet(doc));
}

int MemorizingTransport::Match(std::string_view query) const {
  const std::vector<std::string> words = WordSet(query);
  int best = -1;
  double best_score = -1.0;
  for (size_t i = 0; i < planted_words_.size(); ++i) {
    const double score = Jaccard(words, planted_words_[i]);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  if (best < 0 || best_score < threshold_) return -1;
  return best;
}

absl::StatusOr<HttpReply> MemorizingTransport::Post(
    const ChatRequest& request) {
  const std::string query = LastUserMessage(request);
  const int match = Match(query);
  return Ok(match >= 0 ? planted_[static_cast<size_t>(match)] : query);
}

absl::StatusOr<HttpReply> ContinuationEchoTransport::Post(
    const ChatRequest& request) {
  std::string prompt = LastUserMessage(request);
  const size_t cut = prompt.find(separator_);
  if (cut != std::string::npos) prompt.resize(cut);
  return Ok(prompt);
}

absl::StatusOr<std::shared_ptr<ChatTransport>> TransportFromConfig(
    const nlohmann::json& entry) {
  if (!entry.is_object()) {
    return absl::InvalidArgumentError("model entry must be a JSON object");
  }
  const std::string type = entry.value("type", std::string("openai"));
  if (entry.contains("api_key") || entry.contains("authorization")) {
    return absl::InvalidArgumentError(
        "credentials are not accepted in config files; name an environment "
        "variable with api_key_env");
  }
  if (type == "openai") {
    HttpEndpoint endpoint;
    endpoint.base_url = entry.value("base_url", std::string());
    if (endpoint.base_url.empty()) {
      return absl::InvalidArgumentError("openai model entry needs base_url");
    }
    endpoint.path = entry.value("path", endpoint.path);
    endpoint.api_key_env = entry.value("api_key_env", std::string());
    endpoint.wire_model = entry.value("wire_model", std::string());
    endpoint.timeout = absl::Seconds(entry.value("timeout_seconds", 120.0));
    return std::make_shared<HttpChatTransport>(std::move(endpoint));
  }
  if (type == "mock_echo") return std::make_shared<EchoTransport>();
  if (type == "mock_constant") {
    return std::make_shared<ConstantTransport>(
        entry.value("reply", std::string()));
  }
  if (type == "mock_memorize") {
    const std::string path = entry.value("corpus", std::string());
    absl::StatusOr<std::vector<Document>> docs = LoadCorpus(path);
    if (!docs.ok()) return docs.status();
    std::vector<std::string> planted;
    for (Document& d : *docs) planted.push_back(std::move(d.text));
    return std::make_shared<MemorizingTransport>(
        std::move(planted), entry.value("threshold", 0.1));
  }
  if (type == "mock_continuation_echo") {
    return std::make_shared<ContinuationEchoTransport>(
        entry.value("separator", std::string("\n###\n")));
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown model type '", type, "'"));
}

absl::StatusOr<std::unique_ptr<LlmGateway>> GatewayFromConfig(
    const nlohmann::json& config) {
  GatewayOptions options;
  options.cache_dir = config.value("cache_dir", std::string());
  options.max_in_flight = config.value("max_in_flight", 8);
  if (auto retry = config.find("retry"); retry != config.end()) {
    options.retry.max_attempts = retry->value("max_attempts", 5);
    options.retry.initial_backoff =
        absl::Milliseconds(retry->value("initial_backoff_ms", 500.0));
    options.retry.multiplier = retry->value("multiplier", 2.0);
    options.retry.max_backoff =
        absl::Milliseconds(retry->value("max_backoff_ms", 30000.0));
  }
  auto gateway = std::make_unique<LlmGateway>(std::move(options));
  if (auto models = config.find("models"); models != config.end()) {
    if (!models->is_object()) {
      return absl::InvalidArgumentError("gateway.models must be an object");
    }
    for (const auto& [id, entry] : models->items()) {
      absl::StatusOr<std::shared_ptr<ChatTransport>> transport =
          TransportFromConfig(entry);
      if (!transport.ok()) {
        return absl::Status(transport.status().code(),
                            absl::StrCat("model '", id,
                                         "': ", transport.status().message()));
      }
      gateway->RegisterModel(id, *std::move(transport));
    }
  }
  return gateway;
}

}  // namespace dprecon
