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

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "absl/strings/str_cat.h"
#include "dprecon/io.h"
#include "dprecon/mock_models.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "local_chat_server.h"
#include "status_matchers.h"

namespace dprecon {
namespace {

using ::dprecon::testing::IsOk;
using ::dprecon::testing::StatusIs;
using ::testing::ElementsAre;
using ::testing::HasSubstr;
using ::testing::Not;

ChatRequest UserRequest(std::string model, std::string content) {
  ChatRequest r;
  r.model = std::move(model);
  r.messages = {{"user", std::move(content)}};
  return r;
}

// Replays a fixed list of (status, body) replies, then repeats the last.
class ScriptedTransport : public ChatTransport {
 public:
  explicit ScriptedTransport(std::vector<HttpReply> replies,
                             std::chrono::milliseconds delay = {})
      : replies_(std::move(replies)), delay_(delay) {}
  absl::StatusOr<HttpReply> Post(const ChatRequest&) override {
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    const int i = calls_.fetch_add(1);
    return replies_[std::min<size_t>(i, replies_.size() - 1)];
  }
  int calls() const { return calls_.load(); }

 private:
  std::vector<HttpReply> replies_;
  std::chrono::milliseconds delay_;
  std::atomic<int> calls_{0};
};

HttpReply Ok(std::string content) {
  return {200, MakeChatCompletionsBody(content)};
}

std::string FreshDir(std::string_view name) {
  const std::string dir = absl::StrCat(::testing::TempDir(), "/gw_", std::string(name));
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(ChatRequestTest, HashCoversEveryField) {
  const ChatRequest base = UserRequest("m", "hi");
  EXPECT_EQ(base.Hash(), UserRequest("m", "hi").Hash());
  EXPECT_EQ(base.Hash().size(), 64u);
  ChatRequest r = base;
  r.model = "n";
  EXPECT_NE(r.Hash(), base.Hash());
  r = base;
  r.temperature = 0.5;
  EXPECT_NE(r.Hash(), base.Hash());
  r = base;
  r.max_tokens = 7;
  EXPECT_NE(r.Hash(), base.Hash());
  r = base;
  r.cache_salt = 1;
  EXPECT_NE(r.Hash(), base.Hash());
  r = base;
  r.messages[0].role = "system";
  EXPECT_NE(r.Hash(), base.Hash());
}

TEST(ChatRequestTest, WireBodyOmitsSaltAndRenamesModel) {
  ChatRequest r = UserRequest("logical", "hi");
  r.cache_salt = 3;
  nlohmann::json body = ChatCompletionsBody(r, "wire-name");
  EXPECT_EQ(body["model"], "wire-name");
  EXPECT_FALSE(body.contains("cache_salt"));
  EXPECT_EQ(body["messages"][0]["content"], "hi");
  EXPECT_EQ(ChatCompletionsBody(r)["model"], "logical");
}

TEST(ChatRequestTest, Validation) {
  EXPECT_THAT(ValidateChatRequest(UserRequest("m", "x")), IsOk());
  EXPECT_THAT(ValidateChatRequest(UserRequest("", "x")),
              StatusIs(absl::StatusCode::kInvalidArgument));
  ChatRequest r = UserRequest("m", "x");
  r.messages[0].role = "tool";
  EXPECT_THAT(ValidateChatRequest(r), StatusIs(absl::StatusCode::kInvalidArgument));
  r = UserRequest("m", "x");
  r.max_tokens = 0;
  EXPECT_THAT(ValidateChatRequest(r), StatusIs(absl::StatusCode::kInvalidArgument));
}

TEST(ParseChatCompletionsBodyTest, AcceptsMinimalAndRejectsMalformed) {
  absl::StatusOr<ChatResponse> r = ParseChatCompletionsBody(
      R"({"choices":[{"message":{"role":"assistant","content":"hey"},)"
      R"("finish_reason":"length"}],"usage":{"prompt_tokens":3,"completion_tokens":1}})");
  ASSERT_THAT(r, IsOk());
  EXPECT_EQ(r->content, "hey");
  EXPECT_EQ(r->finish_reason, "length");
  EXPECT_EQ(r->prompt_tokens, 3);
  EXPECT_THAT(ParseChatCompletionsBody(R"({"choices":[{"message":{"content":null}}]})"),
              IsOk());
  for (std::string_view bad :
       {"", "[]", R"({"choices":[]})", R"({"choices":[{}]})",
        R"({"choices":[{"message":{"content":5}}]})"}) {
    EXPECT_THAT(ParseChatCompletionsBody(bad), StatusIs(absl::StatusCode::kDataLoss))
        << bad;
  }
}

TEST(BackoffTest, ExponentialWithCap) {
  RetryPolicy p{.initial_backoff = absl::Milliseconds(100), .multiplier = 3.0,
                .max_backoff = absl::Seconds(1)};
  EXPECT_EQ(BackoffDelay(p, 1), absl::Milliseconds(100));
  EXPECT_EQ(BackoffDelay(p, 2), absl::Milliseconds(300));
  EXPECT_EQ(BackoffDelay(p, 3), absl::Milliseconds(900));
  EXPECT_EQ(BackoffDelay(p, 4), absl::Seconds(1));
  EXPECT_TRUE(IsTransientHttpStatus(429));
  EXPECT_TRUE(IsTransientHttpStatus(503));
  EXPECT_TRUE(IsTransientHttpStatus(408));
  EXPECT_FALSE(IsTransientHttpStatus(400));
  EXPECT_FALSE(IsTransientHttpStatus(401));
}

TEST(RedactTest, ReplacesEverySecretOccurrence) {
  EXPECT_EQ(Redact("key sk-1 and sk-1", "sk-1"), "key [REDACTED] and [REDACTED]");
  EXPECT_EQ(Redact("nothing", ""), "nothing");
}

class GatewayTest : public ::testing::Test {
 protected:
  GatewayOptions Options(std::string cache_dir = "") {
    GatewayOptions o;
    o.cache_dir = std::move(cache_dir);
    o.retry.max_attempts = 4;
    o.sleep = [this](absl::Duration d) {
      std::lock_guard<std::mutex> lock(mu_);
      sleeps_.push_back(d);
    };
    return o;
  }
  std::mutex mu_;
  std::vector<absl::Duration> sleeps_;
};

TEST_F(GatewayTest, CachesToDiskAcrossInstances) {
  const std::string dir = FreshDir("cache");
  auto t1 = std::make_shared<ScriptedTransport>(std::vector<HttpReply>{Ok("one")});
  {
    LlmGateway g(Options(dir));
    g.RegisterModel("m", t1);
    absl::StatusOr<ChatResponse> r = g.Complete(UserRequest("m", "q"));
    ASSERT_THAT(r, IsOk());
    EXPECT_EQ(r->content, "one");
    EXPECT_EQ(r->source, ResponseSource::kNetwork);
  }
  auto t2 = std::make_shared<ScriptedTransport>(std::vector<HttpReply>{Ok("two")});
  LlmGateway g(Options(dir));
  g.RegisterModel("m", t2);
  absl::StatusOr<ChatResponse> r = g.Complete(UserRequest("m", "q"));
  ASSERT_THAT(r, IsOk());
  EXPECT_EQ(r->content, "one");
  EXPECT_EQ(r->source, ResponseSource::kCache);
  EXPECT_EQ(t2->calls(), 0);
  EXPECT_EQ(g.cache_hits(), 1);
  EXPECT_EQ(g.network_calls(), 0);
  // A different request is a miss.
  EXPECT_EQ(g.Complete(UserRequest("m", "other"))->content, "two");
}

TEST_F(GatewayTest, EmptyCompletionsAreNotCached) {
  const std::string dir = FreshDir("empty");
  auto t = std::make_shared<ScriptedTransport>(std::vector<HttpReply>{Ok(""), Ok("x")});
  LlmGateway g(Options(dir));
  g.RegisterModel("m", t);
  EXPECT_EQ(g.Complete(UserRequest("m", "q"))->content, "");
  EXPECT_EQ(g.Complete(UserRequest("m", "q"))->content, "x");
  EXPECT_EQ(t->calls(), 2);
}

TEST_F(GatewayTest, RetriesTransientFailuresWithBackoff) {
  auto t = std::make_shared<ScriptedTransport>(std::vector<HttpReply>{
      {503, "busy"}, {429, "slow down"}, Ok("fine")});
  LlmGateway g(Options());
  g.RegisterModel("m", t);
  absl::StatusOr<ChatResponse> r = g.Complete(UserRequest("m", "q"));
  ASSERT_THAT(r, IsOk());
  EXPECT_EQ(r->content, "fine");
  EXPECT_EQ(t->calls(), 3);
  EXPECT_THAT(sleeps_, ElementsAre(absl::Milliseconds(500), absl::Seconds(1)));
}

TEST_F(GatewayTest, ExhaustedRetriesAreUnavailable) {
  auto t = std::make_shared<ScriptedTransport>(std::vector<HttpReply>{{500, "boom"}});
  LlmGateway g(Options());
  g.RegisterModel("m", t);
  absl::StatusOr<ChatResponse> r = g.Complete(UserRequest("m", "q"));
  EXPECT_THAT(r, StatusIs(absl::StatusCode::kUnavailable));
  EXPECT_THAT(std::string(r.status().message()), HasSubstr("boom"));
  EXPECT_EQ(t->calls(), 4);
  EXPECT_EQ(sleeps_.size(), 3u);
}

TEST_F(GatewayTest, AuthFailuresAreFatal) {
  auto t = std::make_shared<ScriptedTransport>(std::vector<HttpReply>{{401, "no"}});
  LlmGateway g(Options());
  g.RegisterModel("m", t);
  EXPECT_THAT(g.Complete(UserRequest("m", "q")),
              StatusIs(absl::StatusCode::kUnauthenticated));
  EXPECT_EQ(t->calls(), 1);
}

TEST_F(GatewayTest, ClientErrorsAndBadSchemaAreNotRetried) {
  auto bad_request =
      std::make_shared<ScriptedTransport>(std::vector<HttpReply>{{400, "bad"}});
  auto bad_schema =
      std::make_shared<ScriptedTransport>(std::vector<HttpReply>{{200, "{}"}});
  LlmGateway g(Options());
  g.RegisterModel("a", bad_request);
  g.RegisterModel("b", bad_schema);
  EXPECT_THAT(g.Complete(UserRequest("a", "q")),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(g.Complete(UserRequest("b", "q")),
              StatusIs(absl::StatusCode::kDataLoss));
  EXPECT_EQ(bad_request->calls() + bad_schema->calls(), 2);
}

TEST_F(GatewayTest, UnknownModelIsNotFound) {
  LlmGateway g(Options());
  EXPECT_THAT(g.Complete(UserRequest("ghost", "q")),
              StatusIs(absl::StatusCode::kNotFound));
}

TEST_F(GatewayTest, CoalescesIdenticalConcurrentRequests) {
  auto t = std::make_shared<ScriptedTransport>(std::vector<HttpReply>{Ok("same")},
                                               std::chrono::milliseconds(200));
  LlmGateway g(Options());
  g.RegisterModel("m", t);
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      absl::StatusOr<ChatResponse> r = g.Complete(UserRequest("m", "q"));
      if (r.ok() && r->content == "same") ok.fetch_add(1);
    });
  }
  for (std::thread& th : threads) th.join();
  EXPECT_EQ(ok.load(), 8);
  EXPECT_EQ(t->calls(), 1);
}

TEST_F(GatewayTest, BoundsRequestsInFlight) {
  auto t = std::make_shared<ScriptedTransport>(std::vector<HttpReply>{Ok("r")},
                                               std::chrono::milliseconds(30));
  GatewayOptions o = Options();
  o.max_in_flight = 2;
  LlmGateway g(o);
  g.RegisterModel("m", t);
  std::vector<std::thread> threads;
  for (int i = 0; i < 12; ++i) {
    threads.emplace_back([&g, i] {
      (void)g.Complete(UserRequest("m", absl::StrCat("q", i)));
    });
  }
  for (std::thread& th : threads) th.join();
  EXPECT_EQ(t->calls(), 12);
  EXPECT_LE(g.max_observed_in_flight(), 2);
  EXPECT_GE(g.max_observed_in_flight(), 1);
}

TEST(HttpChatTransportTest, SendsBearerTokenAndScrubsItFromEverything) {
  constexpr char kSecret[] = "sk-test-SENTINEL-4b1d";
  ASSERT_EQ(setenv("DPRECON_TEST_KEY", kSecret, 1), 0);
  testing::LocalChatServer server;
  const std::string dir = FreshDir("secret");
  {
    LlmGateway g(GatewayOptions{.cache_dir = dir});
    g.RegisterModel("m", std::make_shared<HttpChatTransport>(HttpEndpoint{
                             .base_url = server.url(),
                             .api_key_env = "DPRECON_TEST_KEY",
                             .wire_model = "remote-model"}));
    absl::StatusOr<ChatResponse> r = g.Complete(UserRequest("m", "hello"));
    ASSERT_THAT(r, IsOk());
    EXPECT_EQ(r->content, "hello auth was Bearer [REDACTED]");
    EXPECT_THAT(r->raw_body, Not(HasSubstr(kSecret)));
  }
  EXPECT_EQ(server.last_auth(), absl::StrCat("Bearer ", kSecret));
  EXPECT_EQ(nlohmann::json::parse(server.last_body())["model"], "remote-model");
  int files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    ++files;
    EXPECT_THAT(*ReadFile(entry.path().string()), Not(HasSubstr(kSecret)));
  }
  EXPECT_EQ(files, 1);
  unsetenv("DPRECON_TEST_KEY");
}

TEST(HttpChatTransportTest, MissingCredentialIsUnauthenticated) {
  unsetenv("DPRECON_ABSENT_KEY");
  HttpChatTransport t(HttpEndpoint{.base_url = "http://127.0.0.1:1",
                                   .api_key_env = "DPRECON_ABSENT_KEY"});
  EXPECT_THAT(t.Post(UserRequest("m", "x")),
              StatusIs(absl::StatusCode::kUnauthenticated));
}

TEST(HttpChatTransportTest, ConnectionFailureIsUnavailable) {
  HttpChatTransport t(HttpEndpoint{.base_url = "http://127.0.0.1:1",
                                   .timeout = absl::Seconds(2)});
  EXPECT_THAT(t.Post(UserRequest("m", "x")), StatusIs(absl::StatusCode::kUnavailable));
}

}  // namespace
}  // namespace dprecon
