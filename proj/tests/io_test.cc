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

#include "dprecon/io.h"

#include <filesystem>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "status_matchers.h"

namespace dprecon {
namespace {

using ::dprecon::testing::IsOk;
using ::dprecon::testing::StatusIs;
using ::testing::HasSubstr;

std::string TempPath(const std::string& name) {
  return (std::filesystem::path(::testing::TempDir()) / "io_test" / name)
      .string();
}

TEST(IoTest, WriteThenReadRoundTrips) {
  const std::string path = TempPath("nested/dir/file.txt");
  ASSERT_THAT(WriteFileAtomic(path, "hello\n"), IsOk());
  absl::StatusOr<std::string> back = ReadFile(path);
  ASSERT_THAT(back, IsOk());
  EXPECT_EQ(*back, "hello\n");
}

TEST(IoTest, MissingFileIsNotFound) {
  EXPECT_THAT(ReadFile(TempPath("absent")), StatusIs(absl::StatusCode::kNotFound));
}

TEST(IoTest, JsonLinesSkipBlankLinesAndNameBadLine) {
  absl::StatusOr<std::vector<nlohmann::json>> ok =
      ParseJsonLines("{\"a\":1}\n\n{\"a\":2}\n", "x.jsonl");
  ASSERT_THAT(ok, IsOk());
  ASSERT_EQ(ok->size(), 2u);
  EXPECT_EQ((*ok)[1]["a"], 2);

  absl::StatusOr<std::vector<nlohmann::json>> bad =
      ParseJsonLines("{\"a\":1}\n{oops\n", "x.jsonl");
  EXPECT_THAT(bad, StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(std::string(bad.status().message()), HasSubstr("x.jsonl:2"));
}

TEST(IoTest, SerializeIsOneObjectPerLine) {
  std::vector<nlohmann::json> v = {{{"b", 1}, {"a", "x"}}, {{"c", nullptr}}};
  EXPECT_EQ(SerializeJsonLines(v), "{\"a\":\"x\",\"b\":1}\n{\"c\":null}\n");
}

}  // namespace
}  // namespace dprecon
