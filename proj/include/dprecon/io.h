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

#ifndef DPRECON_IO_H_
#define DPRECON_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"

namespace dprecon {

absl::StatusOr<std::string> ReadFile(const std::string& path);

// Writes to a sibling temp file and renames it over `path`, so readers never
// observe a partial file.
absl::Status WriteFileAtomic(const std::string& path, std::string_view bytes);

// One JSON value per nonempty line. Errors name the 1-based line number.
absl::StatusOr<std::vector<nlohmann::json>> ParseJsonLines(
    std::string_view contents, std::string_view source = "");
absl::StatusOr<std::vector<nlohmann::json>> ReadJsonLines(
    const std::string& path);

// Compact one-line-per-value serialization with a trailing newline.
std::string SerializeJsonLines(const std::vector<nlohmann::json>& values);

template <typename T>
std::string SerializeJsonLines(const std::vector<T>& values) {
  std::vector<nlohmann::json> out;
  out.reserve(values.size());
  for (const T& v : values) out.emplace_back(v);
  return SerializeJsonLines(out);
}

}  // namespace dprecon

#endif  // DPRECON_IO_H_
