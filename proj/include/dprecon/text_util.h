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

#ifndef DPRECON_TEXT_UTIL_H_
#define DPRECON_TEXT_UTIL_H_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dprecon {

// Unicode-aware lowercasing of UTF-8 text. Invalid sequences are replaced.
std::string ToLowerUtf8(std::string_view text);

// Unicode NFKC normalization of UTF-8 text.
std::string NfkcUtf8(std::string_view text);

// True for ASCII space, tab, CR, LF, VT, FF.
inline bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Whitespace-delimited words, in order.
std::vector<std::string_view> SplitWhitespace(std::string_view text);

// Replaces every occurrence of `slot` in `tmpl` with `value`.
std::string ReplaceAll(std::string_view tmpl, std::string_view slot,
                       std::string_view value);

// Number of non-overlapping occurrences of `needle` in `haystack`.
// Single left-to-right pass: text substituted into one slot is never
// rescanned for another.
std::string FillSlots(
    std::string_view tmpl,
    std::span<const std::pair<std::string_view, std::string_view>> slots);

size_t CountOccurrences(std::string_view haystack, std::string_view needle);

// Lowercase hex SHA-256 of `bytes`.
std::string Sha256Hex(std::string_view bytes);

}  // namespace dprecon

#endif  // DPRECON_TEXT_UTIL_H_
