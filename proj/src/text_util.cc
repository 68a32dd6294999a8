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

#include "dprecon/text_util.h"

#include <openssl/evp.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <array>

#include "absl/strings/escaping.h"

namespace dprecon {

std::string ToLowerUtf8(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::string NfkcUtf8(std::string_view text) {
  UErrorCode err = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(err);
  if (U_FAILURE(err)) return std::string(text);
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = nfkc->normalize(u, err);
  if (U_FAILURE(err)) return std::string(text);
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::vector<std::string_view> SplitWhitespace(std::string_view text) {
  std::vector<std::string_view> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsAsciiSpace(text[i])) ++i;
    size_t start = i;
    while (i < text.size() && !IsAsciiSpace(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

std::string ReplaceAll(std::string_view tmpl, std::string_view slot,
                       std::string_view value) {
  std::string out;
  size_t pos = 0;
  while (true) {
    size_t hit = tmpl.find(slot, pos);
    if (hit == std::string_view::npos || slot.empty()) break;
    out.append(tmpl.substr(pos, hit - pos));
    out.append(value);
    pos = hit + slot.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::string FillSlots(
    std::string_view tmpl,
    std::span<const std::pair<std::string_view, std::string_view>> slots) {
  std::string out;
  size_t pos = 0;
  while (pos < tmpl.size()) {
    bool matched = false;
    for (const auto& [slot, value] : slots) {
      if (!slot.empty() && tmpl.substr(pos, slot.size()) == slot) {
        out.append(value);
        pos += slot.size();
        matched = true;
        break;
      }
    }
    if (!matched) out += tmpl[pos++];
  }
  return out;
}

size_t CountOccurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  size_t count = 0;
  for (size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(),
             nullptr);
  return absl::BytesToHexString(absl::string_view(
      reinterpret_cast<const char*>(digest.data()), len));
}

}  // namespace dprecon
