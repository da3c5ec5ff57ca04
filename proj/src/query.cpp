/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include "rtsa/query.hpp"

#include <array>

namespace rtsa {
namespace {

// Byte length of the whitespace character starting at text[i], or 0.
std::size_t whitespace_len(std::string_view text, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  if (b0 == ' ' || (b0 >= '\t' && b0 <= '\r')) return 1;
  if (b0 < 0xC2) return 0;
  const std::size_t left = text.size() - i;
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[i + k]); };
  if (b0 == 0xC2 && left >= 2 && (at(1) == 0x85 || at(1) == 0xA0)) return 2;
  if (left < 3) return 0;
  if (b0 == 0xE1 && at(1) == 0x9A && at(2) == 0x80) return 3;  // U+1680
  if (b0 == 0xE2 && at(1) == 0x80) {
    const unsigned char b2 = at(2);
    if (b2 <= 0x8A || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF) return 3;
  }
  if (b0 == 0xE2 && at(1) == 0x81 && at(2) == 0x9F) return 3;  // U+205F
  if (b0 == 0xE3 && at(1) == 0x80 && at(2) == 0x80) return 3;  // U+3000
  return 0;
}

constexpr std::array<std::string_view, kQuerySourceCount> kSourceNames = {
    "typed", "hashtag_click", "trend_click", "related_click"};

}  // namespace

std::string normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < raw.size();) {
    if (const std::size_t ws = whitespace_len(raw, i); ws > 0) {
      pending_space = !out.empty();
      i += ws;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    char c = raw[i++];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

Sigil sigil_of(std::string_view normalized) {
  if (normalized.empty()) return Sigil::None;
  if (normalized.front() == '#') return Sigil::Hashtag;
  if (normalized.front() == '@') return Sigil::Mention;
  return Sigil::None;
}

Query normalize_query(std::string_view raw) {
  std::string text = normalize_text(raw);
  if (text.empty()) throw EmptyQuery();
  const Sigil sigil = sigil_of(text);
  return Query{std::move(text), sigil};
}

std::vector<std::string_view> tokenize(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t start = std::string_view::npos;
  for (std::size_t i = 0; i < text.size();) {
    if (const std::size_t ws = whitespace_len(text, i); ws > 0) {
      if (start != std::string_view::npos) {
        tokens.push_back(text.substr(start, i - start));
        start = std::string_view::npos;
      }
      i += ws;
    } else {
      if (start == std::string_view::npos) start = i;
      ++i;
    }
  }
  if (start != std::string_view::npos) tokens.push_back(text.substr(start));
  return tokens;
}

std::string_view to_string(QuerySource s) { return kSourceNames[static_cast<std::size_t>(s)]; }

QuerySource parse_query_source(std::string_view name) {
  for (std::size_t i = 0; i < kSourceNames.size(); ++i) {
    if (kSourceNames[i] == name) return static_cast<QuerySource>(i);
  }
  throw Error("unknown query source '" + std::string(name) + "'");
}

}  // namespace rtsa
