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

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtsa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyQuery : public Error {
 public:
  EmptyQuery() : Error("query is empty after normalization") {}
};

/// Milliseconds since the Unix epoch, on the event clock.
using Millis = std::int64_t;

enum class Sigil : std::uint8_t { None, Hashtag, Mention };

/// A normalized query string. Equality and ordering look at the text only;
/// the sigil is derived from it.
struct Query {
  std::string text;
  Sigil sigil = Sigil::None;

  friend bool operator==(const Query& a, const Query& b) { return a.text == b.text; }
  friend std::strong_ordering operator<=>(const Query& a, const Query& b) {
    return a.text <=> b.text;
  }
};

/// Lowercases ASCII letters, collapses runs of (Unicode) whitespace to one
/// space and trims both ends. Throws EmptyQuery if nothing is left.
Query normalize_query(std::string_view raw);

/// Normalized text, or an empty string where normalize_query would throw.
std::string normalize_text(std::string_view raw);

Sigil sigil_of(std::string_view normalized);

/// Splits on Unicode whitespace. Tokens are returned as-is (not lowercased).
std::vector<std::string_view> tokenize(std::string_view text);

enum class QuerySource : std::uint8_t { Typed, HashtagClick, TrendClick, RelatedClick };

inline constexpr std::size_t kQuerySourceCount = 4;

/// Wire names: typed, hashtag_click, trend_click, related_click.
std::string_view to_string(QuerySource s);
/// Throws Error on an unknown name.
QuerySource parse_query_source(std::string_view name);

}  // namespace rtsa

template <>
struct std::hash<rtsa::Query> {
  std::size_t operator()(const rtsa::Query& q) const noexcept {
    return std::hash<std::string>{}(q.text);
  }
};
