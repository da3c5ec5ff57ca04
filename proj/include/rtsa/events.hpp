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

#include <string>
#include <variant>

#include "rtsa/query.hpp"

namespace rtsa {

struct QueryEvent {
  std::string session_id;
  Query query;
  QuerySource source = QuerySource::Typed;
  std::string lang = "und";
  Millis ts = 0;
};

struct TweetEvent {
  std::string tweet_id;
  std::string text;
  std::string lang = "und";
  Millis ts = 0;
};

using Event = std::variant<QueryEvent, TweetEvent>;

inline Millis event_ts(const Event& e) {
  return std::visit([](const auto& ev) { return ev.ts; }, e);
}

}  // namespace rtsa
