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

#include "rtsa/streams.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <zlib.h>

namespace rtsa {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::size_t kMaxReportedErrors = 10;

json parse_object(std::string_view line, std::size_t line_no) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw ParseError(line_no, "", "record is not a JSON object");
  }
  return j;
}

std::string required_string(const json& j, const char* field, std::size_t line_no) {
  const auto it = j.find(field);
  if (it == j.end()) throw ParseError(line_no, field, "missing field");
  if (!it->is_string()) throw ParseError(line_no, field, "expected a string");
  std::string value = it->get<std::string>();
  if (value.empty()) throw ParseError(line_no, field, "must not be empty");
  return value;
}

Millis required_ts(const json& j, std::size_t line_no) {
  const auto it = j.find("ts");
  if (it == j.end()) throw ParseError(line_no, "ts", "missing field");
  if (!it->is_number_integer()) throw ParseError(line_no, "ts", "expected an integer");
  const auto ts = it->get<Millis>();
  if (ts <= 0) throw ParseError(line_no, "ts", "must be positive");
  return ts;
}

std::string optional_lang(const json& j, std::size_t line_no) {
  const auto it = j.find("lang");
  if (it == j.end() || it->is_null()) return "und";
  if (!it->is_string()) throw ParseError(line_no, "lang", "expected a string");
  std::string lang = normalize_text(it->get<std::string>());
  const bool two_letters =
      lang.size() == 2 && std::all_of(lang.begin(), lang.end(), [](char c) { return c >= 'a' && c <= 'z'; });
  if (!two_letters && lang != "und") {
    throw ParseError(line_no, "lang", "expected a two-letter code or 'und'");
  }
  return lang;
}

template <typename E>
void check_order(std::vector<E>& events, Millis tolerance_ms, const char* name) {
  Millis high = std::numeric_limits<Millis>::min();
  bool sorted = true;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].ts < high) {
      sorted = false;
      if (high - events[i].ts > tolerance_ms) {
        throw OutOfOrderInput(fmt::format("{} stream out of order at index {}: ts {} after {}",
                                          name, i, events[i].ts, high));
      }
    }
    high = std::max(high, events[i].ts);
  }
  if (!sorted) {
    std::stable_sort(events.begin(), events.end(),
                     [](const E& a, const E& b) { return a.ts < b.ts; });
  }
}

template <typename E, typename Parse>
LoadResult<E> load_events(const std::filesystem::path& path, Parse parse) {
  LoadResult<E> result;
  for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) return;
    try {
      result.events.push_back(parse(line, line_no));
    } catch (const Error& e) {
      ++result.skipped;
      if (result.errors.size() < kMaxReportedErrors) result.errors.emplace_back(e.what());
    }
  });
  return result;
}

}  // namespace

ParseError::ParseError(std::size_t line_no, std::string field, const std::string& message)
    : Error(field.empty() ? fmt::format("line {}: {}", line_no, message)
                          : fmt::format("line {}: field '{}': {}", line_no, field, message)),
      line_no_(line_no),
      field_(std::move(field)) {}

QueryEvent parse_query_event(std::string_view line, std::size_t line_no) {
  const json j = parse_object(line, line_no);
  QueryEvent ev;
  ev.session_id = required_string(j, "sid", line_no);
  try {
    ev.query = normalize_query(required_string(j, "q", line_no));
  } catch (const EmptyQuery&) {
    throw ParseError(line_no, "q", "query is blank");
  }
  try {
    ev.source = parse_query_source(required_string(j, "src", line_no));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_no, "src", e.what());
  }
  ev.lang = optional_lang(j, line_no);
  ev.ts = required_ts(j, line_no);
  return ev;
}

TweetEvent parse_tweet_event(std::string_view line, std::size_t line_no) {
  const json j = parse_object(line, line_no);
  TweetEvent ev;
  ev.tweet_id = required_string(j, "tid", line_no);
  ev.text = required_string(j, "text", line_no);
  if (normalize_text(ev.text).empty()) throw ParseError(line_no, "text", "must not be blank");
  ev.lang = optional_lang(j, line_no);
  ev.ts = required_ts(j, line_no);
  return ev;
}

std::string format_query_event(const QueryEvent& ev) {
  ordered_json j;
  j["sid"] = ev.session_id;
  j["q"] = ev.query.text;
  j["src"] = to_string(ev.source);
  j["lang"] = ev.lang;
  j["ts"] = ev.ts;
  return j.dump();
}

std::string format_tweet_event(const TweetEvent& ev) {
  ordered_json j;
  j["tid"] = ev.tweet_id;
  j["text"] = ev.text;
  j["lang"] = ev.lang;
  j["ts"] = ev.ts;
  return j.dump();
}

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn) {
  // gzread passes uncompressed input through unchanged.
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw Error(fmt::format("cannot open '{}'", path.string()));
  gzbuffer(file, 1 << 17);
  std::string pending;
  std::vector<char> buf(1 << 16);
  std::size_t line_no = 0;
  for (;;) {
    const int n = gzread(file, buf.data(), static_cast<unsigned>(buf.size()));
    if (n < 0) {
      int errnum = 0;
      std::string message = gzerror(file, &errnum);
      gzclose(file);
      throw Error(fmt::format("error reading '{}': {}", path.string(), message));
    }
    if (n == 0) break;
    std::string_view chunk(buf.data(), static_cast<std::size_t>(n));
    std::size_t pos = 0;
    while (pos < chunk.size()) {
      const auto nl = chunk.find('\n', pos);
      if (nl == std::string_view::npos) {
        pending.append(chunk.substr(pos));
        break;
      }
      std::string_view piece = chunk.substr(pos, nl - pos);
      if (!pending.empty()) {
        pending.append(piece);
        fn(pending, ++line_no);
        pending.clear();
      } else {
        fn(piece, ++line_no);
      }
      pos = nl + 1;
    }
  }
  gzclose(file);
  if (!pending.empty()) fn(pending, ++line_no);
}

void write_lines(const std::filesystem::path& path, std::span<const std::string> lines) {
  if (path.extension() == ".gz") {
    gzFile file = gzopen(path.c_str(), "wb");
    if (file == nullptr) throw Error(fmt::format("cannot create '{}'", path.string()));
    for (const std::string& line : lines) {
      if (gzwrite(file, line.data(), static_cast<unsigned>(line.size())) !=
              static_cast<int>(line.size()) ||
          gzputc(file, '\n') != '\n') {
        gzclose(file);
        throw Error(fmt::format("error writing '{}'", path.string()));
      }
    }
    if (gzclose(file) != Z_OK) throw Error(fmt::format("error closing '{}'", path.string()));
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot create '{}'", path.string()));
  for (const std::string& line : lines) out << line << '\n';
  out.flush();
  if (!out) throw Error(fmt::format("error writing '{}'", path.string()));
}

LoadResult<QueryEvent> load_query_events(const std::filesystem::path& path) {
  return load_events<QueryEvent>(path, [](std::string_view l, std::size_t n) {
    return parse_query_event(l, n);
  });
}

LoadResult<TweetEvent> load_tweet_events(const std::filesystem::path& path) {
  return load_events<TweetEvent>(path, [](std::string_view l, std::size_t n) {
    return parse_tweet_event(l, n);
  });
}

std::vector<Event> merge_streams(std::vector<QueryEvent> queries, std::vector<TweetEvent> tweets,
                                 Millis tolerance_ms) {
  check_order(queries, tolerance_ms, "query");
  check_order(tweets, tolerance_ms, "tweet");
  std::vector<Event> out;
  out.reserve(queries.size() + tweets.size());
  std::size_t qi = 0;
  std::size_t ti = 0;
  while (qi < queries.size() || ti < tweets.size()) {
    const bool take_query =
        ti == tweets.size() || (qi < queries.size() && queries[qi].ts <= tweets[ti].ts);
    if (take_query) {
      out.emplace_back(std::move(queries[qi++]));
    } else {
      out.emplace_back(std::move(tweets[ti++]));
    }
  }
  return out;
}

ReplayClock::ReplayClock(double speedup) : speedup_(speedup) {
  if (!(speedup > 0)) throw Error("replay speedup must be positive");
}

void ReplayClock::start(Millis first_event_ts) {
  start_event_ts_ = first_event_ts;
  start_wall_ = SteadyClock::now();
  last_now_ = first_event_ts;
}

void ReplayClock::wait_until(Millis ts) {
  if (unbounded()) {
    last_now_ = std::max(last_now_, ts);
    return;
  }
  const auto offset = std::chrono::duration<double, std::milli>(
      static_cast<double>(ts - start_event_ts_) / speedup_);
  std::this_thread::sleep_until(start_wall_ +
                                std::chrono::duration_cast<SteadyClock::duration>(offset));
}

Millis ReplayClock::now() const {
  if (!unbounded()) {
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(SteadyClock::now() - start_wall_).count();
    const auto t = start_event_ts_ + static_cast<Millis>(elapsed_ms * speedup_);
    last_now_ = std::max(last_now_, t);
  }
  return last_now_;
}

ReplayReport replay(std::span<const Event> events, ReplayClock& clock, EventSink& sink,
                    const ReplayOptions& options) {
  ReplayReport report;
  const auto wall_start = std::chrono::steady_clock::now();
  if (!events.empty()) {
    const Millis first = event_ts(events.front());
    report.first_ts = first;
    clock.start(first);
    Millis next_decay = first + options.decay_interval_ms;
    Millis next_rank = first + options.ranking_interval_ms;

    auto run_due = [&](Millis until) {
      while (std::min(next_decay, next_rank) <= until) {
        if (next_decay <= next_rank) {
          sink.decay_cycle(next_decay);
          ++report.decay_cycles;
          next_decay += options.decay_interval_ms;
        } else {
          sink.ranking_cycle(next_rank);
          ++report.ranking_cycles;
          next_rank += options.ranking_interval_ms;
        }
      }
    };

    for (const Event& event : events) {
      const Millis ts = event_ts(event);
      run_due(ts);
      clock.wait_until(ts);
      try {
        sink.deliver(event);
      } catch (const std::exception&) {
        ++report.sink_errors;
      }
      ++report.delivered;
      if (std::holds_alternative<QueryEvent>(event)) {
        ++report.queries;
      } else {
        ++report.tweets;
      }
      report.last_ts = ts;
    }
    if (options.final_cycle) run_due(next_rank);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return report;
}

}  // namespace rtsa
