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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rtsa/events.hpp"

namespace rtsa {

/// A malformed hose record. Callers count and skip these.
class ParseError : public Error {
 public:
  ParseError(std::size_t line_no, std::string field, const std::string& message);

  std::size_t line_no() const { return line_no_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_no_;
  std::string field_;
};

class OutOfOrderInput : public Error {
 public:
  using Error::Error;
};

// Record format, one JSON object per line:
//   query hose: {"sid":..,"q":..,"src":..,"lang":..,"ts":..}
//   firehose:   {"tid":..,"text":..,"lang":..,"ts":..}
// `lang` is optional and defaults to "und".
QueryEvent parse_query_event(std::string_view line, std::size_t line_no = 0);
TweetEvent parse_tweet_event(std::string_view line, std::size_t line_no = 0);

std::string format_query_event(const QueryEvent& ev);
std::string format_tweet_event(const TweetEvent& ev);

template <typename E>
struct LoadResult {
  std::vector<E> events;
  std::size_t skipped = 0;
  // The first few parse errors, for diagnostics.
  std::vector<std::string> errors;
};

/// Calls `fn(line, line_no)` for every line. Files ending in `.gz` are
/// inflated; anything else is read as-is. Throws Error if the file cannot be
/// opened.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

/// Writes newline-terminated lines, gzip-compressed when the name ends in `.gz`.
void write_lines(const std::filesystem::path& path, std::span<const std::string> lines);

LoadResult<QueryEvent> load_query_events(const std::filesystem::path& path);
LoadResult<TweetEvent> load_tweet_events(const std::filesystem::path& path);

/// Stable merge by timestamp; ties go query-before-tweet, then input order.
/// Each input may step backwards by at most `tolerance_ms` (and is then
/// stably re-sorted); a larger regression throws OutOfOrderInput.
std::vector<Event> merge_streams(std::vector<QueryEvent> queries, std::vector<TweetEvent> tweets,
                                 Millis tolerance_ms = 0);

/// Maps event time onto wall time. An infinite speedup replays as fast as
/// possible and never sleeps.
class ReplayClock {
 public:
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  explicit ReplayClock(double speedup = kUnbounded);

  /// Anchors the clock: `first_event_ts` corresponds to the current wall time.
  void start(Millis first_event_ts);
  /// Blocks until the wall time assigned to `ts`. Returns immediately when
  /// unbounded.
  void wait_until(Millis ts);
  /// Event time now. Non-decreasing.
  Millis now() const;

  double speedup() const { return speedup_; }
  bool unbounded() const { return speedup_ == kUnbounded; }
  Millis start_event_ts() const { return start_event_ts_; }

 private:
  using SteadyClock = std::chrono::steady_clock;

  double speedup_;
  Millis start_event_ts_ = 0;
  SteadyClock::time_point start_wall_{};
  mutable Millis last_now_ = 0;
};

/// Receiver of a replay: events plus the periodic cycles.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void deliver(const Event& event) = 0;
  virtual void decay_cycle(Millis now) = 0;
  virtual void ranking_cycle(Millis now) = 0;
};

struct ReplayOptions {
  Millis decay_interval_ms = 5 * 60 * 1000;
  Millis ranking_interval_ms = 5 * 60 * 1000;
  // After the last event, advance to the next ranking boundary and fire the
  // cycles due there.
  bool final_cycle = false;
};

struct ReplayReport {
  std::size_t delivered = 0;
  std::size_t queries = 0;
  std::size_t tweets = 0;
  std::size_t sink_errors = 0;
  std::size_t skipped_lines = 0;
  std::size_t decay_cycles = 0;
  std::size_t ranking_cycles = 0;
  Millis first_ts = 0;
  Millis last_ts = 0;
  double wall_seconds = 0.0;
};

/// Delivers `events` in order. Cycles are scheduled on the event clock every
/// interval after the first event; all cycles due at or before an event's
/// timestamp run before the event (decay before ranking at equal times).
ReplayReport replay(std::span<const Event> events, ReplayClock& clock, EventSink& sink,
                    const ReplayOptions& options);

}  // namespace rtsa
