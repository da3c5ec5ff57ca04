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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rtsa/events.hpp"

namespace rtsa {

class KMismatch : public Error {
 public:
  using Error::Error;
};

struct TermCount {
  std::string term;
  std::int64_t count = 0;

  friend bool operator==(const TermCount&, const TermCount&) = default;
};

/// Exact top-k of one tumbling interval. Entries are ordered by descending
/// count, ties by term.
struct IntervalTopK {
  Millis interval_start = 0;
  Millis interval_len = 0;
  std::size_t k = 0;
  std::vector<TermCount> entries;
};

enum class Granularity : std::uint8_t { Term, Query };

struct TopKOptions {
  // Term: whitespace tokens of each query. Query: the whole query.
  Granularity granularity = Granularity::Term;
  // Count a term at most once per session per interval.
  bool dedupe_session = false;
};

/// Intervals are aligned to multiples of `interval_len` on the epoch. One
/// result per non-empty interval, in time order.
std::vector<IntervalTopK> topk_per_interval(std::span<const QueryEvent> events, std::size_t k,
                                            Millis interval_len, const TopKOptions& options = {});

/// Fraction of a's top-k missing from b's: 1 - |a & b| / k.
/// Throws KMismatch when the two were computed with different k.
double churn_rate(const IntervalTopK& a, const IntervalTopK& b);

struct ChurnRow {
  Millis interval_start = 0;
  double churn = 0.0;
};

/// churn_rate of each interval against the next one in the list.
std::vector<ChurnRow> churn_series(const std::vector<IntervalTopK>& intervals);

struct FreqRow {
  Millis interval_start = 0;
  std::string query;
  double freq = 0.0;
};

/// For every non-empty interval and every tracked query (in the order
/// given): exact-match count over the number of query events in the interval.
std::vector<FreqRow> frequency_timeseries(std::span<const QueryEvent> events,
                                          const std::vector<std::string>& queries,
                                          Millis interval_len);

/// `interval_start,churn`
std::string churn_csv(const std::vector<ChurnRow>& rows);
/// `interval_start,query,freq`
std::string freq_csv(const std::vector<FreqRow>& rows);

}  // namespace rtsa
