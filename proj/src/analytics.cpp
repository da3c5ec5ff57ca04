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

#include "rtsa/analytics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace rtsa {
namespace {

Millis interval_of(Millis ts, Millis len) {
  const Millis q = ts / len;
  return (ts % len < 0 ? q - 1 : q) * len;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

IntervalTopK finish(Millis start, Millis len, std::size_t k,
                    const std::unordered_map<std::string, std::int64_t>& counts) {
  IntervalTopK out{start, len, k, {}};
  out.entries.reserve(counts.size());
  for (const auto& [term, count] : counts) out.entries.push_back({term, count});
  auto by_rank = [](const TermCount& a, const TermCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.term < b.term;
  };
  const std::size_t keep = std::min(k, out.entries.size());
  std::partial_sort(out.entries.begin(), out.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    out.entries.end(), by_rank);
  out.entries.resize(keep);
  return out;
}

}  // namespace

std::vector<IntervalTopK> topk_per_interval(std::span<const QueryEvent> events, std::size_t k,
                                            Millis interval_len, const TopKOptions& options) {
  if (k == 0) throw Error("k must be at least 1");
  if (interval_len <= 0) throw Error("interval length must be positive");
  // Keyed by interval start so slightly unordered input still lands right.
  std::map<Millis, std::unordered_map<std::string, std::int64_t>> counts;
  std::map<Millis, std::unordered_set<std::string>> session_terms;
  for (const QueryEvent& ev : events) {
    const Millis start = interval_of(ev.ts, interval_len);
    auto& bucket = counts[start];
    auto count = [&](std::string term) {
      if (options.dedupe_session &&
          !session_terms[start].insert(ev.session_id + '\n' + term).second) {
        return;
      }
      ++bucket[std::move(term)];
    };
    if (options.granularity == Granularity::Query) {
      count(ev.query.text);
    } else {
      for (std::string_view token : tokenize(ev.query.text)) count(std::string(token));
    }
  }
  std::vector<IntervalTopK> out;
  out.reserve(counts.size());
  for (const auto& [start, terms] : counts) {
    if (!terms.empty()) out.push_back(finish(start, interval_len, k, terms));
  }
  return out;
}

double churn_rate(const IntervalTopK& a, const IntervalTopK& b) {
  if (a.k != b.k) throw KMismatch(fmt::format("cannot compare top-{} with top-{}", a.k, b.k));
  if (a.k == 0) throw KMismatch("k must be at least 1");
  std::unordered_set<std::string_view> next;
  for (const TermCount& t : b.entries) next.insert(t.term);
  const auto kept = std::count_if(a.entries.begin(), a.entries.end(),
                                  [&](const TermCount& t) { return next.contains(t.term); });
  return 1.0 - static_cast<double>(kept) / static_cast<double>(a.k);
}

std::vector<ChurnRow> churn_series(const std::vector<IntervalTopK>& intervals) {
  std::vector<ChurnRow> rows;
  for (std::size_t i = 0; i + 1 < intervals.size(); ++i) {
    rows.push_back({intervals[i].interval_start, churn_rate(intervals[i], intervals[i + 1])});
  }
  return rows;
}

std::vector<FreqRow> frequency_timeseries(std::span<const QueryEvent> events,
                                          const std::vector<std::string>& queries,
                                          Millis interval_len) {
  if (interval_len <= 0) throw Error("interval length must be positive");
  std::vector<std::string> tracked;
  for (const std::string& q : queries) tracked.push_back(normalize_text(q));
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < tracked.size(); ++i) index.emplace(tracked[i], i);

  struct Interval {
    std::int64_t total = 0;
    std::vector<std::int64_t> hits;
  };
  std::map<Millis, Interval> intervals;
  for (const QueryEvent& ev : events) {
    Interval& iv = intervals[interval_of(ev.ts, interval_len)];
    if (iv.hits.empty()) iv.hits.assign(tracked.size(), 0);
    ++iv.total;
    if (const auto it = index.find(ev.query.text); it != index.end()) ++iv.hits[it->second];
  }
  std::vector<FreqRow> rows;
  for (const auto& [start, iv] : intervals) {
    for (std::size_t i = 0; i < tracked.size(); ++i) {
      rows.push_back({start, tracked[i],
                      static_cast<double>(iv.hits[i]) / static_cast<double>(iv.total)});
    }
  }
  return rows;
}

std::string churn_csv(const std::vector<ChurnRow>& rows) {
  std::string out = "interval_start,churn\n";
  for (const ChurnRow& r : rows) out += fmt::format("{},{}\n", r.interval_start, r.churn);
  return out;
}

std::string freq_csv(const std::vector<FreqRow>& rows) {
  std::string out = "interval_start,query,freq\n";
  for (const FreqRow& r : rows) {
    out += fmt::format("{},{},{}\n", r.interval_start, csv_field(r.query), r.freq);
  }
  return out;
}

}  // namespace rtsa
