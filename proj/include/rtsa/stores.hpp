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
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rtsa/config.hpp"
#include "rtsa/decay.hpp"
#include "rtsa/events.hpp"

namespace rtsa {

class SelfPair : public Error {
 public:
  explicit SelfPair(const std::string& q) : Error("self cooccurrence rejected for '" + q + "'") {}
};

// ---------------------------------------------------------------------------
// Sessions

struct WindowEntry {
  Query query;
  Millis ts = 0;
  QuerySource source = QuerySource::Typed;
};

struct SessionRecord {
  std::string session_id;
  // Sliding window, newest last.
  std::deque<WindowEntry> window;
  // Everything the session has ever contained, for per-session dedup.
  std::unordered_set<std::string> seen_queries;
  std::unordered_set<std::string> seen_pairs;
  // Admitted (query, ts) inside the rate-limit window.
  std::deque<std::pair<std::string, Millis>> recent;
  Millis last_activity_ts = 0;
};

struct PairObservation {
  Query prev;
  Query next;
  double increment = 0.0;
};

/// The sessions store: one sliding window per anonymized session id.
class SessionStore {
 public:
  /// Rate-limit hook. Returns false when the session already admitted
  /// `rate_limit_max` copies of this query within `rate_limit_window_ms`;
  /// the caller drops the event. Records the event when admitted.
  bool admit(const QueryEvent& ev, const EngineConfig& cfg);

  /// Whether the session has contained `q` before.
  bool has_seen(const std::string& session_id, const Query& q) const;

  /// Appends the event to its session (creating it), evicts entries beyond
  /// the window size or age, and returns a pair for every distinct earlier
  /// window query not yet paired with this one in the session. The increment
  /// is the geometric mean of the two source weights.
  std::vector<PairObservation> observe(const QueryEvent& ev, const EngineConfig& cfg);

  /// Removes sessions idle for longer than `session_idle_expiry_ms`.
  std::size_t prune(Millis now, const EngineConfig& cfg);

  const SessionRecord* find(const std::string& session_id) const;
  std::size_t size() const { return sessions_.size(); }

 private:
  std::unordered_map<std::string, SessionRecord> sessions_;
};

// ---------------------------------------------------------------------------
// Query statistics

struct QueryStatsEntry {
  Sigil sigil = Sigil::None;
  // Query-hose observations applied.
  std::int64_t raw_count = 0;
  // Weighted count: source weights from the query hose plus tweet matches.
  DecayedWeight weight;
  // Weighted number of contexts (sessions, tweets) containing the query.
  DecayedWeight contexts;
  std::map<std::string, std::int64_t> lang_counts;
};

class QueryStatsStore {
 public:
  /// Query-hose update: decays, adds `increment`, bumps raw and language
  /// counts. `context_increment` is added to the context mass (non-zero when
  /// this is the query's first appearance in its session).
  void update(const Query& q, double increment, const std::string& lang, Millis now,
              const EngineConfig& cfg, double context_increment = 0.0);

  /// Tweet-path update: weight and context mass only; raw_count is untouched.
  /// Creates no entry for an unknown query.
  void add_tweet_match(const Query& q, double increment, Millis now, const EngineConfig& cfg);

  double weight(const std::string& q, Millis now, const EngineConfig& cfg) const;
  double contexts(const std::string& q, Millis now, const EngineConfig& cfg) const;
  std::int64_t raw_count(const std::string& q) const;
  const QueryStatsEntry* find(const std::string& q) const;

  /// Sum of every weight increment ever applied, decayed.
  double total_mass(Millis now, const EngineConfig& cfg) const { return mass_.read(now, cfg); }

  /// Materializes every weight at `now` and removes entries below `threshold`.
  std::size_t prune(Millis now, double threshold, const EngineConfig& cfg);

  void for_each(const std::function<void(const std::string&, const QueryStatsEntry&)>& fn) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, QueryStatsEntry> entries_;
  DecayedWeight mass_;
};

// ---------------------------------------------------------------------------
// Cooccurrences

struct CoocEntry {
  // For prev -> next: next followed prev.
  DecayedWeight weight;
  // Observed in at least one query session (not only in tweets).
  bool from_session = false;
};

/// Sparse directional pair store with follower and predecessor adjacency.
/// Invariant: b in followers(a) <=> a in predecessors(b).
class CoocStore {
 public:
  /// Throws SelfPair when prev == next.
  void update(const Query& prev, const Query& next, double increment, Millis now,
              const EngineConfig& cfg, bool from_session = true);

  std::map<Query, double> followers(const Query& q, Millis now, const EngineConfig& cfg) const;
  std::map<Query, double> predecessors(const Query& q, Millis now, const EngineConfig& cfg) const;

  /// Decayed weight of prev -> next; 0 when absent.
  double weight(const std::string& prev, const std::string& next, Millis now,
                const EngineConfig& cfg) const;
  const CoocEntry* find(const std::string& prev, const std::string& next) const;

  /// Visits followers of `q` without building a map.
  void for_each_follower(const std::string& q,
                         const std::function<void(const std::string&, const CoocEntry&)>& fn) const;
  void for_each_pair(
      const std::function<void(const std::string&, const std::string&, const CoocEntry&)>& fn) const;

  /// Materializes every weight at `now`, then removes each pair for which
  /// `drop(prev, next, weight_now, entry)` holds. Returns the number removed.
  std::size_t prune(Millis now, const EngineConfig& cfg,
                    const std::function<bool(const std::string&, const std::string&, double,
                                             const CoocEntry&)>& drop);

  std::size_t pair_count() const { return pair_count_; }
  /// Number of queries with at least one follower / predecessor.
  std::size_t follower_keys() const { return followers_.size(); }
  std::size_t predecessor_keys() const { return predecessors_.size(); }
  /// Checks the adjacency invariant exhaustively. For tests.
  bool adjacency_consistent() const;

 private:
  std::unordered_map<std::string, std::unordered_map<std::string, CoocEntry>> followers_;
  std::unordered_map<std::string, std::unordered_set<std::string>> predecessors_;
  std::size_t pair_count_ = 0;
};

// ---------------------------------------------------------------------------

struct Stores {
  SessionStore sessions;
  QueryStatsStore queries;
  CoocStore cooc;
};

struct PruneReport {
  std::size_t queries_removed = 0;
  std::size_t pairs_removed = 0;
  std::size_t sessions_removed = 0;
};

/// Decay/prune pass over all three stores:
///  - query entries with weight < prune_threshold are removed;
///  - pairs with weight < prune_threshold are removed, as are pairs seen only
///    in tweets whose endpoints are both no longer query-like (absent from
///    the query store or below querylike_min_count observations);
///  - idle sessions are removed.
PruneReport prune_all(Stores& stores, Millis now, const EngineConfig& cfg);

}  // namespace rtsa
