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

#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "rtsa/association.hpp"
#include "rtsa/snapshot.hpp"
#include "rtsa/streams.hpp"

namespace rtsa {

struct EngineMetrics {
  std::size_t queries = 0;
  std::size_t rate_limited = 0;
  std::size_t tweets = 0;
  std::size_t tweet_matches = 0;
  std::size_t decay_cycles = 0;
  std::size_t ranking_cycles = 0;
};

/// The backend: three stores fed by the query and tweet paths, plus the
/// decay/prune and ranking cycles. Not thread-safe; callers serialize all
/// calls (the replay driver does).
class Engine {
 public:
  /// Throws Error listing every violated invariant if `cfg` is invalid.
  explicit Engine(EngineConfig cfg, ProfileName profile = ProfileName::Realtime);

  /// Query path: statistics, then the session, then one cooccurrence per new
  /// (earlier query, this query) pair in the session window.
  void on_query(const QueryEvent& ev);

  /// Tweet path: the tweet acts as a session of its query-like n-grams; each
  /// unordered pair of distinct matches is added in both directions.
  void on_tweet(const TweetEvent& ev);

  void on_event(const Event& ev);

  /// Distinct 1..max_ngram token n-grams of `text` observed as standalone
  /// queries at least querylike_min_count times, in first-occurrence order.
  std::vector<Query> extract_query_like_ngrams(std::string_view text) const;

  PruneReport run_decay_prune_cycle(Millis now);

  /// Ranked followers of `a` (at most top_k). Empty when `a` has no weight or
  /// no follower reaches min_pair_support.
  std::vector<Suggestion> rank_query(const Query& a, Millis now) const;

  /// Ranks every query at or above the rank floor and attaches spelling
  /// corrections. Only queries with a suggestion or a correction get an
  /// entry.
  Snapshot run_ranking_cycle(Millis now);

  /// Generation ids continue after `generation` (e.g. the newest id already
  /// published in the output directory).
  void resume_generation(std::int64_t generation) { generation_ = std::max(generation_, generation); }

  const Stores& stores() const { return stores_; }
  const EngineConfig& config() const { return cfg_; }
  const EngineMetrics& metrics() const { return metrics_; }
  ProfileName profile() const { return profile_; }

 private:
  EngineConfig cfg_;
  ProfileName profile_;
  Stores stores_;
  EngineMetrics metrics_;
  std::int64_t generation_ = 0;
};

/// Adapts an Engine to the replay driver and publishes every ranking cycle.
class EngineSink : public EventSink {
 public:
  using SnapshotCallback = std::function<void(const Snapshot&)>;

  /// With an output directory, snapshots are written there and generation
  /// ids resume after the newest manifest already present.
  EngineSink(Engine& engine, std::optional<std::filesystem::path> out_dir = std::nullopt,
             SnapshotCallback on_snapshot = {});

  void deliver(const Event& event) override { engine_.on_event(event); }
  void decay_cycle(Millis now) override { engine_.run_decay_prune_cycle(now); }
  void ranking_cycle(Millis now) override;

  const std::optional<Snapshot>& last_snapshot() const { return last_; }
  std::size_t snapshots_written() const { return written_; }

 private:
  Engine& engine_;
  std::optional<std::filesystem::path> out_dir_;
  SnapshotCallback on_snapshot_;
  std::optional<Snapshot> last_;
  std::size_t written_ = 0;
};

inline ReplayOptions replay_options(const EngineConfig& cfg, bool final_cycle = false) {
  return ReplayOptions{cfg.decay_cycle_interval_ms, cfg.snapshot_interval_ms, final_cycle};
}

}  // namespace rtsa
