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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rtsa/events.hpp"

namespace rtsa {

struct VocabEntry {
  std::string query;
  double weight = 1.0;
  QuerySource source = QuerySource::Typed;
};

struct FollowUp {
  std::string query;
  double p_follow = 0.0;
  QuerySource source = QuerySource::Typed;
};

/// A query that spikes: its share of the query stream ramps linearly from 0
/// to `peak_fraction` over `ramp_ms`, holds for `hold_ms`, then decays
/// exponentially with time constant `decay_ms`. Every burst query opens a
/// session; each follow-up is issued in it with its probability after a
/// uniform delay in [follow_delay_min_ms, follow_delay_max_ms].
struct Burst {
  std::string query;
  QuerySource source = QuerySource::Typed;
  Millis t0 = 0;  // offset from the scenario start
  Millis ramp_ms = 10 * 60 * 1000;
  Millis hold_ms = 5 * 60 * 1000;
  Millis decay_ms = 15 * 60 * 1000;
  double peak_fraction = 0.1;
  std::vector<FollowUp> followups;
  Millis follow_delay_min_ms = 60 * 1000;
  Millis follow_delay_max_ms = 4 * 60 * 1000;
  // Expected number of unrelated vocabulary queries in each burst session.
  double noise_queries = 1.0;
  // Upper bound on burst sessions; 0 means no bound.
  std::int64_t sessions_affected = 0;
};

struct TweetSpec {
  double rate = 0.0;            // tweets per minute
  double match_fraction = 0.5;  // tweets mentioning vocabulary queries
  int min_tokens = 4;
  int max_tokens = 12;
};

/// Hour-by-hour rotating popularity: each interval the top-k set keeps every
/// term with probability 1 - replace_rate and swaps the rest for fresh terms.
/// Top terms are issued top_min..top_max times per interval, sampled tail
/// terms tail_min..tail_max times, so the measured top-k is the top set.
struct Rotation {
  std::size_t k = 100;
  double replace_rate = 0.17;
  Millis interval_ms = 60 * 60 * 1000;
  int top_min = 20;
  int top_max = 40;
  std::size_t tail_terms = 500;
  int tail_min = 1;
  int tail_max = 5;
};

struct SynthScenario {
  std::uint64_t seed = 1;
  Millis start_ts = 1'699'999'200'000;  // hour-aligned
  Millis duration_ms = 60 * 60 * 1000;
  double base_rate = 100.0;  // background queries per minute
  double mean_session_length = 3.0;
  Millis session_gap_min_ms = 5'000;
  Millis session_gap_max_ms = 90'000;
  std::vector<VocabEntry> vocab;
  std::vector<Burst> bursts;
  TweetSpec tweets;
  // Present: replaces vocabulary sampling for the background traffic.
  bool use_rotation = false;
  Rotation rotation;
};

/// Every violated constraint, one message each.
std::vector<std::string> validate_scenario(const SynthScenario& s);

/// Reads the JSON scenario format documented in docs/scenarios.md.
SynthScenario load_scenario(const std::filesystem::path& path);
SynthScenario parse_scenario(std::string_view json_text);

/// `n` distinct pronounceable pseudo-words with Zipf(exponent) weights. A
/// fraction of them are two-word queries.
std::vector<VocabEntry> zipf_vocab(std::size_t n, double exponent, std::uint64_t seed);

struct SynthOutput {
  std::vector<QueryEvent> queries;
  std::vector<TweetEvent> tweets;
};

/// Deterministic in the scenario (the seed included). Both streams are sorted
/// by timestamp. Throws Error on an invalid scenario.
SynthOutput gen_synth(const SynthScenario& scenario);

/// Writes `<prefix>.queries.jsonl` and `<prefix>.tweets.jsonl`; returns both
/// paths.
std::pair<std::filesystem::path, std::filesystem::path> write_synth(
    const SynthOutput& output, const std::string& prefix);

}  // namespace rtsa
