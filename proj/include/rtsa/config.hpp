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

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rtsa/query.hpp"

namespace rtsa {

/// Decay family applied to every stored weight. `None` disables decay.
enum class DecayFn : std::uint8_t { Exponential, Step, Linear, None };

std::string_view to_string(DecayFn fn);

/// Positional edit costs used by the spelling distance.
struct EditCosts {
  double internal_sub = 1.0;
  double boundary_sub = 1.5;
  double insert = 1.0;
  double erase = 1.0;
  double transpose = 1.0;
};

struct EngineConfig {
  int max_ngram = 3;

  // Sessions.
  int session_window_size = 10;
  Millis session_window_age_ms = 15 * 60 * 1000;
  Millis session_idle_expiry_ms = 60 * 60 * 1000;
  // Per-session rate cap: at most this many identical queries per window are
  // counted; 0 disables the cap.
  int rate_limit_max = 5;
  Millis rate_limit_window_ms = 60 * 1000;

  // Weights. Indexed by QuerySource.
  std::array<double, kQuerySourceCount> source_weights = {1.0, 0.5, 0.5, 0.3};
  double tweet_weight = 0.2;

  // Decay.
  DecayFn decay_fn = DecayFn::Exponential;
  Millis halflife_ms = 60 * 60 * 1000;
  Millis step_age_ms = 60 * 60 * 1000;
  double step_floor = 0.0;
  Millis linear_span_ms = 2 * 60 * 60 * 1000;

  // Pruning and query-likeness.
  double prune_threshold = 0.05;
  double querylike_min_count = 10.0;

  // Ranking.
  double z_crf = 0.6;
  double z_pmi = 0.2;
  double z_llr = 0.2;
  double pmi_cap = 10.0;
  double llr_scale = 20.0;
  double min_pair_support = 1.0;
  // Scales a query's context mass into the A-column of the contingency table.
  double context_fanout = 1.0;
  // Negative means "use prune_threshold".
  double rank_floor = -1.0;
  int top_k = 10;

  // Cycles and persistence, on the event clock.
  Millis snapshot_interval_ms = 5 * 60 * 1000;
  Millis decay_cycle_interval_ms = 5 * 60 * 1000;
  int retain_snapshots = 12;
  Millis order_tolerance_ms = 0;

  // Spelling.
  double spell_ratio_min = 10.0;
  double spell_distance_max = 2.0;
  EditCosts edit_costs;

  // Serving.
  double interpolation_mu = 0.7;

  double source_weight(QuerySource s) const {
    return source_weights[static_cast<std::size_t>(s)];
  }
  double effective_rank_floor() const { return rank_floor < 0 ? prune_threshold : rank_floor; }
};

/// Every violated invariant, one message each. Empty means valid.
std::vector<std::string> validate_config(const EngineConfig& cfg);

/// Applies one `key = value` assignment. Throws Error on an unknown key or a
/// value that does not parse.
void set_config_value(EngineConfig& cfg, std::string_view key, std::string_view value);

/// Parses the flat `key = value` format (`#` starts a comment) on top of
/// `base`. Errors carry the offending line number.
EngineConfig parse_config(std::string_view text, EngineConfig base = {});
EngineConfig load_config(const std::filesystem::path& path, EngineConfig base = {});

/// Renders every key in the format parse_config accepts.
std::string dump_config(const EngineConfig& cfg);

}  // namespace rtsa
