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

#include "rtsa/background.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace rtsa {

Profile realtime_profile() { return Profile{ProfileName::Realtime, {}}; }

Profile background_profile() {
  return Profile{ProfileName::Background,
                 {
                     {"halflife_ms", std::to_string(7LL * 24 * 60 * 60 * 1000)},
                     {"snapshot_interval_ms", std::to_string(6LL * 60 * 60 * 1000)},
                     {"decay_cycle_interval_ms", std::to_string(60LL * 60 * 1000)},
                 }};
}

EngineConfig apply_profile(const EngineConfig& base, const Profile& profile) {
  EngineConfig cfg = base;
  for (const auto& [key, value] : profile.overrides) set_config_value(cfg, key, value);
  if (profile.name == ProfileName::Background && cfg.halflife_ms < base.halflife_ms) {
    throw Error(fmt::format("background half-life {} ms is shorter than the realtime {} ms",
                            cfg.halflife_ms, base.halflife_ms));
  }
  return cfg;
}

std::span<const Event> within_horizon(std::span<const Event> events, Millis horizon_ms) {
  if (events.empty() || horizon_ms <= 0) return events;
  const Millis cutoff = event_ts(events.back()) - horizon_ms;
  const auto first = std::partition_point(events.begin(), events.end(),
                                          [cutoff](const Event& ev) { return event_ts(ev) < cutoff; });
  return events.subspan(static_cast<std::size_t>(first - events.begin()));
}

BackgroundResult run_background(std::span<const Event> events, const EngineConfig& base,
                                const Profile& profile, const std::filesystem::path& out_dir) {
  const EngineConfig cfg = apply_profile(base, profile);
  Engine engine(cfg, profile.name);
  if (auto m = read_manifest(out_dir, profile.name)) engine.resume_generation(m->generation_id);

  EngineSink sink(engine);
  ReplayClock clock;
  BackgroundResult result;
  result.report = replay(events, clock, sink, replay_options(cfg, /*final_cycle=*/true));

  Snapshot snap = sink.last_snapshot() ? *sink.last_snapshot() : engine.run_ranking_cycle(0);
  const auto corrections =
      background_pairwise_job(weighted_queries(engine.stores(), snap.event_ts, cfg), cfg);
  for (const auto& [q, correction] : corrections) snap.entries[q].spell = correction;
  result.spell_corrections = corrections.size();
  result.manifest = write_snapshot(snap, out_dir, cfg.retain_snapshots);
  result.snapshot = std::move(snap);
  return result;
}

}  // namespace rtsa
