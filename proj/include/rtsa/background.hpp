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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rtsa/engine.hpp"

namespace rtsa {

/// A named set of config overrides applied on top of a base config.
struct Profile {
  ProfileName name = ProfileName::Realtime;
  // `key = value` pairs in the config-file vocabulary.
  std::vector<std::pair<std::string, std::string>> overrides;
};

/// No overrides.
Profile realtime_profile();

/// Slow decay for a months-scale horizon: 7-day half-life, 6-hour snapshot
/// interval, hourly decay/prune cycles.
Profile background_profile();

/// Base config with the profile's overrides applied. Throws Error if an
/// override does not parse or if a Background profile ends up with a shorter
/// half-life than `base`.
EngineConfig apply_profile(const EngineConfig& base, const Profile& profile);

struct BackgroundResult {
  std::filesystem::path manifest;
  Snapshot snapshot;
  ReplayReport report;
  std::size_t spell_corrections = 0;
};

/// Suffix of time-ordered `events` no older than `horizon_ms` before the
/// last event. A non-positive horizon keeps everything.
std::span<const Event> within_horizon(std::span<const Event> events, Millis horizon_ms);

/// Batch replay of `events` through the regular engine under `profile`, then
/// one final ranking cycle merged with the pairwise spelling table over every
/// surviving query. Only that final snapshot is written to `out_dir`.
BackgroundResult run_background(std::span<const Event> events, const EngineConfig& base,
                                const Profile& profile, const std::filesystem::path& out_dir);

}  // namespace rtsa
