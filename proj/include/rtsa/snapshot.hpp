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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtsa/spelling.hpp"

namespace rtsa {

enum class ProfileName : std::uint8_t { Realtime, Background };

std::string_view to_string(ProfileName p);
/// Accepts "Realtime"/"Background" in any case.
ProfileName parse_profile_name(std::string_view name);

struct Suggestion {
  Query query;
  double score = 0.0;
  double crf = 0.0;
  double pmi = 0.0;
  double llr = 0.0;
};

struct SnapshotEntry {
  // Descending score, ties by text.
  std::vector<Suggestion> suggestions;
  std::optional<SpellCorrection> spell;
};

struct Snapshot {
  std::int64_t generation_id = 0;
  Millis event_ts = 0;
  ProfileName profile = ProfileName::Realtime;
  std::map<Query, SnapshotEntry> entries;
};

struct Manifest {
  std::string file;
  std::int64_t generation_id = 0;
  Millis event_ts = 0;
};

/// Sort order used everywhere suggestions are ranked.
bool suggestion_before(const Suggestion& a, const Suggestion& b);

/// One entries-file line: {"q":..,"suggestions":[..],"spell":{..}|null}.
std::string format_entry(const Query& q, const SnapshotEntry& entry);
/// Inverse of format_entry. Throws Error on anything structurally invalid.
std::pair<Query, SnapshotEntry> parse_entry(std::string_view line);

std::string snapshot_file_name(std::int64_t generation_id, ProfileName profile);
std::string manifest_file_name(ProfileName profile);

/// Publishes `s` into `dir`: the entries file is written under a temporary
/// name, synced and renamed into place, then the manifest is replaced the same
/// way. Keeps the newest `retain` snapshot files of the profile. Returns the
/// manifest path. On IO failure throws Error and leaves the previous manifest
/// untouched.
std::filesystem::path write_snapshot(const Snapshot& s, const std::filesystem::path& dir,
                                     int retain = 12);

/// nullopt when the manifest does not exist. Throws Error when it is corrupt.
std::optional<Manifest> read_manifest(const std::filesystem::path& dir, ProfileName profile);

/// Loads and structurally validates the file a manifest names: the name must
/// match the generation and profile, every line must parse, and the file must
/// end with a newline. Throws Error otherwise.
Snapshot load_snapshot(const std::filesystem::path& dir, const Manifest& manifest,
                       ProfileName profile);

}  // namespace rtsa
