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

#include "rtsa/snapshot.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace rtsa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void throw_io(const std::string& what, const fs::path& path) {
  throw Error(fmt::format("{} '{}': {}", what, path.string(), std::strerror(errno)));
}

// Writes `content` to a temporary sibling, syncs it, and renames it over
// `target`.
void publish_file(const fs::path& target, std::string_view content) {
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp");
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw_io("cannot create", tmp);
  std::size_t written = 0;
  while (written < content.size()) {
    const ssize_t n = ::write(fd, content.data() + written, content.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      ::unlink(tmp.c_str());
      throw_io("cannot write", tmp);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(tmp.c_str());
    throw_io("cannot sync", tmp);
  }
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw_io("cannot rename into", target);
  }
}

void sync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

std::optional<std::int64_t> generation_of(const std::string& name, ProfileName profile) {
  const std::string prefix = "snapshot-";
  const std::string suffix = fmt::format(".{}.jsonl", to_string(profile));
  if (name.size() <= prefix.size() + suffix.size() || !name.starts_with(prefix) ||
      !name.ends_with(suffix)) {
    return std::nullopt;
  }
  const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
  return std::stoll(digits);
}

void apply_retention(const fs::path& dir, ProfileName profile, int retain) {
  std::vector<std::pair<std::int64_t, fs::path>> files;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (auto gen = generation_of(de.path().filename().string(), profile)) {
      files.emplace_back(*gen, de.path());
    }
  }
  if (files.size() <= static_cast<std::size_t>(retain)) return;
  std::sort(files.begin(), files.end());
  const std::size_t drop = files.size() - static_cast<std::size_t>(retain);
  for (std::size_t i = 0; i < drop; ++i) {
    std::error_code ec;
    fs::remove(files[i].second, ec);
  }
}

const json& member(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(fmt::format("missing field '{}'", key));
  return *it;
}

Query entry_query(const json& j) {
  const json& q = member(j, "q");
  if (!q.is_string()) throw Error("field 'q' must be a string");
  return normalize_query(q.get<std::string>());
}

double number(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_number()) throw Error(fmt::format("field '{}' must be a number", key));
  return v.get<double>();
}

}  // namespace

std::string_view to_string(ProfileName p) {
  return p == ProfileName::Realtime ? "Realtime" : "Background";
}

ProfileName parse_profile_name(std::string_view name) {
  const std::string lower = normalize_text(name);
  if (lower == "realtime") return ProfileName::Realtime;
  if (lower == "background") return ProfileName::Background;
  throw Error(fmt::format("unknown profile '{}'", name));
}

bool suggestion_before(const Suggestion& a, const Suggestion& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.query.text < b.query.text;
}

std::string format_entry(const Query& q, const SnapshotEntry& entry) {
  ordered_json j;
  j["q"] = q.text;
  ordered_json suggestions = ordered_json::array();
  for (const Suggestion& s : entry.suggestions) {
    ordered_json item;
    item["q"] = s.query.text;
    item["score"] = s.score;
    item["crf"] = s.crf;
    item["pmi"] = s.pmi;
    item["llr"] = s.llr;
    suggestions.push_back(std::move(item));
  }
  j["suggestions"] = std::move(suggestions);
  if (entry.spell) {
    ordered_json spell;
    spell["q"] = entry.spell->query.text;
    spell["dist"] = entry.spell->distance;
    spell["ratio"] = entry.spell->ratio;
    j["spell"] = std::move(spell);
  } else {
    j["spell"] = nullptr;
  }
  return j.dump();
}

std::pair<Query, SnapshotEntry> parse_entry(std::string_view line) {
  const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw Error("entry is not a JSON object");
  std::pair<Query, SnapshotEntry> out;
  out.first = entry_query(j);
  const json& suggestions = member(j, "suggestions");
  if (!suggestions.is_array()) throw Error("field 'suggestions' must be an array");
  for (const json& s : suggestions) {
    if (!s.is_object()) throw Error("suggestion must be an object");
    out.second.suggestions.push_back(
        {entry_query(s), number(s, "score"), number(s, "crf"), number(s, "pmi"), number(s, "llr")});
  }
  const json& spell = member(j, "spell");
  if (spell.is_object()) {
    out.second.spell = SpellCorrection{entry_query(spell), number(spell, "dist"), number(spell, "ratio")};
  } else if (!spell.is_null()) {
    throw Error("field 'spell' must be an object or null");
  }
  return out;
}

std::string snapshot_file_name(std::int64_t generation_id, ProfileName profile) {
  return fmt::format("snapshot-{}.{}.jsonl", generation_id, to_string(profile));
}

std::string manifest_file_name(ProfileName profile) {
  return fmt::format("MANIFEST.{}", to_string(profile));
}

fs::path write_snapshot(const Snapshot& s, const fs::path& dir, int retain) {
  fs::create_directories(dir);
  std::string body;
  for (const auto& [q, entry] : s.entries) {
    body += format_entry(q, entry);
    body += '\n';
  }
  const std::string file = snapshot_file_name(s.generation_id, s.profile);
  publish_file(dir / file, body);

  ordered_json manifest;
  manifest["file"] = file;
  manifest["generation_id"] = s.generation_id;
  manifest["event_ts"] = s.event_ts;
  const fs::path manifest_path = dir / manifest_file_name(s.profile);
  publish_file(manifest_path, manifest.dump() + "\n");
  sync_dir(dir);
  apply_retention(dir, s.profile, std::max(retain, 1));
  return manifest_path;
}

std::optional<Manifest> read_manifest(const fs::path& dir, ProfileName profile) {
  const fs::path path = dir / manifest_file_name(profile);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!fs::exists(path)) return std::nullopt;
    // The first manifest may have appeared since the failed open.
    in.clear();
    in.open(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot read '{}'", path.string()));
  }
  std::string line;
  std::getline(in, line);
  const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw Error(fmt::format("corrupt manifest '{}'", path.string()));
  Manifest m;
  const json& file = member(j, "file");
  const json& gen = member(j, "generation_id");
  const json& ts = member(j, "event_ts");
  if (!file.is_string() || !gen.is_number_integer() || !ts.is_number_integer()) {
    throw Error(fmt::format("corrupt manifest '{}'", path.string()));
  }
  m.file = file.get<std::string>();
  m.generation_id = gen.get<std::int64_t>();
  m.event_ts = ts.get<Millis>();
  return m;
}

Snapshot load_snapshot(const fs::path& dir, const Manifest& manifest, ProfileName profile) {
  if (manifest.file != snapshot_file_name(manifest.generation_id, profile)) {
    throw Error(fmt::format("manifest names '{}' for generation {}", manifest.file,
                            manifest.generation_id));
  }
  const fs::path path = dir / manifest.file;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string body = buffer.str();
  if (!body.empty() && body.back() != '\n') throw Error(fmt::format("truncated snapshot '{}'", path.string()));

  Snapshot s;
  s.generation_id = manifest.generation_id;
  s.event_ts = manifest.event_ts;
  s.profile = profile;
  std::string_view rest = body;
  std::size_t line_no = 0;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    const std::string_view line = rest.substr(0, nl);
    rest.remove_prefix(nl + 1);
    ++line_no;
    try {
      auto [q, entry] = parse_entry(line);
      if (!s.entries.emplace(std::move(q), std::move(entry)).second) throw Error("duplicate query");
    } catch (const Error& e) {
      throw Error(fmt::format("'{}' line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return s;
}

}  // namespace rtsa
