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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "rtsa/background.hpp"
#include "support.hpp"

using namespace rtsa;
using testing::kHour;
using testing::qev;
using testing::tev;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Event> sample_events() {
  std::vector<Event> events;
  std::mt19937_64 rng(11);
  const std::vector<std::string> vocab = {"justin bieber", "justin beiber", "obama", "obamma", "apple",
                                          "steve jobs", "#scotus", "healthcare"};
  for (int i = 0; i < 3000; ++i) {
    const auto pick = rng() % 100;
    // Correct spellings are far more common than the misspellings.
    std::size_t idx = pick < 30 ? 0 : pick < 31 ? 1 : pick < 55 ? 2 : pick < 56 ? 3 : 4 + pick % 4;
    events.emplace_back(qev("s" + std::to_string(rng() % 400), vocab[idx], 1000 + i * 60'000));
    if (i % 10 == 0) events.emplace_back(tev("t" + std::to_string(i), "steve jobs apple today", 1000 + i * 60'000));
  }
  return events;
}

}  // namespace

TEST_SUITE("background") {

TEST_CASE("background profile only changes configuration") {
  const EngineConfig base;
  const EngineConfig cfg = apply_profile(base, background_profile());
  CHECK(cfg.halflife_ms == 7 * 24 * kHour);
  CHECK(cfg.snapshot_interval_ms == 6 * kHour);
  CHECK(cfg.decay_cycle_interval_ms == kHour);
  CHECK(cfg.top_k == base.top_k);
  const EngineConfig rt = apply_profile(base, realtime_profile());
  CHECK(dump_config(rt) == dump_config(base));
}

TEST_CASE("background half-life may not be shorter than the base") {
  EngineConfig base;
  base.halflife_ms = 30LL * 24 * kHour;
  CHECK_THROWS_AS(apply_profile(base, background_profile()), Error);
  Profile bad{ProfileName::Background, {{"no_such_key", "1"}}};
  CHECK_THROWS_AS(apply_profile(EngineConfig{}, bad), Error);
}

TEST_CASE("identical configs give byte-identical output under either profile") {
  const auto events = sample_events();
  EngineConfig base;
  base.rate_limit_max = 0;
  testing::TempDir a("bg-a");
  testing::TempDir b("bg-b");
  const BackgroundResult ra = run_background(events, base, Profile{ProfileName::Realtime, {}}, a.path());
  const BackgroundResult rb = run_background(events, base, Profile{ProfileName::Background, {}}, b.path());
  const std::string fa = slurp(a / snapshot_file_name(ra.snapshot.generation_id, ProfileName::Realtime));
  const std::string fb = slurp(b / snapshot_file_name(rb.snapshot.generation_id, ProfileName::Background));
  CHECK(!fa.empty());
  CHECK(fa == fb);
  CHECK(ra.snapshot.generation_id == rb.snapshot.generation_id);
}

TEST_CASE("background run publishes one snapshot with spelling corrections") {
  const auto events = sample_events();
  EngineConfig base;
  base.rate_limit_max = 0;
  testing::TempDir dir;
  const BackgroundResult r = run_background(events, base, background_profile(), dir.path());
  CHECK(r.report.delivered == events.size());
  CHECK(r.manifest.filename() == "MANIFEST.Background");
  std::size_t files = 0;
  for (const auto& de : std::filesystem::directory_iterator(dir.path())) {
    files += de.path().filename().string().starts_with("snapshot-") ? 1 : 0;
  }
  CHECK(files == 1);
  CHECK(r.spell_corrections >= 2);
  const auto m = read_manifest(dir.path(), ProfileName::Background);
  REQUIRE(m.has_value());
  const Snapshot s = load_snapshot(dir.path(), *m, ProfileName::Background);
  const auto it = s.entries.find(normalize_query("justin beiber"));
  REQUIRE(it != s.entries.end());
  REQUIRE(it->second.spell.has_value());
  CHECK(it->second.spell->query.text == "justin bieber");
  CHECK(s.entries.at(normalize_query("obamma")).spell->query.text == "obama");
  // A second run continues the generation sequence.
  const BackgroundResult again = run_background(events, base, background_profile(), dir.path());
  CHECK(again.snapshot.generation_id > r.snapshot.generation_id);
}

TEST_CASE("slow decay keeps a two-day-old pair") {
  const EngineConfig cfg = apply_profile(EngineConfig{}, background_profile());
  Engine engine(cfg, ProfileName::Background);
  const Millis t = 1'000'000;
  engine.on_query(qev("s", "a", t));
  engine.on_query(qev("s", "b", t + 1000));
  const Millis later = t + 1000 + 2 * 24 * kHour;
  engine.run_decay_prune_cycle(later);
  const double w = engine.stores().cooc.weight("a", "b", later, cfg);
  CHECK(w >= 0.82);
  CHECK(w == doctest::Approx(std::pow(2.0, -2.0 / 7.0)).epsilon(1e-12));
}

TEST_CASE("empty input gives an empty background snapshot") {
  testing::TempDir dir;
  const BackgroundResult r = run_background({}, EngineConfig{}, background_profile(), dir.path());
  CHECK(r.snapshot.entries.empty());
  CHECK(r.snapshot.profile == ProfileName::Background);
  const auto m = read_manifest(dir.path(), ProfileName::Background);
  REQUIRE(m.has_value());
  CHECK(load_snapshot(dir.path(), *m, ProfileName::Background).entries.empty());
}

TEST_CASE("horizon keeps the trailing window") {
  std::vector<Event> events;
  for (int d = 0; d < 10; ++d) events.emplace_back(qev("s", "q", d * 24 * kHour));
  const std::span<const Event> all(events);
  CHECK(within_horizon(all, 3 * 24 * kHour).size() == 4);
  CHECK(event_ts(within_horizon(all, 3 * 24 * kHour).front()) == 6 * 24 * kHour);
  CHECK(within_horizon(all, 0).size() == 10);
  CHECK(within_horizon(all, 100 * 24 * kHour).size() == 10);
  CHECK(within_horizon({}, kHour).empty());
}

}  // TEST_SUITE
