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

#include <algorithm>

#include "rtsa/config.hpp"
#include "rtsa/query.hpp"
#include "support.hpp"

using namespace rtsa;

TEST_SUITE("core_model") {

TEST_CASE("normalize_query lowercases, collapses and trims") {
  const Query q = normalize_query("  Steve  JOBS ");
  CHECK(q.text == "steve jobs");
  CHECK(q.sigil == Sigil::None);
}

TEST_CASE("hashtags and mentions carry a sigil") {
  const Query h = normalize_query("#SCOTUS");
  CHECK(h.text == "#scotus");
  CHECK(h.sigil == Sigil::Hashtag);
  const Query m = normalize_query("@BarackObama");
  CHECK(m.text == "@barackobama");
  CHECK(m.sigil == Sigil::Mention);
  CHECK(sigil_of("scotus") == Sigil::None);
}

TEST_CASE("misspellings pass through unchanged") {
  const Query q = normalize_query("justin beiber");
  CHECK(q.text == "justin beiber");
  CHECK(q.sigil == Sigil::None);
}

TEST_CASE("blank input is rejected") {
  CHECK_THROWS_AS(normalize_query(""), EmptyQuery);
  CHECK_THROWS_AS(normalize_query(" \t\n "), EmptyQuery);
  // U+3000 ideographic space and U+00A0 no-break space.
  CHECK_THROWS_AS(normalize_query("\xE3\x80\x80\xC2\xA0"), EmptyQuery);
  CHECK(normalize_text("   ").empty());
}

TEST_CASE("unicode whitespace collapses and non-ASCII letters are kept") {
  CHECK(normalize_query("caf\xC3\xA9\xE2\x80\x83NOIR").text == "caf\xC3\xA9 noir");
  CHECK(normalize_query("a\xC2\xA0\xC2\xA0" "b").text == "a b");
}

TEST_CASE("normalization is idempotent") {
  for (const char* raw : {"  Steve  JOBS ", "#SCOTUS", "a\tb\nc", "x"}) {
    const std::string once = normalize_query(raw).text;
    CHECK(normalize_query(once).text == once);
  }
}

TEST_CASE("queries compare by text") {
  CHECK(normalize_query("A") == normalize_query("a"));
  CHECK(normalize_query("a") < normalize_query("b"));
  CHECK(std::hash<Query>{}(normalize_query("X")) == std::hash<Query>{}(normalize_query("x")));
}

TEST_CASE("tokenize splits on whitespace runs") {
  const auto tokens = tokenize("  stay foolish\t steve\xE2\x80\x80jobs ");
  REQUIRE(tokens.size() == 4);
  CHECK(tokens[0] == "stay");
  CHECK(tokens[3] == "jobs");
  CHECK(tokenize("   ").empty());
}

TEST_CASE("query sources round-trip through their wire names") {
  for (auto s : {QuerySource::Typed, QuerySource::HashtagClick, QuerySource::TrendClick,
                 QuerySource::RelatedClick}) {
    CHECK(parse_query_source(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_query_source("clicked"), Error);
}

TEST_CASE("default config validates") {
  CHECK(validate_config(EngineConfig{}).empty());
}

TEST_CASE("zero half-life is reported") {
  EngineConfig cfg;
  cfg.halflife_ms = 0;
  const auto errors = validate_config(cfg);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0] == "halflife must be positive");
}

TEST_CASE("typed weight below hashtag-click weight is reported") {
  EngineConfig cfg;
  cfg.source_weights[static_cast<std::size_t>(QuerySource::Typed)] = 0.1;
  cfg.source_weights[static_cast<std::size_t>(QuerySource::HashtagClick)] = 0.5;
  const auto errors = validate_config(cfg);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].find("typed") != std::string::npos);
}

TEST_CASE("every violation is listed") {
  EngineConfig cfg;
  cfg.halflife_ms = 0;
  cfg.top_k = 0;
  cfg.interpolation_mu = 2;
  cfg.edit_costs.boundary_sub = 0.5;
  CHECK(validate_config(cfg).size() == 4);
}

TEST_CASE("config file format") {
  const EngineConfig cfg = parse_config(
      "# comment\n"
      "halflife_ms = 1000   # trailing comment\n"
      "\n"
      "decay_fn = linear\n"
      "source_weight.related_click=0.25\n"
      "edit.delete = 2\n");
  CHECK(cfg.halflife_ms == 1000);
  CHECK(cfg.decay_fn == DecayFn::Linear);
  CHECK(cfg.source_weight(QuerySource::RelatedClick) == 0.25);
  CHECK(cfg.edit_costs.erase == 2.0);
  CHECK(cfg.top_k == EngineConfig{}.top_k);
}

TEST_CASE("config errors name the line") {
  try {
    parse_config("top_k = 3\nnot_a_key = 1\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("top_k = three\n"), Error);
  CHECK_THROWS_AS(parse_config("top_k\n"), Error);
  CHECK_THROWS_AS(parse_config("decay_fn = cubic\n"), Error);
}

TEST_CASE("dump_config round-trips") {
  EngineConfig cfg;
  cfg.halflife_ms = 12345;
  cfg.z_crf = 0.1 + 0.2;
  cfg.decay_fn = DecayFn::Step;
  cfg.edit_costs.transpose = 0.75;
  const EngineConfig back = parse_config(dump_config(cfg));
  CHECK(dump_config(back) == dump_config(cfg));
  CHECK(back.z_crf == cfg.z_crf);
}

TEST_CASE("load_config reports a missing file") {
  testing::TempDir dir;
  CHECK_THROWS_AS(load_config(dir / "absent.conf"), Error);
}

}  // TEST_SUITE
