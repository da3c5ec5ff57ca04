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
#include <random>

#include "oracles.hpp"
#include "rtsa/association.hpp"
#include "rtsa/engine.hpp"
#include "support.hpp"

using namespace rtsa;
using testing::qev;

namespace {

ContingencyTable table(double n11, double n12, double n21, double n22) {
  return ContingencyTable{n11, n12, n21, n22};
}

oracle::Cells cells(const ContingencyTable& t) { return {t.n11, t.n12, t.n21, t.n22}; }

}  // namespace

TEST_SUITE("association") {

TEST_CASE("absent pair has insufficient support") {
  Stores stores;
  const EngineConfig cfg = testing::counting_config();
  CHECK_THROWS_AS(build_table(normalize_query("a"), normalize_query("b"), 0, stores, cfg), InsufficientSupport);
}

TEST_CASE("single two-query session") {
  const EngineConfig cfg = testing::counting_config();
  Engine engine(cfg);
  engine.on_query(qev("s", "a", 1));
  engine.on_query(qev("s", "b", 2));
  const ContingencyTable t = build_table(normalize_query("a"), normalize_query("b"), 3, engine.stores(), cfg);
  CHECK(t.n11 == 1.0);
  CHECK(t.total() == 2.0);
  CHECK(t.n12 == 0.0);
  CHECK(t.n21 == 0.0);
  CHECK(t.n22 == 1.0);
  CHECK(conditional_relative_frequency(t) == 1.0);
}

TEST_CASE("minimum support gates the table") {
  EngineConfig cfg = testing::counting_config();
  cfg.min_pair_support = 2;
  Engine engine(cfg);
  engine.on_query(qev("s", "a", 1));
  engine.on_query(qev("s", "b", 2));
  CHECK_THROWS_AS(build_table(normalize_query("a"), normalize_query("b"), 3, engine.stores(), cfg),
                  InsufficientSupport);
}

TEST_CASE("cells always sum to the total") {
  EngineConfig cfg;
  cfg.rate_limit_max = 0;
  cfg.min_pair_support = 0;
  Engine engine(cfg);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 400; ++i) {
    const auto src = static_cast<QuerySource>(rng() % 4);
    engine.on_query(qev("s" + std::to_string(rng() % 30), "q" + std::to_string(rng() % 12), 1000 + i * 7000, src));
  }
  const Millis now = 1000 + 400 * 7000;
  int checked = 0;
  engine.stores().cooc.for_each_pair([&](const std::string& a, const std::string& b, const CoocEntry&) {
    const ContingencyTable t = build_table(normalize_query(a), normalize_query(b), now, engine.stores(), cfg);
    CHECK(std::fabs(t.n11 + t.n12 + t.n21 + t.n22 - t.total()) < 1e-9);
    CHECK(t.n11 >= 0);
    CHECK(t.n12 >= 0);
    CHECK(t.n21 >= 0);
    CHECK(t.n22 >= -1e-9);
    ++checked;
  });
  CHECK(checked > 20);
}

TEST_CASE("conditional relative frequency") {
  CHECK(conditional_relative_frequency(table(1, 0, 0, 5)) == 1.0);
  CHECK(conditional_relative_frequency(table(1, 0, 3, 5)) == 0.25);
  CHECK(conditional_relative_frequency(table(0, 2, 0, 5)) == 0.0);
}

TEST_CASE("CRF equals the session fraction on a small log") {
  // 20 events over 8 sessions.
  const std::vector<QueryEvent> log = {
      qev("s1", "a", 1), qev("s1", "b", 2), qev("s1", "c", 3),
      qev("s2", "a", 4), qev("s2", "c", 5),
      qev("s3", "b", 6), qev("s3", "a", 7),
      qev("s4", "a", 8), qev("s4", "b", 9), qev("s4", "a", 10),
      qev("s5", "c", 11), qev("s5", "b", 12),
      qev("s6", "a", 13),
      qev("s7", "b", 14), qev("s7", "c", 15), qev("s7", "a", 16), qev("s7", "b", 17),
      qev("s8", "c", 18), qev("s8", "a", 19), qev("s8", "b", 20),
  };
  REQUIRE(log.size() == 20);
  const EngineConfig cfg = testing::counting_config();
  Engine engine(cfg);
  for (const QueryEvent& ev : log) engine.on_query(ev);
  const oracle::SessionRules rules{static_cast<std::size_t>(cfg.session_window_size), cfg.session_window_age_ms};
  for (const char* a : {"a", "b", "c"}) {
    for (const char* b : {"a", "b", "c"}) {
      if (std::string(a) == b) continue;
      const double expected = oracle::session_crf(log, a, b, rules);
      if (expected == 0.0) continue;
      const ContingencyTable t = build_table(normalize_query(a), normalize_query(b), 21, engine.stores(), cfg);
      CHECK(std::fabs(conditional_relative_frequency(t) - expected) < 1e-9);
    }
  }
}

TEST_CASE("PMI of an independent table is zero") {
  // n11 = row1 * col1 / N
  const ContingencyTable t = table(6, 4, 9, 6);
  CHECK(std::fabs(t.n11 - t.row1() * t.col1() / t.total()) < 1e-12);
  CHECK(std::fabs(pmi(t)) < 1e-12);
}

TEST_CASE("PMI of a perfectly dependent table is one bit") {
  CHECK(pmi(table(5, 0, 0, 5)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("PMI is scale invariant") {
  const ContingencyTable t = table(3, 7, 2, 11);
  for (double c : {0.001, 0.5, 3.0, 1e6}) {
    CHECK(pmi(table(3 * c, 7 * c, 2 * c, 11 * c)) == doctest::Approx(pmi(t)).epsilon(1e-12));
  }
}

TEST_CASE("PMI needs nonzero counts") {
  CHECK_THROWS_AS(pmi(table(0, 1, 1, 1)), UndefinedMetric);
  CHECK_THROWS_AS(pmi(table(0, 0, 0, 0)), UndefinedMetric);
}

TEST_CASE("LLR closed forms") {
  CHECK(std::fabs(log_likelihood_ratio(table(6, 4, 9, 6))) < 1e-9);
  CHECK(log_likelihood_ratio(table(10, 0, 0, 10)) == doctest::Approx(27.725887222397812).epsilon(1e-12));
  CHECK(log_likelihood_ratio(table(10, 0, 0, 10)) == doctest::Approx(2 * 20 * std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(log_likelihood_ratio(table(0, 0, 0, 0)), UndefinedMetric);
}

TEST_CASE("LLR is never negative") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const ContingencyTable t = table(u(rng) + 1e-3, u(rng), u(rng), u(rng));
    CHECK(log_likelihood_ratio(t) >= 0.0);
  }
}

TEST_CASE("chi-square closed forms and symmetry") {
  CHECK(std::fabs(chi_square(table(6, 4, 9, 6))) < 1e-9);
  CHECK(chi_square(table(10, 0, 0, 10)) == doctest::Approx(20.0).epsilon(1e-12));
  const ContingencyTable t = table(3, 7, 2, 11);
  const ContingencyTable transposed = table(3, 2, 7, 11);
  CHECK(chi_square(t) == doctest::Approx(chi_square(transposed)).epsilon(1e-12));
  CHECK_THROWS_AS(chi_square(table(1, 0, 1, 0)), UndefinedMetric);
}

TEST_CASE("metrics agree with the scalar reference") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.5, 200.0);
  for (int i = 0; i < 200; ++i) {
    const ContingencyTable t = table(u(rng), u(rng), u(rng), u(rng));
    CHECK(std::fabs(pmi(t) - oracle::pmi(cells(t))) < 1e-9);
    CHECK(std::fabs(log_likelihood_ratio(t) - oracle::llr(cells(t))) < 1e-9);
    CHECK(std::fabs(chi_square(t) - oracle::chi2(cells(t))) < 1e-9);
    CHECK(std::fabs(conditional_relative_frequency(t) - oracle::crf(cells(t))) < 1e-12);
  }
}

}  // TEST_SUITE
