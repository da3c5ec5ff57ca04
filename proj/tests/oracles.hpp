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

// Reference implementations used by the tests. Each one is written straight
// from the definition, without sharing code with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rtsa/events.hpp"

namespace oracle {

using rtsa::Millis;
using rtsa::QueryEvent;

using PairCounts = std::map<std::pair<std::string, std::string>, long>;

struct SessionRules {
  std::size_t window_size = 10;
  Millis window_age_ms = 15 * 60 * 1000;
};

inline std::map<std::string, std::vector<const QueryEvent*>> by_session(
    const std::vector<QueryEvent>& events) {
  std::map<std::string, std::vector<const QueryEvent*>> sessions;
  for (const QueryEvent& ev : events) sessions[ev.session_id].push_back(&ev);
  return sessions;
}

// Ordered pairs (earlier, later) per session, each counted once per session.
// `later` pairs with the up to window_size - 1 events before it that are no
// older than window_age_ms.
inline std::set<std::pair<std::string, std::string>> session_pairs(
    const std::vector<const QueryEvent*>& s, const SessionRules& rules) {
  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const std::size_t first = j + 1 >= rules.window_size ? j + 1 - rules.window_size : 0;
    for (std::size_t i = first; i < j; ++i) {
      if (s[i]->ts < s[j]->ts - rules.window_age_ms) continue;
      if (s[i]->query.text == s[j]->query.text) continue;
      pairs.emplace(s[i]->query.text, s[j]->query.text);
    }
  }
  return pairs;
}

// Number of sessions in which each ordered pair occurs.
inline PairCounts count_pairs(const std::vector<QueryEvent>& events, const SessionRules& rules) {
  PairCounts counts;
  for (const auto& [sid, s] : by_session(events)) {
    for (const auto& p : session_pairs(s, rules)) ++counts[p];
  }
  return counts;
}

// Fraction of sessions containing `a` in which `b` follows `a`.
inline double session_crf(const std::vector<QueryEvent>& events, const std::string& a,
                          const std::string& b, const SessionRules& rules) {
  long with_a = 0;
  long with_pair = 0;
  for (const auto& [sid, s] : by_session(events)) {
    const bool has_a = std::any_of(s.begin(), s.end(), [&](const QueryEvent* e) { return e->query.text == a; });
    if (!has_a) continue;
    ++with_a;
    if (session_pairs(s, rules).count({a, b}) > 0) ++with_pair;
  }
  return with_a == 0 ? 0.0 : static_cast<double>(with_pair) / static_cast<double>(with_a);
}

// Scalar association metrics over a 2x2 table given cell by cell:
//   a = n11, b = n12, c = n21, d = n22 (rows B / not B, columns A / not A).
struct Cells {
  double a, b, c, d;
};

inline double pmi(const Cells& t) {
  const double n = t.a + t.b + t.c + t.d;
  const double p_ab = t.a / n;
  const double p_b = (t.a + t.b) / n;
  const double p_a = (t.a + t.c) / n;
  return std::log(p_ab / (p_a * p_b)) / std::log(2.0);
}

// G^2 written as 2N times the mutual information in nats.
inline double llr(const Cells& t) {
  const double n = t.a + t.b + t.c + t.d;
  auto h = [n](std::initializer_list<double> xs) {
    double out = 0.0;
    for (double x : xs) {
      if (x > 0) out -= (x / n) * std::log(x / n);
    }
    return out;
  };
  const double h_rows = h({t.a + t.b, t.c + t.d});
  const double h_cols = h({t.a + t.c, t.b + t.d});
  const double h_cells = h({t.a, t.b, t.c, t.d});
  return std::max(0.0, 2.0 * n * (h_rows + h_cols - h_cells));
}

// Pearson's sum of (observed - expected)^2 / expected.
inline double chi2(const Cells& t) {
  const double n = t.a + t.b + t.c + t.d;
  const double rows[2] = {t.a + t.b, t.c + t.d};
  const double cols[2] = {t.a + t.c, t.b + t.d};
  const double obs[2][2] = {{t.a, t.b}, {t.c, t.d}};
  double sum = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double e = rows[r] * cols[c] / n;
      sum += (obs[r][c] - e) * (obs[r][c] - e) / e;
    }
  }
  return sum;
}

inline double crf(const Cells& t) { return t.a / (t.a + t.c); }

// Restricted Damerau-Levenshtein (optimal string alignment) with a full
// matrix. `sub(i, j)` is the cost of substituting x[i] by y[j].
template <typename Str, typename Sub>
double osa(const Str& x, const Str& y, Sub sub, double ins = 1, double del = 1, double trn = 1) {
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<double>(i) * del;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<double>(j) * ins;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double v = d[i - 1][j] + del;
      v = std::min(v, d[i][j - 1] + ins);
      v = std::min(v, d[i - 1][j - 1] + (x[i - 1] == y[j - 1] ? 0.0 : sub(i - 1, j - 1)));
      if (i >= 2 && j >= 2 && x[i - 1] == y[j - 2] && x[i - 2] == y[j - 1]) {
        v = std::min(v, d[i - 2][j - 2] + trn);
      }
      d[i][j] = v;
    }
  }
  return d[n][m];
}

template <typename Str>
double unit_osa(const Str& x, const Str& y) {
  return osa(x, y, [](std::size_t, std::size_t) { return 1.0; });
}

// Positional costs: boundary cost when either index is the first or last
// position of its string.
template <typename Str>
double positional_osa(const Str& x, const Str& y, double internal, double boundary) {
  return osa(x, y, [&](std::size_t i, std::size_t j) {
    const bool edge = i == 0 || i + 1 == x.size() || j == 0 || j + 1 == y.size();
    return edge ? boundary : internal;
  });
}

struct Correction {
  std::string query;
  double distance;
  double ratio;
};

// O(n^2) spelling table over plain (sigil-free) strings.
inline std::map<std::string, Correction> pairwise_spelling(
    const std::vector<std::pair<std::string, double>>& queries, double internal, double boundary,
    double distance_max, double ratio_min) {
  std::map<std::string, Correction> table;
  for (const auto& [a, wa] : queries) {
    std::optional<std::pair<std::string, double>> best;  // query, weight
    std::optional<Correction> best_c;
    for (const auto& [b, wb] : queries) {
      if (a == b) continue;
      const double ratio = wb / std::max(wa, 1e-6);
      if (ratio < ratio_min) continue;
      const double dist = positional_osa(a, b, internal, boundary);
      if (dist > distance_max) continue;
      bool better = !best;
      if (best) {
        if (wb != best->second) {
          better = wb > best->second;
        } else if (dist != best_c->distance) {
          better = dist < best_c->distance;
        } else {
          better = b < best->first;
        }
      }
      if (better) {
        best = std::make_pair(b, wb);
        best_c = Correction{b, dist, ratio};
      }
    }
    if (best_c) table.emplace(a, *best_c);
  }
  return table;
}

}  // namespace oracle
