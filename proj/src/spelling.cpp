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

#include "rtsa/spelling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace rtsa {
namespace {

struct Ranked {
  const Query* query = nullptr;
  double weight = 0.0;
  double distance = 0.0;
};

bool outranks(const Ranked& a, const Ranked& b) {
  if (b.query == nullptr) return true;
  if (a.weight != b.weight) return a.weight > b.weight;
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.query->text < b.query->text;
}

// Characters of the longer side left unmatched when the two sorted forms are
// intersected as multisets. Substitutions, insertions and deletions each fix
// at most one of them; transpositions fix none.
std::size_t unmatched(const std::u32string& x, const std::u32string& y) {
  std::size_t common = 0;
  for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
    if (x[i] == y[j]) {
      ++common, ++i, ++j;
    } else if (x[i] < y[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return std::max(x.size(), y.size()) - common;
}

// One bit per code point class. Characters of one string whose bit is absent
// from the other string's mask are unmatched.
std::uint64_t char_mask(const std::u32string& s) {
  std::uint64_t mask = 0;
  for (char32_t c : s) mask |= std::uint64_t{1} << (c % 64);
  return mask;
}

std::size_t mask_unmatched(std::uint64_t x, std::uint64_t y) {
  return static_cast<std::size_t>(std::max(std::popcount(x & ~y), std::popcount(y & ~x)));
}

std::u32string sorted(std::u32string s) {
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0 && b0 < 0xF8) {
      len = 4;
      cp = b0 & 0x07;
    } else if (b0 >= 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    }
    bool valid = len == 1 || i + len <= text.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto bk = static_cast<unsigned char>(text[i + k]);
      valid = (bk & 0xC0) == 0x80;
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!valid) {
      out.push_back(b0);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

std::u32string spelling_form(const Query& q) {
  std::string_view text = q.text;
  if (q.sigil != Sigil::None) text.remove_prefix(1);
  return decode_utf8(text);
}

double weighted_edit_distance(std::u32string_view a, std::u32string_view b,
                              const EditCosts& costs, double limit) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  auto substitution = [&](std::size_t i, std::size_t j) {
    const bool boundary = i == 0 || i + 1 == n || j == 0 || j + 1 == m;
    return boundary ? costs.boundary_sub : costs.internal_sub;
  };
  // Rows i-2, i-1 and i of the DP table.
  thread_local std::vector<double> before, prev, cur;
  before.assign(m + 1, 0.0);
  prev.assign(m + 1, 0.0);
  cur.assign(m + 1, 0.0);
  double prev_min = 0.0;
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<double>(j) * costs.insert;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<double>(i) * costs.erase;
    double cur_min = cur[0];
    for (std::size_t j = 1; j <= m; ++j) {
      double best = std::min(prev[j] + costs.erase, cur[j - 1] + costs.insert);
      const double diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0.0 : substitution(i - 1, j - 1));
      best = std::min(best, diag);
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        best = std::min(best, before[j - 2] + costs.transpose);
      }
      cur[j] = best;
      cur_min = std::min(cur_min, best);
    }
    // Every alignment crosses row i-1 or row i, and costs never decrease
    // along one.
    if (cur_min > limit && prev_min > limit) return std::numeric_limits<double>::infinity();
    prev_min = cur_min;
    std::swap(before, prev);
    std::swap(prev, cur);
  }
  return prev[m];
}

double weighted_edit_distance(std::u32string_view a, std::u32string_view b,
                              const EditCosts& costs) {
  return weighted_edit_distance(a, b, costs, std::numeric_limits<double>::infinity());
}

double weighted_edit_distance(const Query& a, const Query& b, const EditCosts& costs) {
  if (a.sigil != b.sigil) {
    throw SigilMismatch("cannot compare '" + a.text + "' with '" + b.text + "'");
  }
  return weighted_edit_distance(spelling_form(a), spelling_form(b), costs);
}

SpellingIndex::SpellingIndex(std::vector<std::pair<Query, double>> queries,
                             const EngineConfig& cfg)
    : costs_(cfg.edit_costs),
      distance_max_(cfg.spell_distance_max),
      ratio_min_(cfg.spell_ratio_min),
      min_edit_cost_(std::min({cfg.edit_costs.internal_sub, cfg.edit_costs.boundary_sub,
                               cfg.edit_costs.insert, cfg.edit_costs.erase})),
      length_radius_(static_cast<std::size_t>(
          std::floor(cfg.spell_distance_max / std::min(cfg.edit_costs.insert, cfg.edit_costs.erase) +
                     1e-9))) {
  for (auto& [q, w] : queries) {
    std::u32string form = spelling_form(q);
    const auto key = std::make_pair(q.sigil, form.size());
    std::u32string bag = sorted(form);
    buckets_[key].items.push_back(Item{std::move(q), w, std::move(form), std::move(bag)});
    ++size_;
  }
  for (auto& [key, bucket] : buckets_) {
    std::sort(bucket.items.begin(), bucket.items.end(), [](const Item& x, const Item& y) {
      if (x.weight != y.weight) return x.weight > y.weight;
      return x.query.text < y.query.text;
    });
    for (const Item& item : bucket.items) {
      bucket.weights.push_back(item.weight);
      bucket.masks.push_back(char_mask(item.form));
    }
  }
}

std::optional<SpellCorrection> SpellingIndex::best_for(const Query& a, double weight_a) const {
  const std::u32string form = spelling_form(a);
  const std::u32string bag = sorted(form);
  const std::uint64_t mask = char_mask(form);
  const double denom = std::max(weight_a, kSpellWeightEpsilon);
  const std::size_t lo = form.size() > length_radius_ ? form.size() - length_radius_ : 0;
  const std::size_t hi = form.size() + length_radius_;
  Ranked best;
  double best_ratio = 0.0;
  for (auto it = buckets_.lower_bound({a.sigil, lo});
       it != buckets_.end() && it->first.first == a.sigil && it->first.second <= hi; ++it) {
    const Bucket& bucket = it->second;
    for (std::size_t i = 0; i < bucket.items.size(); ++i) {
      const double weight = bucket.weights[i];
      const double ratio = weight / denom;
      if (ratio < ratio_min_) break;
      // Heavier candidates come first within a bucket; a lighter one can only
      // win on a tie, so stop once below the current best.
      if (best.query != nullptr && weight < best.weight) break;
      // On a weight tie with the best so far, only a closer or equally close
      // candidate matters.
      const bool tie = best.query != nullptr && weight == best.weight;
      const double limit = tie ? std::min(distance_max_, best.distance) : distance_max_;
      if (static_cast<double>(mask_unmatched(mask, bucket.masks[i])) * min_edit_cost_ > limit + 1e-9) continue;
      const Item& item = bucket.items[i];
      if (item.query == a) continue;
      if (static_cast<double>(unmatched(bag, item.bag)) * min_edit_cost_ > limit + 1e-9) continue;
      const double d = weighted_edit_distance(form, item.form, costs_, limit);
      if (d > distance_max_) continue;
      const Ranked candidate{&item.query, item.weight, d};
      if (outranks(candidate, best)) {
        best = candidate;
        best_ratio = ratio;
      }
    }
  }
  if (best.query == nullptr) return std::nullopt;
  return SpellCorrection{*best.query, best.distance, best_ratio};
}

std::vector<std::pair<Query, double>> weighted_queries(const Stores& stores, Millis now,
                                                       const EngineConfig& cfg) {
  std::vector<std::pair<Query, double>> out;
  out.reserve(stores.queries.size());
  stores.queries.for_each([&](const std::string& q, const QueryStatsEntry& e) {
    out.emplace_back(Query{q, e.sigil}, e.weight.read(now, cfg));
  });
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

std::optional<SpellCorrection> spelling_candidate(const Query& a, Millis now, const Stores& stores,
                                                  const EngineConfig& cfg) {
  const SpellingIndex index(weighted_queries(stores, now, cfg), cfg);
  return index.best_for(a, stores.queries.weight(a.text, now, cfg));
}

std::map<Query, SpellCorrection> background_pairwise_job(
    const std::vector<std::pair<Query, double>>& queries, const EngineConfig& cfg) {
  const SpellingIndex index(queries, cfg);
  std::map<Query, SpellCorrection> table;
  for (const auto& [q, w] : queries) {
    if (auto correction = index.best_for(q, w)) table.emplace(q, std::move(*correction));
  }
  return table;
}

}  // namespace rtsa
