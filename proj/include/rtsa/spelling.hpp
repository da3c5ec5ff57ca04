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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rtsa/stores.hpp"

namespace rtsa {

class SigilMismatch : public Error {
 public:
  using Error::Error;
};

struct SpellCorrection {
  Query query;
  double distance = 0.0;
  double ratio = 0.0;

  friend bool operator==(const SpellCorrection&, const SpellCorrection&) = default;
};

/// Decodes UTF-8 into code points; invalid bytes map to themselves.
std::u32string decode_utf8(std::string_view text);

/// Text the distance operates on: the query without its leading sigil.
std::u32string spelling_form(const Query& q);

/// Restricted Damerau-Levenshtein distance (adjacent transpositions, each
/// substring edited at most once) with positional substitution costs: a
/// substitution touching the first or last character of either string costs
/// `boundary_sub`, any other `internal_sub`. Sigils must agree and are
/// stripped first. Throws SigilMismatch otherwise.
double weighted_edit_distance(const Query& a, const Query& b, const EditCosts& costs);
double weighted_edit_distance(std::u32string_view a, std::u32string_view b,
                              const EditCosts& costs);
/// Same distance, but gives up with +infinity as soon as it is certain to
/// exceed `limit`. Exact whenever the result is within `limit`.
double weighted_edit_distance(std::u32string_view a, std::u32string_view b,
                              const EditCosts& costs, double limit);

/// Candidate lookup over a fixed query population, bucketed by sigil and
/// length. Buckets are sorted by weight so the popularity-ratio filter stops
/// the scan early.
class SpellingIndex {
 public:
  SpellingIndex(std::vector<std::pair<Query, double>> queries, const EngineConfig& cfg);

  /// Best correction for `a` (whose weight is `weight_a`): among queries within
  /// spell_distance_max whose weight ratio to `a` reaches spell_ratio_min, the
  /// heaviest, then the closest, then the lexicographically smallest.
  std::optional<SpellCorrection> best_for(const Query& a, double weight_a) const;

  std::size_t size() const { return size_; }

 private:
  struct Item {
    Query query;
    double weight;
    std::u32string form;
    std::u32string bag;  // form, sorted
  };

  // Parallel arrays; weights and masks are what the scan touches first.
  struct Bucket {
    std::vector<Item> items;
    std::vector<double> weights;
    std::vector<std::uint64_t> masks;
  };

  std::map<std::pair<Sigil, std::size_t>, Bucket> buckets_;
  std::size_t size_ = 0;
  EditCosts costs_;
  double distance_max_;
  double ratio_min_;
  double min_edit_cost_;
  std::size_t length_radius_;
};

inline constexpr double kSpellWeightEpsilon = 1e-6;

/// Correction for `a` among all queries in the statistics store.
std::optional<SpellCorrection> spelling_candidate(const Query& a, Millis now, const Stores& stores,
                                                  const EngineConfig& cfg);

/// Pairwise pass over a long-horizon query population.
std::map<Query, SpellCorrection> background_pairwise_job(
    const std::vector<std::pair<Query, double>>& queries, const EngineConfig& cfg);

/// Every query in the statistics store with its decayed weight at `now`.
std::vector<std::pair<Query, double>> weighted_queries(const Stores& stores, Millis now,
                                                       const EngineConfig& cfg);

}  // namespace rtsa
