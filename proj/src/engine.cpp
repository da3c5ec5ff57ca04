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

#include "rtsa/engine.hpp"

#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>

namespace rtsa {
namespace {

EngineConfig checked(EngineConfig cfg) {
  const auto errors = validate_config(cfg);
  if (!errors.empty()) throw Error(fmt::format("invalid config: {}", fmt::join(errors, "; ")));
  return cfg;
}

}  // namespace

Engine::Engine(EngineConfig cfg, ProfileName profile) : cfg_(checked(std::move(cfg))), profile_(profile) {}

void Engine::on_query(const QueryEvent& ev) {
  if (!stores_.sessions.admit(ev, cfg_)) {
    ++metrics_.rate_limited;
    return;
  }
  ++metrics_.queries;
  const double w = cfg_.source_weight(ev.source);
  const bool first_in_session = !stores_.sessions.has_seen(ev.session_id, ev.query);
  stores_.queries.update(ev.query, w, ev.lang, ev.ts, cfg_, first_in_session ? w : 0.0);
  for (const PairObservation& p : stores_.sessions.observe(ev, cfg_)) {
    stores_.cooc.update(p.prev, p.next, p.increment, ev.ts, cfg_, /*from_session=*/true);
  }
}

std::vector<Query> Engine::extract_query_like_ngrams(std::string_view text) const {
  const auto tokens = tokenize(text);
  std::vector<Query> out;
  std::unordered_set<std::string> seen;
  std::string gram;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    gram.clear();
    for (int n = 1; n <= cfg_.max_ngram && i + static_cast<std::size_t>(n) <= tokens.size(); ++n) {
      if (n > 1) gram.push_back(' ');
      gram.append(tokens[i + static_cast<std::size_t>(n) - 1]);
      std::string normalized = normalize_text(gram);
      const QueryStatsEntry* e = stores_.queries.find(normalized);
      if (e == nullptr || static_cast<double>(e->raw_count) < cfg_.querylike_min_count) continue;
      if (!seen.insert(normalized).second) continue;
      out.push_back(Query{std::move(normalized), e->sigil});
    }
  }
  return out;
}

void Engine::on_tweet(const TweetEvent& ev) {
  ++metrics_.tweets;
  const std::vector<Query> matches = extract_query_like_ngrams(ev.text);
  metrics_.tweet_matches += matches.size();
  for (const Query& q : matches) stores_.queries.add_tweet_match(q, cfg_.tweet_weight, ev.ts, cfg_);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    for (std::size_t j = i + 1; j < matches.size(); ++j) {
      stores_.cooc.update(matches[i], matches[j], cfg_.tweet_weight, ev.ts, cfg_, false);
      stores_.cooc.update(matches[j], matches[i], cfg_.tweet_weight, ev.ts, cfg_, false);
    }
  }
}

void Engine::on_event(const Event& ev) {
  if (const auto* q = std::get_if<QueryEvent>(&ev)) {
    on_query(*q);
  } else {
    on_tweet(std::get<TweetEvent>(ev));
  }
}

PruneReport Engine::run_decay_prune_cycle(Millis now) {
  ++metrics_.decay_cycles;
  return prune_all(stores_, now, cfg_);
}

std::vector<Suggestion> Engine::rank_query(const Query& a, Millis now) const {
  std::vector<Suggestion> out;
  if (stores_.queries.weight(a.text, now, cfg_) <= 0) return out;
  stores_.cooc.for_each_follower(a.text, [&](const std::string& next, const CoocEntry& entry) {
    if (next == a.text) return;
    if (entry.weight.read(now, cfg_) < cfg_.min_pair_support) return;
    const Query b{next, sigil_of(next)};
    const ContingencyTable table = build_table(a, b, now, stores_, cfg_);
    Suggestion s{b, 0.0, conditional_relative_frequency(table), 0.0, 0.0};
    try {
      s.pmi = pmi(table);
    } catch (const UndefinedMetric&) {
      s.pmi = 0.0;
    }
    s.llr = log_likelihood_ratio(table);
    const double pmi_norm = std::clamp(s.pmi, 0.0, cfg_.pmi_cap) / cfg_.pmi_cap;
    const double llr_norm = s.llr / (s.llr + cfg_.llr_scale);
    s.score = cfg_.z_crf * s.crf + cfg_.z_pmi * pmi_norm + cfg_.z_llr * llr_norm;
    out.push_back(std::move(s));
  });
  std::sort(out.begin(), out.end(), suggestion_before);
  if (out.size() > static_cast<std::size_t>(cfg_.top_k)) out.resize(static_cast<std::size_t>(cfg_.top_k));
  return out;
}

Snapshot Engine::run_ranking_cycle(Millis now) {
  ++metrics_.ranking_cycles;
  Snapshot snap;
  snap.generation_id = ++generation_;
  snap.event_ts = now;
  snap.profile = profile_;
  const double floor = cfg_.effective_rank_floor();
  auto queries = weighted_queries(stores_, now, cfg_);
  const SpellingIndex spelling(queries, cfg_);
  for (const auto& [q, w] : queries) {
    if (w < floor) continue;
    SnapshotEntry entry;
    entry.suggestions = rank_query(q, now);
    entry.spell = spelling.best_for(q, w);
    if (entry.suggestions.empty() && !entry.spell) continue;
    snap.entries.emplace(q, std::move(entry));
  }
  return snap;
}

EngineSink::EngineSink(Engine& engine, std::optional<std::filesystem::path> out_dir,
                       SnapshotCallback on_snapshot)
    : engine_(engine), out_dir_(std::move(out_dir)), on_snapshot_(std::move(on_snapshot)) {
  if (out_dir_) {
    if (auto m = read_manifest(*out_dir_, engine_.profile())) engine_.resume_generation(m->generation_id);
  }
}

void EngineSink::ranking_cycle(Millis now) {
  Snapshot snap = engine_.run_ranking_cycle(now);
  if (out_dir_) {
    write_snapshot(snap, *out_dir_, engine_.config().retain_snapshots);
    ++written_;
  }
  if (on_snapshot_) on_snapshot_(snap);
  last_ = std::move(snap);
}

}  // namespace rtsa
