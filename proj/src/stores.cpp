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

#include "rtsa/stores.hpp"

#include <algorithm>
#include <cmath>

namespace rtsa {
namespace {

std::string pair_key(const std::string& prev, const std::string& next) {
  std::string key;
  key.reserve(prev.size() + next.size() + 1);
  key.append(prev).push_back('\n');
  key.append(next);
  return key;
}

}  // namespace

bool SessionStore::admit(const QueryEvent& ev, const EngineConfig& cfg) {
  if (cfg.rate_limit_max <= 0) return true;
  SessionRecord& s = sessions_[ev.session_id];
  if (s.session_id.empty()) s.session_id = ev.session_id;
  s.last_activity_ts = std::max(s.last_activity_ts, ev.ts);
  while (!s.recent.empty() && s.recent.front().second <= ev.ts - cfg.rate_limit_window_ms) {
    s.recent.pop_front();
  }
  const auto same = std::count_if(s.recent.begin(), s.recent.end(),
                                  [&](const auto& r) { return r.first == ev.query.text; });
  if (same >= cfg.rate_limit_max) return false;
  s.recent.emplace_back(ev.query.text, ev.ts);
  return true;
}

bool SessionStore::has_seen(const std::string& session_id, const Query& q) const {
  const auto it = sessions_.find(session_id);
  return it != sessions_.end() && it->second.seen_queries.contains(q.text);
}

std::vector<PairObservation> SessionStore::observe(const QueryEvent& ev, const EngineConfig& cfg) {
  SessionRecord& s = sessions_[ev.session_id];
  if (s.session_id.empty()) s.session_id = ev.session_id;
  s.last_activity_ts = std::max(s.last_activity_ts, ev.ts);

  s.window.push_back({ev.query, ev.ts, ev.source});
  while (s.window.size() > static_cast<std::size_t>(cfg.session_window_size)) s.window.pop_front();
  const Millis oldest_allowed = s.window.back().ts - cfg.session_window_age_ms;
  while (s.window.front().ts < oldest_allowed) s.window.pop_front();
  s.seen_queries.insert(ev.query.text);

  std::vector<PairObservation> pairs;
  const double next_weight = cfg.source_weight(ev.source);
  // Newest first, so a query repeated in the window contributes the source
  // of its latest occurrence.
  for (auto it = std::next(s.window.rbegin()); it != s.window.rend(); ++it) {
    if (it->query == ev.query) continue;
    if (!s.seen_pairs.insert(pair_key(it->query.text, ev.query.text)).second) continue;
    pairs.push_back(
        {it->query, ev.query, std::sqrt(cfg.source_weight(it->source) * next_weight)});
  }
  return pairs;
}

std::size_t SessionStore::prune(Millis now, const EngineConfig& cfg) {
  return std::erase_if(sessions_, [&](const auto& kv) {
    return kv.second.last_activity_ts < now - cfg.session_idle_expiry_ms;
  });
}

const SessionRecord* SessionStore::find(const std::string& session_id) const {
  const auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : &it->second;
}

void QueryStatsStore::update(const Query& q, double increment, const std::string& lang, Millis now,
                             const EngineConfig& cfg, double context_increment) {
  auto [it, inserted] = entries_.try_emplace(q.text);
  QueryStatsEntry& e = it->second;
  if (inserted) e.sigil = q.sigil;
  e.weight.add(increment, now, cfg);
  if (context_increment > 0) e.contexts.add(context_increment, now, cfg);
  ++e.raw_count;
  ++e.lang_counts[lang];
  if (increment > 0) mass_.add(increment, now, cfg);
}

void QueryStatsStore::add_tweet_match(const Query& q, double increment, Millis now,
                                      const EngineConfig& cfg) {
  const auto it = entries_.find(q.text);
  if (it == entries_.end() || increment <= 0) return;
  it->second.weight.add(increment, now, cfg);
  it->second.contexts.add(increment, now, cfg);
  mass_.add(increment, now, cfg);
}

double QueryStatsStore::weight(const std::string& q, Millis now, const EngineConfig& cfg) const {
  const auto it = entries_.find(q);
  return it == entries_.end() ? 0.0 : it->second.weight.read(now, cfg);
}

double QueryStatsStore::contexts(const std::string& q, Millis now, const EngineConfig& cfg) const {
  const auto it = entries_.find(q);
  return it == entries_.end() ? 0.0 : it->second.contexts.read(now, cfg);
}

std::int64_t QueryStatsStore::raw_count(const std::string& q) const {
  const auto it = entries_.find(q);
  return it == entries_.end() ? 0 : it->second.raw_count;
}

const QueryStatsEntry* QueryStatsStore::find(const std::string& q) const {
  const auto it = entries_.find(q);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t QueryStatsStore::prune(Millis now, double threshold, const EngineConfig& cfg) {
  mass_.materialize(now, cfg);
  return std::erase_if(entries_, [&](auto& kv) {
    QueryStatsEntry& e = kv.second;
    e.weight.materialize(now, cfg);
    e.contexts.materialize(now, cfg);
    return e.weight.read(now, cfg) < threshold;
  });
}

void QueryStatsStore::for_each(
    const std::function<void(const std::string&, const QueryStatsEntry&)>& fn) const {
  for (const auto& [q, e] : entries_) fn(q, e);
}

void CoocStore::update(const Query& prev, const Query& next, double increment, Millis now,
                       const EngineConfig& cfg, bool from_session) {
  if (prev == next) throw SelfPair(prev.text);
  auto& inner = followers_[prev.text];
  auto [it, inserted] = inner.try_emplace(next.text);
  if (inserted) {
    ++pair_count_;
    predecessors_[next.text].insert(prev.text);
  }
  it->second.weight.add(increment, now, cfg);
  it->second.from_session = it->second.from_session || from_session;
}

std::map<Query, double> CoocStore::followers(const Query& q, Millis now,
                                             const EngineConfig& cfg) const {
  std::map<Query, double> out;
  const auto it = followers_.find(q.text);
  if (it == followers_.end()) return out;
  for (const auto& [next, entry] : it->second) {
    out.emplace(Query{next, sigil_of(next)}, entry.weight.read(now, cfg));
  }
  return out;
}

std::map<Query, double> CoocStore::predecessors(const Query& q, Millis now,
                                                const EngineConfig& cfg) const {
  std::map<Query, double> out;
  const auto it = predecessors_.find(q.text);
  if (it == predecessors_.end()) return out;
  for (const std::string& prev : it->second) {
    const CoocEntry* entry = find(prev, q.text);
    if (entry != nullptr) out.emplace(Query{prev, sigil_of(prev)}, entry->weight.read(now, cfg));
  }
  return out;
}

double CoocStore::weight(const std::string& prev, const std::string& next, Millis now,
                         const EngineConfig& cfg) const {
  const CoocEntry* entry = find(prev, next);
  return entry == nullptr ? 0.0 : entry->weight.read(now, cfg);
}

const CoocEntry* CoocStore::find(const std::string& prev, const std::string& next) const {
  const auto it = followers_.find(prev);
  if (it == followers_.end()) return nullptr;
  const auto jt = it->second.find(next);
  return jt == it->second.end() ? nullptr : &jt->second;
}

void CoocStore::for_each_follower(
    const std::string& q,
    const std::function<void(const std::string&, const CoocEntry&)>& fn) const {
  const auto it = followers_.find(q);
  if (it == followers_.end()) return;
  for (const auto& [next, entry] : it->second) fn(next, entry);
}

void CoocStore::for_each_pair(
    const std::function<void(const std::string&, const std::string&, const CoocEntry&)>& fn)
    const {
  for (const auto& [prev, inner] : followers_) {
    for (const auto& [next, entry] : inner) fn(prev, next, entry);
  }
}

std::size_t CoocStore::prune(
    Millis now, const EngineConfig& cfg,
    const std::function<bool(const std::string&, const std::string&, double, const CoocEntry&)>&
        drop) {
  std::size_t removed = 0;
  for (auto outer = followers_.begin(); outer != followers_.end();) {
    const std::string& prev = outer->first;
    auto& inner = outer->second;
    for (auto it = inner.begin(); it != inner.end();) {
      it->second.weight.materialize(now, cfg);
      if (drop(prev, it->first, it->second.weight.read(now, cfg), it->second)) {
        const auto pred = predecessors_.find(it->first);
        if (pred != predecessors_.end()) {
          pred->second.erase(prev);
          if (pred->second.empty()) predecessors_.erase(pred);
        }
        it = inner.erase(it);
        ++removed;
      } else {
        ++it;
      }
    }
    outer = inner.empty() ? followers_.erase(outer) : std::next(outer);
  }
  pair_count_ -= removed;
  return removed;
}

bool CoocStore::adjacency_consistent() const {
  std::size_t pairs = 0;
  for (const auto& [prev, inner] : followers_) {
    if (inner.empty()) return false;
    for (const auto& [next, entry] : inner) {
      ++pairs;
      const auto pred = predecessors_.find(next);
      if (pred == predecessors_.end() || !pred->second.contains(prev)) return false;
    }
  }
  std::size_t back_refs = 0;
  for (const auto& [next, prevs] : predecessors_) {
    if (prevs.empty()) return false;
    for (const std::string& prev : prevs) {
      ++back_refs;
      if (find(prev, next) == nullptr) return false;
    }
  }
  return pairs == back_refs && pairs == pair_count_;
}

PruneReport prune_all(Stores& stores, Millis now, const EngineConfig& cfg) {
  PruneReport report;
  report.queries_removed = stores.queries.prune(now, cfg.prune_threshold, cfg);
  auto query_like = [&](const std::string& q) {
    const QueryStatsEntry* e = stores.queries.find(q);
    return e != nullptr && static_cast<double>(e->raw_count) >= cfg.querylike_min_count;
  };
  report.pairs_removed = stores.cooc.prune(
      now, cfg,
      [&](const std::string& prev, const std::string& next, double w, const CoocEntry& e) {
        if (w < cfg.prune_threshold) return true;
        return !e.from_session && !query_like(prev) && !query_like(next);
      });
  report.sessions_removed = stores.sessions.prune(now, cfg);
  return report;
}

}  // namespace rtsa
