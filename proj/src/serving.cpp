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

#include "rtsa/serving.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace rtsa {
namespace {

using nlohmann::ordered_json;

ordered_json spell_json(const std::optional<SpellCorrection>& spell) {
  if (!spell) return nullptr;
  ordered_json j;
  j["q"] = spell->query.text;
  j["dist"] = spell->distance;
  j["ratio"] = spell->ratio;
  return j;
}

ordered_json generation_json(std::optional<std::int64_t> g) {
  return g ? ordered_json(*g) : ordered_json(nullptr);
}

const SnapshotEntry* lookup(const std::shared_ptr<const Snapshot>& snap, const Query& q) {
  if (!snap) return nullptr;
  const auto it = snap->entries.find(q);
  return it == snap->entries.end() ? nullptr : &it->second;
}

}  // namespace

std::optional<std::int64_t> ServingState::generation(ProfileName p) const {
  const auto& snap = p == ProfileName::Realtime ? realtime : background;
  if (!snap) return std::nullopt;
  return snap->generation_id;
}

SnapshotCache::SnapshotCache(std::filesystem::path dir)
    : dir_(std::move(dir)), state_(std::make_shared<const ServingState>()) {}

std::shared_ptr<const ServingState> SnapshotCache::state() const {
  std::lock_guard lock(state_mu_);
  return state_;
}

RefreshResult SnapshotCache::refresh() {
  std::lock_guard refresh_lock(refresh_mu_);
  const auto current = state();
  auto next = std::make_shared<ServingState>(*current);
  next->last_poll = std::chrono::steady_clock::now();
  RefreshResult result;
  for (const ProfileName profile : {ProfileName::Realtime, ProfileName::Background}) {
    auto& slot = profile == ProfileName::Realtime ? next->realtime : next->background;
    try {
      const auto manifest = read_manifest(dir_, profile);
      if (!manifest) continue;
      if (slot && manifest->generation_id <= slot->generation_id) continue;
      slot = std::make_shared<const Snapshot>(load_snapshot(dir_, *manifest, profile));
      result.changed = true;
    } catch (const std::exception& e) {
      result.errors.push_back(fmt::format("{}: {}", to_string(profile), e.what()));
    }
  }
  std::lock_guard lock(state_mu_);
  state_ = std::move(next);
  return result;
}

ServedEntry interpolate(const SnapshotEntry* realtime, const SnapshotEntry* background, double mu,
                        int top_k) {
  std::map<std::string, double> merged;
  if (realtime != nullptr && mu > 0) {
    for (const Suggestion& s : realtime->suggestions) merged[s.query.text] += mu * s.score;
  }
  if (background != nullptr && mu < 1) {
    for (const Suggestion& s : background->suggestions) merged[s.query.text] += (1 - mu) * s.score;
  }
  ServedEntry out;
  out.suggestions.reserve(merged.size());
  for (const auto& [text, score] : merged) out.suggestions.push_back({Query{text, sigil_of(text)}, score});
  std::sort(out.suggestions.begin(), out.suggestions.end(),
            [](const ServedSuggestion& a, const ServedSuggestion& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.query.text < b.query.text;
            });
  if (out.suggestions.size() > static_cast<std::size_t>(std::max(top_k, 0))) {
    out.suggestions.resize(static_cast<std::size_t>(std::max(top_k, 0)));
  }
  if (realtime != nullptr && realtime->spell) {
    out.spell = realtime->spell;
  } else if (background != nullptr) {
    out.spell = background->spell;
  }
  return out;
}

ServeResponse serve_suggestions(std::string_view raw, const ServingState& state, double mu,
                                int top_k) {
  Query q;
  try {
    q = normalize_query(raw);
  } catch (const EmptyQuery&) {
    throw BadRequest("missing or blank query");
  }
  ServeResponse response;
  response.entry = interpolate(lookup(state.realtime, q), lookup(state.background, q), mu, top_k);
  response.query = std::move(q.text);
  response.realtime_generation = state.generation(ProfileName::Realtime);
  response.background_generation = state.generation(ProfileName::Background);
  return response;
}

std::string to_json(const ServeResponse& response) {
  ordered_json j;
  j["query"] = response.query;
  ordered_json suggestions = ordered_json::array();
  for (const ServedSuggestion& s : response.entry.suggestions) {
    ordered_json item;
    item["q"] = s.query.text;
    item["score"] = s.score;
    suggestions.push_back(std::move(item));
  }
  j["suggestions"] = std::move(suggestions);
  j["spell"] = spell_json(response.entry.spell);
  j["generation_ids"] = {{"Realtime", generation_json(response.realtime_generation)},
                         {"Background", generation_json(response.background_generation)}};
  return j.dump();
}

Poller::Poller(SnapshotCache& cache, std::chrono::milliseconds period)
    : cache_(cache), period_(period), thread_([this] { run(); }) {}

Poller::~Poller() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

void Poller::run() {
  std::unique_lock lock(mu_);
  while (!stop_) {
    lock.unlock();
    const auto result = cache_.refresh();
    for (const auto& err : result.errors) fmt::print(stderr, "refresh: {}\n", err);
    lock.lock();
    cv_.wait_for(lock, period_, [this] { return stop_; });
  }
}

SuggestServer::SuggestServer(SnapshotCache& cache, ServeOptions options)
    : cache_(cache), options_(options), server_(std::make_unique<httplib::Server>()) {
  server_->Get("/suggest", [this](const httplib::Request& req, httplib::Response& res) {
    const auto state = cache_.state();
    try {
      if (!req.has_param("q")) throw BadRequest("missing parameter 'q'");
      const auto response =
          serve_suggestions(req.get_param_value("q"), *state, options_.mu, options_.top_k);
      res.set_content(to_json(response), "application/json");
    } catch (const BadRequest& e) {
      res.status = 400;
      res.set_content(ordered_json{{"error", e.what()}}.dump(), "application/json");
    }
  });
  server_->Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    const auto state = cache_.state();
    ordered_json j;
    j["generation_ids"] = {
        {"Realtime", generation_json(state->generation(ProfileName::Realtime))},
        {"Background", generation_json(state->generation(ProfileName::Background))}};
    if (state->last_poll == std::chrono::steady_clock::time_point{}) {
      j["last_poll_age_ms"] = nullptr;
    } else {
      j["last_poll_age_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - state->last_poll)
                                  .count();
    }
    res.set_content(j.dump(), "application/json");
  });
}

SuggestServer::~SuggestServer() = default;

int SuggestServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

void SuggestServer::listen() { server_->listen_after_bind(); }

void SuggestServer::stop() { server_->stop(); }

}  // namespace rtsa
