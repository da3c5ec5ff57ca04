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

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rtsa/snapshot.hpp"

namespace httplib {
class Server;
}

namespace rtsa {

class BadRequest : public Error {
 public:
  using Error::Error;
};

/// Immutable view served to requests. Replaced wholesale on refresh.
struct ServingState {
  std::shared_ptr<const Snapshot> realtime;
  std::shared_ptr<const Snapshot> background;
  std::chrono::steady_clock::time_point last_poll{};

  std::optional<std::int64_t> generation(ProfileName p) const;
};

struct RefreshResult {
  bool changed = false;
  std::vector<std::string> errors;
};

/// Frontend cache over a snapshot directory. Requests read the current state
/// pointer; refresh builds a new state off to the side and swaps it in, so a
/// request never waits on file IO.
class SnapshotCache {
 public:
  explicit SnapshotCache(std::filesystem::path dir);

  /// Loads any snapshot whose generation is newer than the one held. Load
  /// failures are reported and the previous snapshot keeps serving.
  RefreshResult refresh();

  std::shared_ptr<const ServingState> state() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex refresh_mu_;
  mutable std::mutex state_mu_;
  std::shared_ptr<const ServingState> state_;
};

struct ServedSuggestion {
  Query query;
  double score = 0.0;
};

struct ServedEntry {
  std::vector<ServedSuggestion> suggestions;
  std::optional<SpellCorrection> spell;
};

/// Linear blend mu * realtime + (1 - mu) * background over the union of
/// candidates; a side weighted 0 contributes no candidates. Re-sorted and
/// truncated to `top_k`. The realtime spelling correction wins over the
/// background one.
ServedEntry interpolate(const SnapshotEntry* realtime, const SnapshotEntry* background, double mu,
                        int top_k);

struct ServeResponse {
  std::string query;
  ServedEntry entry;
  std::optional<std::int64_t> realtime_generation;
  std::optional<std::int64_t> background_generation;
};

/// Normalizes `raw` and answers from `state`. Unknown queries get empty
/// lists. Throws BadRequest on a blank query.
ServeResponse serve_suggestions(std::string_view raw, const ServingState& state, double mu,
                                int top_k);

std::string to_json(const ServeResponse& response);

/// Re-polls a cache on a fixed period from a background thread.
class Poller {
 public:
  Poller(SnapshotCache& cache, std::chrono::milliseconds period);
  ~Poller();
  Poller(const Poller&) = delete;
  Poller& operator=(const Poller&) = delete;

 private:
  void run();

  SnapshotCache& cache_;
  std::chrono::milliseconds period_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stop_ = false;
  std::thread thread_;
};

struct ServeOptions {
  double mu = 0.7;
  int top_k = 10;
};

/// HTTP endpoint:
///   GET /suggest?q=<urlencoded>  -> suggestion JSON (400 on a blank query)
///   GET /healthz                 -> generation ids and last poll age
class SuggestServer {
 public:
  SuggestServer(SnapshotCache& cache, ServeOptions options);
  ~SuggestServer();

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port or
  /// -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  void listen();
  void stop();

 private:
  SnapshotCache& cache_;
  ServeOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace rtsa
