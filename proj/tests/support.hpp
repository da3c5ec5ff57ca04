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

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "rtsa/config.hpp"
#include "rtsa/events.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "rtsa") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline rtsa::QueryEvent qev(const std::string& sid, const std::string& q, rtsa::Millis ts,
                            rtsa::QuerySource src = rtsa::QuerySource::Typed) {
  return rtsa::QueryEvent{sid, rtsa::normalize_query(q), src, "en", ts};
}

inline rtsa::TweetEvent tev(const std::string& tid, const std::string& text, rtsa::Millis ts) {
  return rtsa::TweetEvent{tid, text, "en", ts};
}

// Decay off, unit source weights, no thresholds, no rate cap.
inline rtsa::EngineConfig counting_config() {
  rtsa::EngineConfig cfg;
  cfg.decay_fn = rtsa::DecayFn::None;
  cfg.source_weights = {1.0, 1.0, 1.0, 1.0};
  cfg.prune_threshold = 0.0;
  cfg.rank_floor = 0.0;
  cfg.rate_limit_max = 0;
  cfg.querylike_min_count = 1;
  return cfg;
}

constexpr rtsa::Millis kMinute = 60 * 1000;
constexpr rtsa::Millis kHour = 60 * kMinute;

}  // namespace testing
