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

#include "rtsa/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "rtsa/streams.hpp"

namespace rtsa {
namespace {

using nlohmann::json;

constexpr double kMsPerMinute = 60'000.0;

// Portable sampling on top of mt19937_64 (whose output sequence is fixed by
// the standard, unlike the std distributions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform() * static_cast<double>(hi - lo + 1));
  }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
  // floor(x) plus one with probability frac(x).
  std::int64_t round_stochastic(double x) {
    const double whole = std::floor(x);
    return static_cast<std::int64_t>(whole) + (chance(x - whole) ? 1 : 0);
  }

 private:
  std::mt19937_64 gen_;
};

class WeightedPicker {
 public:
  explicit WeightedPicker(const std::vector<VocabEntry>& vocab) {
    double sum = 0;
    for (const VocabEntry& v : vocab) {
      sum += v.weight;
      cumulative_.push_back(sum);
    }
  }
  bool empty() const { return cumulative_.empty() || cumulative_.back() <= 0; }
  std::size_t pick(Rng& rng) const {
    const double x = rng.uniform() * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

constexpr std::array<std::string_view, 24> kSyllables = {
    "ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ba", "de", "fi", "go",
    "hu", "ja", "ke", "li", "mo", "nu", "pe", "ri", "su", "ta", "wo", "ze"};

constexpr std::array<std::string_view, 20> kFiller = {
    "the",  "and",   "news", "today", "lol",  "just", "so",   "my",   "this", "video",
    "live", "great", "game", "right", "now",  "wow",  "love", "watch", "new", "people"};

std::string pseudo_word(Rng& rng) {
  std::string w;
  const auto n = rng.range(2, 4);
  for (std::int64_t i = 0; i < n; ++i) w += kSyllables[static_cast<std::size_t>(rng.range(0, kSyllables.size() - 1))];
  return w;
}

struct Builder {
  const SynthScenario& s;
  Rng rng;
  Millis end;
  std::vector<QueryEvent> queries;
  std::vector<TweetEvent> tweets;
  std::int64_t next_session = 0;

  std::string new_session() { return fmt::format("s{}", next_session++); }

  void emit(const std::string& sid, const std::string& q, QuerySource src, Millis ts) {
    if (ts < s.start_ts || ts >= end) return;
    queries.push_back(QueryEvent{sid, normalize_query(q), src, "en", ts});
  }

  std::int64_t session_length() {
    // Geometric with the configured mean, at least one query.
    const double p_more = 1.0 - 1.0 / s.mean_session_length;
    std::int64_t n = 1;
    while (rng.chance(p_more)) ++n;
    return n;
  }

  Millis gap() { return rng.range(s.session_gap_min_ms, s.session_gap_max_ms); }

  void background_sessions() {
    if (s.base_rate <= 0 || s.vocab.empty()) return;
    const WeightedPicker picker(s.vocab);
    if (picker.empty()) return;
    const double sessions_per_ms = s.base_rate / s.mean_session_length / kMsPerMinute;
    // Start early so the stream is already in steady state at start_ts.
    double t = static_cast<double>(s.start_ts - 10 * s.session_gap_max_ms);
    for (;;) {
      t += rng.exponential(sessions_per_ms);
      auto ts = static_cast<Millis>(t);
      if (ts >= end) break;
      const std::string sid = new_session();
      const std::int64_t n = session_length();
      for (std::int64_t i = 0; i < n && ts < end; ++i) {
        const VocabEntry& v = s.vocab[picker.pick(rng)];
        emit(sid, v.query, v.source, ts);
        ts += gap();
      }
    }
  }

  void rotation_stream() {
    const Rotation& r = s.rotation;
    std::int64_t fresh = 0;
    std::vector<std::string> top;
    for (std::size_t i = 0; i < r.k; ++i) top.push_back(fmt::format("topic{}", fresh++));
    for (Millis start = s.start_ts; start < end; start += r.interval_ms) {
      std::vector<std::string> occurrences;
      for (const std::string& term : top) {
        const auto c = rng.range(r.top_min, r.top_max);
        for (std::int64_t i = 0; i < c; ++i) occurrences.push_back(term);
      }
      for (std::size_t i = 0; i < r.tail_terms; ++i) {
        const auto c = rng.range(r.tail_min, r.tail_max);
        for (std::int64_t j = 0; j < c; ++j) occurrences.push_back(fmt::format("tail{}", i));
      }
      const Millis stop = std::min(end, start + r.interval_ms);
      std::vector<Millis> times;
      for (std::size_t i = 0; i < occurrences.size(); ++i) times.push_back(rng.range(start, stop - 1));
      std::sort(times.begin(), times.end());
      // Occurrences are shuffled onto the sorted times.
      for (std::size_t i = occurrences.size(); i > 1; --i) {
        std::swap(occurrences[i - 1], occurrences[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(i) - 1))]);
      }
      std::string sid = new_session();
      for (std::size_t i = 0; i < occurrences.size(); ++i) {
        if (rng.chance(1.0 / s.mean_session_length)) sid = new_session();
        emit(sid, occurrences[i], QuerySource::Typed, times[i]);
      }
      for (std::string& term : top) {
        if (rng.chance(r.replace_rate)) term = fmt::format("topic{}", fresh++);
      }
    }
  }

  static double share_at(const Burst& b, double t) {
    if (t < 0) return 0.0;
    const auto ramp = static_cast<double>(b.ramp_ms);
    const auto hold = static_cast<double>(b.hold_ms);
    if (t < ramp) return b.peak_fraction * t / ramp;
    if (t < ramp + hold) return b.peak_fraction;
    return b.peak_fraction * std::exp(-(t - ramp - hold) / static_cast<double>(b.decay_ms));
  }

  void burst(const Burst& b, std::size_t index) {
    const Millis t0 = s.start_ts + b.t0;
    const Millis burst_end = std::min(end, t0 + b.ramp_ms + b.hold_ms + 6 * b.decay_ms);
    if (burst_end <= t0) return;
    const auto seconds = static_cast<std::size_t>((burst_end - t0 + 999) / 1000);

    double per_session = b.noise_queries;
    for (const FollowUp& f : b.followups) per_session += f.p_follow;
    const auto delay_lo = static_cast<std::size_t>(b.follow_delay_min_ms / 1000);
    const auto delay_hi = static_cast<std::size_t>(b.follow_delay_max_ms / 1000);
    // Queries already generated in each second of the burst window.
    std::vector<double> existing(seconds, 0.0);
    for (const QueryEvent& q : queries) {
      if (q.ts >= t0 && q.ts < burst_end) existing[static_cast<std::size_t>((q.ts - t0) / 1000)] += 1.0;
    }

    // Expected burst queries per second, chosen so that the burst query's
    // share of the whole stream (the existing traffic plus the burst's own
    // follow-ups) tracks the target curve.
    std::vector<double> expected(seconds, 0.0);
    std::vector<double> prefix(seconds + 1, 0.0);
    for (std::size_t sec = 0; sec < seconds; ++sec) {
      double follow_rate = 0.0;
      if (sec > delay_lo) {
        const std::size_t hi = sec - delay_lo;
        const std::size_t lo = sec > delay_hi ? sec - delay_hi : 0;
        follow_rate = per_session * (prefix[hi + 1 > sec ? sec : hi + 1] - prefix[lo]) /
                      static_cast<double>(delay_hi - delay_lo + 1);
      }
      const double share = share_at(b, static_cast<double>(sec) * 1000.0 + 500.0);
      expected[sec] = share * (existing[sec] + follow_rate) / (1.0 - share);
      prefix[sec + 1] = prefix[sec] + expected[sec];
    }

    const WeightedPicker noise(s.vocab);
    std::int64_t sessions = 0;
    for (std::size_t sec = 0; sec < seconds; ++sec) {
      const std::int64_t n = rng.round_stochastic(expected[sec]);
      for (std::int64_t i = 0; i < n; ++i) {
        if (b.sessions_affected > 0 && sessions >= b.sessions_affected) return;
        ++sessions;
        const std::string sid = fmt::format("b{}-{}", index, sessions);
        const Millis ts = t0 + static_cast<Millis>(sec) * 1000 + rng.range(0, 999);
        emit(sid, b.query, b.source, ts);
        for (const FollowUp& f : b.followups) {
          if (!rng.chance(f.p_follow)) continue;
          emit(sid, f.query, f.source, ts + rng.range(b.follow_delay_min_ms, b.follow_delay_max_ms));
        }
        if (!noise.empty()) {
          const std::int64_t k = rng.round_stochastic(b.noise_queries);
          for (std::int64_t j = 0; j < k; ++j) {
            const VocabEntry& v = s.vocab[noise.pick(rng)];
            emit(sid, v.query, v.source, ts + rng.range(b.follow_delay_min_ms, b.follow_delay_max_ms));
          }
        }
      }
    }
  }

  void tweet_stream() {
    const TweetSpec& ts_spec = s.tweets;
    if (ts_spec.rate <= 0) return;
    const WeightedPicker picker(s.vocab);
    const double per_ms = ts_spec.rate / kMsPerMinute;
    double t = static_cast<double>(s.start_ts);
    std::int64_t id = 0;
    for (;;) {
      t += rng.exponential(per_ms);
      const auto ts = static_cast<Millis>(t);
      if (ts >= end) break;
      std::vector<std::string> words;
      const auto n = rng.range(ts_spec.min_tokens, ts_spec.max_tokens);
      for (std::int64_t i = 0; i < n; ++i) {
        words.emplace_back(kFiller[static_cast<std::size_t>(rng.range(0, kFiller.size() - 1))]);
      }
      if (!picker.empty() && rng.chance(ts_spec.match_fraction)) {
        const auto mentions = rng.range(1, 3);
        for (std::int64_t m = 0; m < mentions; ++m) {
          const auto pos = static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(words.size())));
          words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), s.vocab[picker.pick(rng)].query);
        }
      }
      std::string text;
      for (std::string& w : words) {
        if (rng.chance(0.1) && !w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
        if (!text.empty()) text.push_back(' ');
        text += w;
      }
      tweets.push_back(TweetEvent{fmt::format("t{}", id++), std::move(text), "en", ts});
    }
  }
};

QuerySource source_or(const json& j, const char* key, QuerySource fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : parse_query_source(it->get<std::string>());
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

std::vector<std::string> validate_scenario(const SynthScenario& s) {
  std::vector<std::string> errors;
  auto check = [&errors](bool ok, std::string message) {
    if (!ok) errors.push_back(std::move(message));
  };
  check(s.duration_ms > 0, "duration_ms must be positive");
  check(s.start_ts > 0, "start_ts must be positive");
  check(s.base_rate >= 0, "base_rate must be non-negative");
  check(s.mean_session_length >= 1, "mean_session_length must be at least 1");
  check(s.session_gap_min_ms >= 0 && s.session_gap_min_ms <= s.session_gap_max_ms,
        "session gaps must satisfy 0 <= min <= max");
  for (const VocabEntry& v : s.vocab) {
    check(v.weight >= 0, fmt::format("vocabulary weight of '{}' must be non-negative", v.query));
    check(!normalize_text(v.query).empty(), "vocabulary queries must not be blank");
  }
  for (const Burst& b : s.bursts) {
    check(!normalize_text(b.query).empty(), "burst query must not be blank");
    check(b.peak_fraction > 0 && b.peak_fraction <= 1,
          fmt::format("burst '{}': peak_fraction must lie in (0, 1]", b.query));
    check(b.t0 >= 0 && b.ramp_ms >= 0 && b.hold_ms >= 0 && b.decay_ms > 0,
          fmt::format("burst '{}': times must be non-negative and decay_ms positive", b.query));
    check(b.follow_delay_min_ms >= 0 && b.follow_delay_min_ms <= b.follow_delay_max_ms,
          fmt::format("burst '{}': follow-up delays must satisfy 0 <= min <= max", b.query));
    check(b.noise_queries >= 0, fmt::format("burst '{}': noise_queries must be non-negative", b.query));
    double per_session = b.noise_queries;
    for (const FollowUp& f : b.followups) {
      check(f.p_follow >= 0 && f.p_follow <= 1,
            fmt::format("burst '{}': follow-up probability must lie in [0, 1]", b.query));
      check(!normalize_text(f.query).empty(), "follow-up queries must not be blank");
      per_session += f.p_follow;
    }
    check(b.peak_fraction * (1 + per_session) < 1,
          fmt::format("burst '{}': peak_fraction too large for its follow-up volume", b.query));
  }
  check(s.tweets.rate >= 0, "tweet rate must be non-negative");
  check(s.tweets.match_fraction >= 0 && s.tweets.match_fraction <= 1,
        "tweet match_fraction must lie in [0, 1]");
  check(s.tweets.min_tokens >= 1 && s.tweets.min_tokens <= s.tweets.max_tokens,
        "tweet token counts must satisfy 1 <= min <= max");
  if (s.use_rotation) {
    const Rotation& r = s.rotation;
    check(r.k >= 1, "rotation k must be at least 1");
    check(r.replace_rate >= 0 && r.replace_rate <= 1, "rotation replace_rate must lie in [0, 1]");
    check(r.interval_ms > 0, "rotation interval_ms must be positive");
    check(r.top_min >= 1 && r.top_min <= r.top_max, "rotation top counts must satisfy 1 <= min <= max");
    check(r.tail_min >= 0 && r.tail_min <= r.tail_max, "rotation tail counts must satisfy 0 <= min <= max");
    check(r.tail_max < r.top_min, "rotation tail_max must be below top_min");
  }
  return errors;
}

SynthScenario parse_scenario(std::string_view json_text) {
  const json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw Error("scenario is not a JSON object");
  SynthScenario s;
  try {
    read_opt(j, "seed", s.seed);
    read_opt(j, "start_ts", s.start_ts);
    read_opt(j, "duration_ms", s.duration_ms);
    read_opt(j, "base_rate", s.base_rate);
    read_opt(j, "mean_session_length", s.mean_session_length);
    read_opt(j, "session_gap_min_ms", s.session_gap_min_ms);
    read_opt(j, "session_gap_max_ms", s.session_gap_max_ms);
    if (const auto it = j.find("vocab_zipf"); it != j.end()) {
      std::size_t n = 1000;
      double exponent = 1.0;
      read_opt(*it, "n", n);
      read_opt(*it, "exponent", exponent);
      s.vocab = zipf_vocab(n, exponent, s.seed);
    }
    if (const auto it = j.find("vocab"); it != j.end()) {
      for (const json& v : *it) {
        VocabEntry e;
        e.query = v.at("q").get<std::string>();
        read_opt(v, "weight", e.weight);
        e.source = source_or(v, "src", QuerySource::Typed);
        s.vocab.push_back(std::move(e));
      }
    }
    if (const auto it = j.find("bursts"); it != j.end()) {
      for (const json& bj : *it) {
        Burst b;
        b.query = bj.at("query").get<std::string>();
        b.source = source_or(bj, "src", QuerySource::Typed);
        read_opt(bj, "t0", b.t0);
        read_opt(bj, "ramp_ms", b.ramp_ms);
        read_opt(bj, "hold_ms", b.hold_ms);
        read_opt(bj, "decay_ms", b.decay_ms);
        read_opt(bj, "peak_fraction", b.peak_fraction);
        read_opt(bj, "follow_delay_min_ms", b.follow_delay_min_ms);
        read_opt(bj, "follow_delay_max_ms", b.follow_delay_max_ms);
        read_opt(bj, "noise_queries", b.noise_queries);
        read_opt(bj, "sessions_affected", b.sessions_affected);
        if (const auto f = bj.find("followups"); f != bj.end()) {
          for (const json& fj : *f) {
            b.followups.push_back(FollowUp{fj.at("q").get<std::string>(), fj.at("p").get<double>(),
                                           source_or(fj, "src", QuerySource::Typed)});
          }
        }
        s.bursts.push_back(std::move(b));
      }
    }
    if (const auto it = j.find("tweets"); it != j.end()) {
      read_opt(*it, "rate", s.tweets.rate);
      read_opt(*it, "match_fraction", s.tweets.match_fraction);
      read_opt(*it, "min_tokens", s.tweets.min_tokens);
      read_opt(*it, "max_tokens", s.tweets.max_tokens);
    }
    if (const auto it = j.find("rotation"); it != j.end()) {
      s.use_rotation = true;
      Rotation& r = s.rotation;
      read_opt(*it, "k", r.k);
      read_opt(*it, "replace_rate", r.replace_rate);
      read_opt(*it, "interval_ms", r.interval_ms);
      read_opt(*it, "top_min", r.top_min);
      read_opt(*it, "top_max", r.top_max);
      read_opt(*it, "tail_terms", r.tail_terms);
      read_opt(*it, "tail_min", r.tail_min);
      read_opt(*it, "tail_max", r.tail_max);
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("invalid scenario: {}", e.what()));
  }
  return s;
}

SynthScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open scenario '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::vector<VocabEntry> zipf_vocab(std::size_t n, double exponent, std::uint64_t seed) {
  Rng rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::set<std::string> used;
  std::vector<VocabEntry> out;
  out.reserve(n);
  while (out.size() < n) {
    std::string q = pseudo_word(rng);
    if (rng.chance(0.2)) q += " " + pseudo_word(rng);
    if (!used.insert(q).second) continue;
    const double weight = 1.0 / std::pow(static_cast<double>(out.size() + 1), exponent);
    out.push_back(VocabEntry{std::move(q), weight, QuerySource::Typed});
  }
  return out;
}

SynthOutput gen_synth(const SynthScenario& scenario) {
  if (const auto errors = validate_scenario(scenario); !errors.empty()) {
    throw Error(fmt::format("invalid scenario: {}", fmt::join(errors, "; ")));
  }
  Builder b{scenario, Rng(scenario.seed), scenario.start_ts + scenario.duration_ms, {}, {}, 0};
  if (scenario.use_rotation) {
    b.rotation_stream();
  } else {
    b.background_sessions();
  }
  for (std::size_t i = 0; i < scenario.bursts.size(); ++i) b.burst(scenario.bursts[i], i);
  b.tweet_stream();
  std::stable_sort(b.queries.begin(), b.queries.end(),
                   [](const QueryEvent& x, const QueryEvent& y) { return x.ts < y.ts; });
  std::stable_sort(b.tweets.begin(), b.tweets.end(),
                   [](const TweetEvent& x, const TweetEvent& y) { return x.ts < y.ts; });
  return SynthOutput{std::move(b.queries), std::move(b.tweets)};
}

std::pair<std::filesystem::path, std::filesystem::path> write_synth(const SynthOutput& output,
                                                                    const std::string& prefix) {
  const std::filesystem::path qpath = prefix + ".queries.jsonl";
  const std::filesystem::path tpath = prefix + ".tweets.jsonl";
  if (qpath.has_parent_path()) std::filesystem::create_directories(qpath.parent_path());
  std::vector<std::string> lines;
  lines.reserve(output.queries.size());
  for (const QueryEvent& ev : output.queries) lines.push_back(format_query_event(ev));
  write_lines(qpath, lines);
  lines.clear();
  for (const TweetEvent& ev : output.tweets) lines.push_back(format_tweet_event(ev));
  write_lines(tpath, lines);
  return {qpath, tpath};
}

}  // namespace rtsa
