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

// Command-line front end: replay, serve, background, churn, freq, synth.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rtsa/analytics.hpp"
#include "rtsa/background.hpp"
#include "rtsa/config.hpp"
#include "rtsa/engine.hpp"
#include "rtsa/serving.hpp"
#include "rtsa/streams.hpp"
#include "rtsa/synth.hpp"

namespace {

using namespace rtsa;

constexpr int kUsageError = 2;

SuggestServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

EngineConfig config_from(const std::string& path) {
  return path.empty() ? EngineConfig{} : load_config(path);
}

std::vector<QueryEvent> read_queries(const std::string& path) {
  LoadResult<QueryEvent> r = load_query_events(path);
  if (r.skipped > 0) {
    fmt::print(stderr, "{}: skipped {} malformed line(s)\n", path, r.skipped);
    for (const std::string& e : r.errors) fmt::print(stderr, "  {}\n", e);
  }
  return std::move(r.events);
}

std::vector<TweetEvent> read_tweets(const std::string& path) {
  if (path.empty()) return {};
  LoadResult<TweetEvent> r = load_tweet_events(path);
  if (r.skipped > 0) {
    fmt::print(stderr, "{}: skipped {} malformed line(s)\n", path, r.skipped);
    for (const std::string& e : r.errors) fmt::print(stderr, "  {}\n", e);
  }
  return std::move(r.events);
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot create '{}'", path));
  out << text;
  if (!out.flush()) throw Error(fmt::format("error writing '{}'", path));
}

struct ReplayArgs {
  std::string queries, tweets, config, out;
  double speedup = 0;
  bool fast = false;
};

int run_replay(const ReplayArgs& a) {
  const EngineConfig cfg = config_from(a.config);
  const auto events = merge_streams(read_queries(a.queries), read_tweets(a.tweets), cfg.order_tolerance_ms);
  Engine engine(cfg, ProfileName::Realtime);
  EngineSink sink(engine, std::filesystem::path(a.out), [](const Snapshot& s) {
    fmt::print(stderr, "generation {} at {}: {} entries\n", s.generation_id, s.event_ts, s.entries.size());
  });
  ReplayClock clock(a.fast || a.speedup <= 0 ? ReplayClock::kUnbounded : a.speedup);
  const ReplayReport r = replay(events, clock, sink, replay_options(cfg, /*final_cycle=*/true));
  const double rate = r.wall_seconds > 0 ? static_cast<double>(r.delivered) / r.wall_seconds : 0.0;
  fmt::print("delivered {} events ({} queries, {} tweets) in {:.3f}s ({:.0f} events/s); {} snapshots; {} sink errors\n",
             r.delivered, r.queries, r.tweets, r.wall_seconds, rate, sink.snapshots_written(), r.sink_errors);
  return 0;
}

struct ServeArgs {
  std::string dir, host = "127.0.0.1";
  int port = 8080;
  double mu = -1;
  int top_k = 0;
  int poll_ms = 60000;
  std::string config;
};

int run_serve(const ServeArgs& a) {
  const EngineConfig cfg = config_from(a.config);
  ServeOptions opts{a.mu >= 0 ? a.mu : cfg.interpolation_mu, a.top_k > 0 ? a.top_k : cfg.top_k};
  if (opts.mu > 1) throw Error("--mu must be in [0, 1]");
  SnapshotCache cache(a.dir);
  for (const std::string& e : cache.refresh().errors) fmt::print(stderr, "{}\n", e);
  Poller poller(cache, std::chrono::milliseconds(a.poll_ms));
  SuggestServer server(cache, opts);
  const int port = server.bind(a.host, a.port);
  if (port < 0) throw Error(fmt::format("cannot bind {}:{}", a.host, a.port));
  fmt::print("serving {} on http://{}:{}\n", a.dir, a.host, port);
  std::fflush(stdout);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

struct BackgroundArgs {
  std::string queries, tweets, config, out, profile = "background";
  double horizon_days = 90;
};

int run_background_cmd(const BackgroundArgs& a) {
  const EngineConfig base = config_from(a.config);
  const Profile profile =
      parse_profile_name(a.profile) == ProfileName::Background ? background_profile() : realtime_profile();
  const auto events = merge_streams(read_queries(a.queries), read_tweets(a.tweets), base.order_tolerance_ms);
  const auto horizon = static_cast<Millis>(a.horizon_days * 24 * 60 * 60 * 1000);
  const BackgroundResult r = run_background(within_horizon(events, horizon), base, profile, a.out);
  fmt::print("generation {} ({} entries, {} spelling corrections) -> {}\n", r.snapshot.generation_id,
             r.snapshot.entries.size(), r.spell_corrections, r.manifest.string());
  return 0;
}

struct ChurnArgs {
  std::string queries, out = "-", granularity = "term";
  std::size_t k = 100;
  double interval_min = 60;
  bool dedupe = false;
};

Millis minutes(double m) {
  const auto ms = static_cast<Millis>(m * 60'000.0);
  if (ms <= 0) throw Error("--interval must be positive");
  return ms;
}

int run_churn(const ChurnArgs& a) {
  TopKOptions opts;
  if (a.granularity == "term") {
    opts.granularity = Granularity::Term;
  } else if (a.granularity == "query") {
    opts.granularity = Granularity::Query;
  } else {
    throw Error(fmt::format("unknown granularity '{}'", a.granularity));
  }
  opts.dedupe_session = a.dedupe;
  const auto queries = read_queries(a.queries);
  const auto topk = topk_per_interval(queries, a.k, minutes(a.interval_min), opts);
  write_text(a.out, churn_csv(churn_series(topk)));
  return 0;
}

struct FreqArgs {
  std::string queries, track, out = "-";
  double interval_min = 1;
};

int run_freq(const FreqArgs& a) {
  std::vector<std::string> tracked;
  std::stringstream ss(a.track);
  for (std::string item; std::getline(ss, item, ',');) {
    const std::string q = normalize_text(item);
    if (!q.empty()) tracked.push_back(q);
  }
  if (tracked.empty()) throw Error("--track needs at least one query");
  const auto queries = read_queries(a.queries);
  write_text(a.out, freq_csv(frequency_timeseries(queries, tracked, minutes(a.interval_min))));
  return 0;
}

struct SynthArgs {
  std::string scenario, prefix;
};

int run_synth(const SynthArgs& a) {
  const SynthOutput out = gen_synth(load_scenario(a.scenario));
  const auto [qpath, tpath] = write_synth(out, a.prefix);
  fmt::print("{} queries -> {}\n{} tweets -> {}\n", out.queries.size(), qpath.string(), out.tweets.size(),
             tpath.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time related-query suggestion engine"};
  app.require_subcommand(1);

  ReplayArgs replay_args;
  auto* replay_cmd = app.add_subcommand("replay", "Replay hoses through the engine and publish snapshots");
  replay_cmd->add_option("--queries", replay_args.queries, "Query hose (JSONL, optionally .gz)")->required();
  replay_cmd->add_option("--tweets", replay_args.tweets, "Firehose (JSONL, optionally .gz)");
  replay_cmd->add_option("--config", replay_args.config, "Config file");
  replay_cmd->add_option("--out", replay_args.out, "Snapshot directory")->required();
  auto* speed = replay_cmd->add_option("--speedup", replay_args.speedup, "Event time / wall time ratio");
  replay_cmd->add_flag("--fast", replay_args.fast, "Replay as fast as possible")->excludes(speed);

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Serve suggestions from a snapshot directory");
  serve_cmd->add_option("--dir", serve_args.dir, "Snapshot directory")->required();
  serve_cmd->add_option("--host", serve_args.host, "Bind address");
  serve_cmd->add_option("--port", serve_args.port, "Port (0 picks one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--mu", serve_args.mu, "Realtime weight in [0, 1]");
  serve_cmd->add_option("--top-k", serve_args.top_k, "Suggestions per response");
  serve_cmd->add_option("--poll-ms", serve_args.poll_ms, "Manifest poll period")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--config", serve_args.config, "Config file (mu and top_k defaults)");

  BackgroundArgs bg_args;
  auto* bg_cmd = app.add_subcommand("background", "Batch-build a long-horizon snapshot");
  bg_cmd->add_option("--queries", bg_args.queries, "Query hose")->required();
  bg_cmd->add_option("--tweets", bg_args.tweets, "Firehose");
  bg_cmd->add_option("--config", bg_args.config, "Base config file");
  bg_cmd->add_option("--profile", bg_args.profile, "background or realtime");
  bg_cmd->add_option("--out", bg_args.out, "Snapshot directory")->required();
  bg_cmd->add_option("--horizon-days", bg_args.horizon_days, "Keep this many days before the last event, 0 for all")
      ->check(CLI::NonNegativeNumber);

  ChurnArgs churn_args;
  auto* churn_cmd = app.add_subcommand("churn", "Top-k churn between consecutive intervals");
  churn_cmd->add_option("--queries", churn_args.queries, "Query hose")->required();
  churn_cmd->add_option("--k", churn_args.k, "Top-k size")->check(CLI::PositiveNumber);
  churn_cmd->add_option("--interval", churn_args.interval_min, "Interval length in minutes");
  churn_cmd->add_option("--granularity", churn_args.granularity, "term or query");
  churn_cmd->add_flag("--dedupe-session", churn_args.dedupe, "Count a term once per session per interval");
  churn_cmd->add_option("--out", churn_args.out, "CSV output ('-' for stdout)");

  FreqArgs freq_args;
  auto* freq_cmd = app.add_subcommand("freq", "Per-interval frequency of tracked queries");
  freq_cmd->add_option("--queries", freq_args.queries, "Query hose")->required();
  freq_cmd->add_option("--track", freq_args.track, "Comma-separated queries")->required();
  freq_cmd->add_option("--interval", freq_args.interval_min, "Interval length in minutes");
  freq_cmd->add_option("--out", freq_args.out, "CSV output ('-' for stdout)");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic hoses from a scenario");
  synth_cmd->add_option("--scenario", synth_args.scenario, "Scenario JSON")->required();
  synth_cmd->add_option("--out-prefix", synth_args.prefix, "Output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*replay_cmd) return run_replay(replay_args);
    if (*serve_cmd) return run_serve(serve_args);
    if (*bg_cmd) return run_background_cmd(bg_args);
    if (*churn_cmd) return run_churn(churn_args);
    if (*freq_cmd) return run_freq(freq_args);
    if (*synth_cmd) return run_synth(synth_args);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return kUsageError;
}
