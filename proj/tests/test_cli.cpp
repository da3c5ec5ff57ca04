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

#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <spawn.h>
#include <sys/wait.h>

#include "rtsa/analytics.hpp"
#include "rtsa/streams.hpp"
#include "rtsa/synth.hpp"
#include "support.hpp"

extern char** environ;

using namespace rtsa;
using testing::kHour;
using testing::kMinute;
using testing::qev;

namespace {

const std::string kCli = RTSA_CLI_PATH;
const std::filesystem::path kSource = RTSA_SOURCE_DIR;

int run(const std::string& args, const std::filesystem::path& log = "/dev/null") {
  const std::string cmd = kCli + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

void write_lines(const std::filesystem::path& p, const std::vector<QueryEvent>& events) {
  std::ofstream out(p);
  for (const QueryEvent& ev : events) out << format_query_event(ev) << '\n';
}

// `rtsa serve` in a child process, stopped with SIGTERM.
class ServeProcess {
 public:
  ServeProcess(const std::filesystem::path& dir, const std::filesystem::path& log) {
    const std::string d = dir.string();
    std::vector<std::string> args = {kCli, "serve", "--dir", d, "--port", "0", "--poll-ms", "50"};
    std::vector<char*> argv;
    for (std::string& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 1, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int rc = posix_spawn(&pid_, kCli.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) pid_ = -1;
    const std::regex port_re("http://[^:]+:(\\d+)");
    for (int i = 0; i < 200 && pid_ > 0 && port_ == 0; ++i) {
      std::smatch m;
      const std::string text = slurp(log);
      if (std::regex_search(text, m, port_re)) port_ = std::stoi(m[1]);
      std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
  }
  ~ServeProcess() { stop(); }

  int port() const { return port_; }

  int stop() {
    if (pid_ <= 0) return -1;
    ::kill(pid_, SIGTERM);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

 private:
  pid_t pid_ = -1;
  int port_ = 0;
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("replay --queries") == 2);
  CHECK(run("replay --queries a --out b --fast --speedup 3") == 2);
  CHECK(run("churn --queries x --k 0") == 2);
  CHECK(run("--help") == 0);
  CHECK(run("replay --help") == 0);
}

TEST_CASE("runtime errors exit with 1") {
  testing::TempDir dir;
  CHECK(run("churn --queries /nonexistent/q.jsonl --k 5 --interval 60") == 1);
  CHECK(run("synth --scenario /nonexistent.json --out-prefix " + (dir / "x").string()) == 1);
  std::ofstream(dir / "bad.conf") << "halflife_ms = -3\n";
  CHECK(run("replay --queries /dev/null --out " + (dir / "o").string() + " --config " + (dir / "bad.conf").string()) ==
        1);
}

TEST_CASE("constant vocabulary has zero churn") {
  testing::TempDir dir;
  std::vector<QueryEvent> events;
  for (int h = 0; h < 5; ++h) {
    for (int i = 0; i < 30; ++i) {
      events.push_back(qev("s" + std::to_string(i), "term" + std::to_string(i % 3), 1699999200000 + h * kHour + i * kMinute));
    }
  }
  write_lines(dir / "q.jsonl", events);
  REQUIRE(run("churn --queries " + (dir / "q.jsonl").string() + " --k 3 --interval 60 --out " +
              (dir / "churn.csv").string()) == 0);
  const auto rows = csv_rows(slurp(dir / "churn.csv"));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"interval_start", "churn"});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][1] == "0");
}

TEST_CASE("synth then freq reproduces the burst share") {
  testing::TempDir dir;
  std::ofstream(dir / "s.json") << R"({
    "seed": 9, "start_ts": 1317859200000, "duration_ms": 3600000, "base_rate": 300,
    "vocab_zipf": {"n": 500, "exponent": 1.0},
    "bursts": [{"query": "steve jobs", "t0": 900000, "ramp_ms": 300000, "hold_ms": 1200000,
                "decay_ms": 600000, "peak_fraction": 0.15,
                "followups": [{"q": "apple", "p": 0.5}]}]
  })";
  const std::string prefix = (dir / "sj").string();
  REQUIRE(run("synth --scenario " + (dir / "s.json").string() + " --out-prefix " + prefix) == 0);
  REQUIRE(std::filesystem::exists(prefix + ".queries.jsonl"));
  REQUIRE(std::filesystem::exists(prefix + ".tweets.jsonl"));
  REQUIRE(run("freq --queries " + prefix + ".queries.jsonl --track \"steve jobs,apple\" --interval 5 --out " +
              (dir / "f.csv").string()) == 0);
  const auto rows = csv_rows(slurp(dir / "f.csv"));
  REQUIRE(rows.size() > 2);
  CHECK(rows[0] == std::vector<std::string>{"interval_start", "query", "freq"});
  double peak = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][1] == "steve jobs") peak = std::max(peak, std::stod(rows[i][2]));
  }
  CHECK(std::fabs(peak - 0.15) <= 0.01);
  // Same numbers as the library call.
  const auto loaded = load_query_events(prefix + ".queries.jsonl");
  CHECK(slurp(dir / "f.csv") ==
        freq_csv(frequency_timeseries(loaded.events, {"steve jobs", "apple"}, 5 * kMinute)));
}

TEST_CASE("replay then serve") {
  testing::TempDir dir;
  const std::string prefix = (dir / "scotus").string();
  REQUIRE(run("synth --scenario " + (kSource / "scenarios" / "scotus.json").string() + " --out-prefix " + prefix) ==
          0);
  std::ofstream(dir / "rt.conf") << "snapshot_interval_ms = 300000\n";
  const auto snaps = dir / "snaps";
  REQUIRE(run("replay --fast --queries " + prefix + ".queries.jsonl --tweets " + prefix +
                  ".tweets.jsonl --config " + (dir / "rt.conf").string() + " --out " + snaps.string(),
              dir / "replay.log") == 0);
  CHECK(slurp(dir / "replay.log").find("delivered") != std::string::npos);
  CHECK(std::filesystem::exists(snaps / "MANIFEST.Realtime"));

  ServeProcess server(snaps, dir / "serve.log");
  REQUIRE(server.port() > 0);
  httplib::Client client("127.0.0.1", server.port());
  const auto res = client.Get("/suggest?q=%23scotus");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto body = nlohmann::json::parse(res->body);
  bool found = false;
  for (const auto& s : body.at("suggestions")) found = found || s.at("q") == "healthcare";
  CHECK(found);
  const auto bad = client.Get("/suggest?q=%20");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  const auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(server.stop() == 0);
}

}  // TEST_SUITE
