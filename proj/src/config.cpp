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

#include "rtsa/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

namespace rtsa {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(fmt::format("config key '{}': cannot parse '{}'", key, value));
  }
  return out;
}

DecayFn parse_decay_fn(std::string_view value) {
  if (value == "exponential") return DecayFn::Exponential;
  if (value == "step") return DecayFn::Step;
  if (value == "linear") return DecayFn::Linear;
  if (value == "none") return DecayFn::None;
  throw Error(fmt::format("config key 'decay_fn': unknown decay function '{}'", value));
}

struct Field {
  std::string_view key;
  std::function<void(EngineConfig&, std::string_view)> set;
  std::function<std::string(const EngineConfig&)> get;
};

template <typename T>
Field numeric(std::string_view key, T EngineConfig::*member) {
  return {key,
          [key, member](EngineConfig& c, std::string_view v) { c.*member = parse_number<T>(key, v); },
          [member](const EngineConfig& c) { return fmt::format("{}", c.*member); }};
}

Field cost(std::string_view key, double EditCosts::*member) {
  return {key,
          [key, member](EngineConfig& c, std::string_view v) {
            c.edit_costs.*member = parse_number<double>(key, v);
          },
          [member](const EngineConfig& c) { return fmt::format("{}", c.edit_costs.*member); }};
}

Field source(std::string_view key, QuerySource s) {
  const auto idx = static_cast<std::size_t>(s);
  return {key,
          [key, idx](EngineConfig& c, std::string_view v) {
            c.source_weights[idx] = parse_number<double>(key, v);
          },
          [idx](const EngineConfig& c) { return fmt::format("{}", c.source_weights[idx]); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      numeric("max_ngram", &EngineConfig::max_ngram),
      numeric("session_window_size", &EngineConfig::session_window_size),
      numeric("session_window_age_ms", &EngineConfig::session_window_age_ms),
      numeric("session_idle_expiry_ms", &EngineConfig::session_idle_expiry_ms),
      numeric("rate_limit_max", &EngineConfig::rate_limit_max),
      numeric("rate_limit_window_ms", &EngineConfig::rate_limit_window_ms),
      source("source_weight.typed", QuerySource::Typed),
      source("source_weight.hashtag_click", QuerySource::HashtagClick),
      source("source_weight.trend_click", QuerySource::TrendClick),
      source("source_weight.related_click", QuerySource::RelatedClick),
      numeric("tweet_weight", &EngineConfig::tweet_weight),
      {"decay_fn", [](EngineConfig& c, std::string_view v) { c.decay_fn = parse_decay_fn(v); },
       [](const EngineConfig& c) { return std::string(to_string(c.decay_fn)); }},
      numeric("halflife_ms", &EngineConfig::halflife_ms),
      numeric("step_age_ms", &EngineConfig::step_age_ms),
      numeric("step_floor", &EngineConfig::step_floor),
      numeric("linear_span_ms", &EngineConfig::linear_span_ms),
      numeric("prune_threshold", &EngineConfig::prune_threshold),
      numeric("querylike_min_count", &EngineConfig::querylike_min_count),
      numeric("rank_weight.crf", &EngineConfig::z_crf),
      numeric("rank_weight.pmi", &EngineConfig::z_pmi),
      numeric("rank_weight.llr", &EngineConfig::z_llr),
      numeric("pmi_cap", &EngineConfig::pmi_cap),
      numeric("llr_scale", &EngineConfig::llr_scale),
      numeric("min_pair_support", &EngineConfig::min_pair_support),
      numeric("context_fanout", &EngineConfig::context_fanout),
      numeric("rank_floor", &EngineConfig::rank_floor),
      numeric("top_k", &EngineConfig::top_k),
      numeric("snapshot_interval_ms", &EngineConfig::snapshot_interval_ms),
      numeric("decay_cycle_interval_ms", &EngineConfig::decay_cycle_interval_ms),
      numeric("retain_snapshots", &EngineConfig::retain_snapshots),
      numeric("order_tolerance_ms", &EngineConfig::order_tolerance_ms),
      numeric("spell_ratio_min", &EngineConfig::spell_ratio_min),
      numeric("spell_distance_max", &EngineConfig::spell_distance_max),
      cost("edit.internal_sub", &EditCosts::internal_sub),
      cost("edit.boundary_sub", &EditCosts::boundary_sub),
      cost("edit.insert", &EditCosts::insert),
      cost("edit.delete", &EditCosts::erase),
      cost("edit.transpose", &EditCosts::transpose),
      numeric("interpolation_mu", &EngineConfig::interpolation_mu),
  };
  return kFields;
}

}  // namespace

std::string_view to_string(DecayFn fn) {
  switch (fn) {
    case DecayFn::Exponential: return "exponential";
    case DecayFn::Step: return "step";
    case DecayFn::Linear: return "linear";
    case DecayFn::None: return "none";
  }
  return "?";
}

std::vector<std::string> validate_config(const EngineConfig& cfg) {
  std::vector<std::string> errors;
  auto check = [&errors](bool ok, std::string message) {
    if (!ok) errors.push_back(std::move(message));
  };
  check(cfg.max_ngram >= 1, "max_ngram must be at least 1");
  check(cfg.session_window_size >= 1, "session_window_size must be at least 1");
  check(cfg.session_window_age_ms > 0, "session_window_age_ms must be positive");
  check(cfg.session_idle_expiry_ms > 0, "session_idle_expiry_ms must be positive");
  check(cfg.rate_limit_max >= 0, "rate_limit_max must be non-negative");
  check(cfg.rate_limit_window_ms > 0, "rate_limit_window_ms must be positive");
  for (std::size_t i = 0; i < kQuerySourceCount; ++i) {
    check(cfg.source_weights[i] >= 0,
          fmt::format("source weight for {} must be non-negative",
                      to_string(static_cast<QuerySource>(i))));
  }
  check(cfg.source_weight(QuerySource::Typed) >= cfg.source_weight(QuerySource::HashtagClick),
        "source weight for typed must be at least the weight for hashtag_click");
  check(cfg.tweet_weight >= 0, "tweet_weight must be non-negative");
  check(cfg.halflife_ms > 0, "halflife must be positive");
  check(cfg.step_age_ms > 0, "step_age_ms must be positive");
  check(cfg.step_floor >= 0 && cfg.step_floor <= 1, "step_floor must lie in [0, 1]");
  check(cfg.linear_span_ms > 0, "linear_span_ms must be positive");
  check(cfg.prune_threshold >= 0, "prune_threshold must be non-negative");
  check(cfg.querylike_min_count >= 0, "querylike_min_count must be non-negative");
  check(cfg.z_crf >= 0 && cfg.z_pmi >= 0 && cfg.z_llr >= 0, "rank weights must be non-negative");
  check(cfg.pmi_cap > 0, "pmi_cap must be positive");
  check(cfg.llr_scale > 0, "llr_scale must be positive");
  check(cfg.min_pair_support >= 0, "min_pair_support must be non-negative");
  check(cfg.context_fanout > 0, "context_fanout must be positive");
  check(cfg.top_k >= 1, "top_k must be at least 1");
  check(cfg.snapshot_interval_ms > 0, "snapshot_interval_ms must be positive");
  check(cfg.decay_cycle_interval_ms > 0, "decay_cycle_interval_ms must be positive");
  check(cfg.retain_snapshots >= 1, "retain_snapshots must be at least 1");
  check(cfg.order_tolerance_ms >= 0, "order_tolerance_ms must be non-negative");
  check(cfg.spell_ratio_min >= 0, "spell_ratio_min must be non-negative");
  check(cfg.spell_distance_max >= 0, "spell_distance_max must be non-negative");
  const EditCosts& c = cfg.edit_costs;
  check(c.internal_sub > 0 && c.boundary_sub > 0 && c.insert > 0 && c.erase > 0 &&
            c.transpose > 0,
        "edit costs must be positive");
  check(c.boundary_sub >= c.internal_sub, "edit.boundary_sub must be at least edit.internal_sub");
  check(cfg.interpolation_mu >= 0 && cfg.interpolation_mu <= 1,
        "interpolation_mu must lie in [0, 1]");
  return errors;
}

void set_config_value(EngineConfig& cfg, std::string_view key, std::string_view value) {
  for (const Field& f : fields()) {
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw Error(fmt::format("unknown config key '{}'", key));
}

EngineConfig parse_config(std::string_view text, EngineConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(fmt::format("config line {}: expected 'key = value'", line_no));
    }
    try {
      set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  return base;
}

EngineConfig load_config(const std::filesystem::path& path, EngineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

std::string dump_config(const EngineConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) out += fmt::format("{} = {}\n", f.key, f.get(cfg));
  return out;
}

}  // namespace rtsa
