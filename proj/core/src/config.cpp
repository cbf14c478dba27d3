#include "ctmle/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ctmle/errors.hpp"

namespace ctmle {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (allowed.find(it.key()) == allowed.end())
      throw ConfigError(std::string(where) + ": unknown key '" + it.key() +
                        "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

ScheduleSpec parse_schedule(const json& j) {
  require_keys(j, {"kind", "delta", "m", "ratio", "times"}, "schedule");
  ScheduleSpec s;
  const std::string kind = get_or<std::string>(j, "kind", "equidistant");
  if (kind == "equidistant") {
    s.kind = ScheduleSpec::Kind::equidistant;
  } else if (kind == "geometric") {
    s.kind = ScheduleSpec::Kind::geometric;
  } else if (kind == "explicit") {
    s.kind = ScheduleSpec::Kind::explicit_times;
  } else {
    throw ConfigError("schedule.kind must be equidistant, geometric, or "
                      "explicit, got '" +
                      kind + "'");
  }
  s.delta = get_or<double>(j, "delta", s.delta);
  s.m = get_or<int>(j, "m", s.m);
  s.ratio = get_or<double>(j, "ratio", s.ratio);
  s.times = get_or<std::vector<double>>(j, "times", s.times);
  if (s.kind == ScheduleSpec::Kind::equidistant && s.delta <= 0.0)
    throw ConfigError("schedule.delta must be positive");
  if (s.kind == ScheduleSpec::Kind::geometric &&
      (s.m < 1 || s.ratio <= 0.0 || s.ratio == 1.0))
    throw ConfigError("geometric schedule needs m >= 1 and ratio > 0, != 1");
  if (s.kind == ScheduleSpec::Kind::explicit_times && s.times.empty())
    throw ConfigError("explicit schedule needs a nonempty times array");
  return s;
}

json schedule_to_json(const ScheduleSpec& s) {
  json j;
  switch (s.kind) {
    case ScheduleSpec::Kind::equidistant:
      j["kind"] = "equidistant";
      j["delta"] = s.delta;
      break;
    case ScheduleSpec::Kind::geometric:
      j["kind"] = "geometric";
      j["m"] = s.m;
      j["ratio"] = s.ratio;
      break;
    case ScheduleSpec::Kind::explicit_times:
      j["kind"] = "explicit";
      j["times"] = s.times;
      break;
  }
  return j;
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  require_keys(j,
               {"schema_version", "preset", "sigma", "episodes", "delta",
                "beta_doubled", "randomize", "value_rollouts", "schedule",
                "env_step_scale", "value_step_divisor", "seed"},
               "config");

  const int version = get_or<int>(j, "schema_version", kSchemaVersion);
  if (version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(version));

  RunConfig cfg;
  cfg.preset = get_or<std::string>(j, "preset", cfg.preset);
  bool known = false;
  for (const std::string& n : preset_names()) known = known || n == cfg.preset;
  if (!known) throw ConfigError("unknown preset '" + cfg.preset + "'");
  if (j.contains("sigma")) {
    cfg.sigma = get_or<double>(j, "sigma", 0.0);
    if (!(*cfg.sigma >= 0.0) || !std::isfinite(*cfg.sigma))
      throw ConfigError("sigma must be finite and >= 0");
  }

  LearnerConfig& lc = cfg.learner;
  lc.episodes = get_or<int>(j, "episodes", lc.episodes);
  if (lc.episodes < 1) throw ConfigError("episodes must be >= 1");
  lc.delta = get_or<double>(j, "delta", lc.delta);
  if (!(lc.delta > 0.0 && lc.delta < 1.0))
    throw ConfigError("delta must lie in (0, 1)");
  lc.beta_doubled = get_or<bool>(j, "beta_doubled", lc.beta_doubled);
  lc.randomize = get_or<bool>(j, "randomize", lc.randomize);
  lc.value_rollouts = get_or<int>(j, "value_rollouts", lc.value_rollouts);
  if (lc.value_rollouts < 2) throw ConfigError("value_rollouts must be >= 2");
  if (j.contains("schedule")) lc.schedule = parse_schedule(j.at("schedule"));
  lc.env_step_scale = get_or<double>(j, "env_step_scale", lc.env_step_scale);
  if (!(lc.env_step_scale > 0.0 && lc.env_step_scale <= 0.25))
    throw ConfigError("env_step_scale must lie in (0, 0.25]");
  lc.value_step_divisor =
      get_or<double>(j, "value_step_divisor", lc.value_step_divisor);
  if (lc.value_step_divisor < 1.0)
    throw ConfigError("value_step_divisor must be >= 1");
  lc.seed = get_or<std::uint64_t>(j, "seed", lc.seed);
  return cfg;
}

std::string serialize_run_config(const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["preset"] = cfg.preset;
  if (cfg.sigma) j["sigma"] = *cfg.sigma;
  j["episodes"] = cfg.learner.episodes;
  j["delta"] = cfg.learner.delta;
  j["beta_doubled"] = cfg.learner.beta_doubled;
  j["randomize"] = cfg.learner.randomize;
  j["value_rollouts"] = cfg.learner.value_rollouts;
  j["schedule"] = schedule_to_json(cfg.learner.schedule);
  j["env_step_scale"] = cfg.learner.env_step_scale;
  j["value_step_divisor"] = cfg.learner.value_step_divisor;
  j["seed"] = cfg.learner.seed;
  return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write config file '" + path + "'");
  out << serialize_run_config(cfg);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = serialize_run_config(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

Preset build_preset(const RunConfig& cfg) {
  if (cfg.preset == "ou_control")
    return cfg.sigma ? make_ou_control(*cfg.sigma) : make_ou_control();
  if (cfg.sigma)
    throw ConfigError("sigma is only supported by the ou_control preset");
  return make_preset(cfg.preset);
}

}  // namespace ctmle
