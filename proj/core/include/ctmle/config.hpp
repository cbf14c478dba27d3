#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ctmle/envs.hpp"
#include "ctmle/learner.hpp"

namespace ctmle {

// everything a `run` needs; serializes to a flat JSON document with a
// schema_version field
struct RunConfig {
  std::string preset = "ou_control";
  // true diffusion level for ou_control; unset means the preset default.
  // Other presets have a fixed noise model and reject this key.
  std::optional<double> sigma;
  LearnerConfig learner;
};

RunConfig default_run_config();

// strict parser: unknown keys, wrong types, and out-of-range values all
// throw ConfigError
RunConfig parse_run_config(const std::string& json_text);

// canonical form: sorted keys, 2-space indent, trailing newline
std::string serialize_run_config(const RunConfig& cfg);

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

// FNV-1a over the canonical serialization, as fixed-width hex
std::string config_hash(const RunConfig& cfg);

// instantiate the preset named by the config (sigma applies to ou_control;
// any other preset requires it to be unset)
Preset build_preset(const RunConfig& cfg);

}  // namespace ctmle
