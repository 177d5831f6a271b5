#pragma once

#include <string>

#include <json.hpp>

#include "frogger/dqn.hpp"
#include "frogger/env.hpp"

namespace frogger {

// Env configs live in nested-table JSON. A config either names a preset
// ("standard" or "mini") and overrides scalars, or spells out the full lane
// layout.
EnvConfig env_config_from_json(const nlohmann::json& j);
nlohmann::json env_config_to_json(const EnvConfig& cfg);

TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

}  // namespace frogger
