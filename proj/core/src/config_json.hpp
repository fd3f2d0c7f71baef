#pragma once

#include <json.hpp>

#include "memrl/env.hpp"
#include "memrl/optim.hpp"
#include "memrl/rewards.hpp"

// Internal JSON mappings shared by the config parser and the run-report
// writer.
namespace memrl::detail {

nlohmann::json env_to_json(const EnvConfig& cfg);
EnvConfig env_from_json(const nlohmann::json& j);
nlohmann::json rewards_to_json(const RewardConfig& cfg);
RewardConfig rewards_from_json(const nlohmann::json& j);
nlohmann::json grpo_to_json(const GrpoConfig& cfg);
GrpoConfig grpo_from_json(const nlohmann::json& j);

}  // namespace memrl::detail
