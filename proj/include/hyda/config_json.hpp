// hyda/config_json.hpp — JSON round-trips for run configuration, shared by
// the experiment harness and the CLI. A resolved config echoed to disk feeds
// back through parse_* to reproduce the run.
#pragma once

#include "hyda/data.hpp"
#include "hyda/experiments.hpp"
#include "hyda/trainer.hpp"
#include "hyda/weighting.hpp"

#include <json.hpp>

#include <string>

namespace hyda {

nlohmann::json to_json(const ToySpec& spec);
ToySpec toyspec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StrategyConfig& cfg);
StrategyConfig strategy_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig trainconfig_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Architecture& arch);
Architecture architecture_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec experiment_from_json(const nlohmann::json& j);

nlohmann::json summary_to_json(const RunSummary& s, const std::string& strategy,
                               std::uint64_t seed);

}  // namespace hyda
