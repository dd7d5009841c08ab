#pragma once

#include <cstdint>
#include <string>

#include "dpu/env.hpp"
#include "dpu/td3.hpp"

namespace dpu {

// One experiment cell: environment spec, learner hyperparameters, run plan.
struct ExperimentConfig {
    EnvSpec env = default_spec(EnvMode::kTerrestrial);
    std::string train_scenario = "terrestrial-train";
    std::string eval_scenario = "terrestrial-eval";
    Td3Config td3;
    std::size_t train_episodes = 500;
    std::size_t eval_episodes = 100;
    std::uint64_t seed = 1;
    std::size_t ma_window = 50;
    std::string out_dir = "out";

    void validate() const;
};

// INI-style config with sections [env], [td3], [run]. Every EnvSpec and
// Td3Config field is overridable; unknown sections or keys are rejected.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin);

}  // namespace dpu
