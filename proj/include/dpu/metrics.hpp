#pragma once

#include <cstddef>
#include <vector>

#include "dpu/env.hpp"

namespace dpu {

struct EpisodeRecord {
    std::size_t index = 0;
    Outcome outcome = Outcome::kRunning;
    double total_reward = 0.0;
    std::size_t steps = 0;
    double time_s = 0.0;  // steps * dt
    std::vector<Pose> trajectory;
};

struct MetricsReport {
    std::size_t episodes = 0;
    double success_rate = 0.0;  // percent
    double er_mean = 0.0;
    double er_std = 0.0;  // population std (divide by n)
    double et_mean = 0.0;
    double et_std = 0.0;
};

MetricsReport aggregate(const std::vector<EpisodeRecord>& records);

// Trailing moving average; element i averages the last min(i+1, window) values.
std::vector<double> moving_average(const std::vector<double>& series, std::size_t window);

}  // namespace dpu
