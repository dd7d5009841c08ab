#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpu/config.hpp"
#include "dpu/metrics.hpp"
#include "dpu/td3.hpp"

namespace dpu {

struct TrainResult {
    std::vector<EpisodeRecord> episodes;
    std::string checkpoint_path;
    std::uint64_t env_steps = 0;
    std::uint64_t critic_updates = 0;
    std::uint64_t actor_updates = 0;
};

struct EvalResult {
    MetricsReport report;
    std::vector<EpisodeRecord> episodes;
};

struct SweepRow {
    std::size_t eta = 0;
    std::uint64_t seed = 0;
    std::string scenario;
    bool is_mean = false;
    bool failed = false;
    std::string error;
    MetricsReport report;
};

// Trains per the flattened step loop: warm-up random actions for
// start_steps, then one select_action/step/push/train_step per env step.
// Writes episodes.csv, reward_ma.csv, and checkpoint.bin under out_dir.
TrainResult train(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir);

// Greedy rollouts; never trains and never touches a replay buffer.
EvalResult evaluate(Td3Agent& agent, const EnvSpec& spec, const Scenario& scenario,
                    std::size_t episodes, std::uint64_t seed);

// Trains each (eta, seed) cell, evaluates on both scenarios, keeps going
// past failed cells. Returns per-cell rows followed by per-eta means.
std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& etas,
                            const std::vector<std::uint64_t>& seeds, const std::string& out_dir);

// Uniform-random policy rollouts, the baseline for learning checks.
EvalResult random_policy_baseline(const EnvSpec& spec, const Scenario& scenario,
                                  std::size_t episodes, std::uint64_t seed);

void write_episodes_csv(const std::vector<EpisodeRecord>& records, double dt,
                        std::size_t warmup_episodes, const std::string& path);
void write_reward_ma_csv(const std::vector<EpisodeRecord>& records, std::size_t window,
                         const std::string& path);
void write_metrics_csv(const std::vector<SweepRow>& rows, const std::string& path);
void write_eval_metrics_csv(const MetricsReport& r, const std::string& scenario,
                            const std::string& path);

// One traj_<ep>.csv per record (step, x, y[, z], yaw) plus scenario.txt
// for overlay plotting.
void export_trajectories(const std::vector<EpisodeRecord>& records, EnvMode mode,
                         const Scenario& scenario, const std::string& dir);

std::string format_report(const MetricsReport& r);

}  // namespace dpu
