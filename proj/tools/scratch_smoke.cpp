// Scratch (not installed): criterion-8-shaped smoke run with a width
// argument, for sizing the default hidden layers.
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "dpu/config.hpp"
#include "dpu/harness.hpp"

using namespace dpu;

int main(int argc, char** argv) {
    const std::size_t width = (argc > 1) ? std::strtoul(argv[1], nullptr, 10) : 128;
    const std::size_t episodes = (argc > 2) ? std::strtoul(argv[2], nullptr, 10) : 500;

    ExperimentConfig cfg;
    cfg.td3.eta = 8;
    cfg.td3.actor_hidden = {width, width};
    cfg.td3.critic_hidden = {width, width};
    cfg.train_episodes = episodes;

    const std::string dir = "/tmp/smoke_w" + std::to_string(width);
    const TrainResult tr = train(cfg, 1, dir);
    std::size_t arrivals = 0;
    for (std::size_t i = 0; i < tr.episodes.size(); ++i) {
        if (tr.episodes[i].outcome == Outcome::kArrive) ++arrivals;
        if ((i + 1) % 50 == 0) {
            double ma = 0.0;
            for (std::size_t j = i + 1 - 50; j <= i; ++j) ma += tr.episodes[j].total_reward;
            std::printf("ep %4zu  ma50 %7.2f  arrivals so far %zu\n", i + 1, ma / 50.0, arrivals);
            std::fflush(stdout);
        }
    }
    Td3Agent agent = Td3Agent::load_checkpoint(tr.checkpoint_path);
    const EvalResult greedy =
        evaluate(agent, cfg.env, resolve_scenario(cfg.train_scenario), 100, 1);
    std::printf("width %zu: greedy success %.1f%%  er_mean %.2f\n", width,
                greedy.report.success_rate, greedy.report.er_mean);
    std::filesystem::remove_all(dir);
    return 0;
}
