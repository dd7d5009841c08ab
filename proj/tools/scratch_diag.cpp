// Scratch diagnostic (not installed): can the agent learn a trivial
// no-obstacle goal-reaching task quickly? Separates "mechanics bug"
// from "task difficulty" when the full smoke test underperforms.
#include <cstdio>
#include <filesystem>

#include "dpu/config.hpp"
#include "dpu/harness.hpp"

using namespace dpu;

int main(int argc, char** argv) {
    Scenario easy;
    easy.name = "diag-easy";
    easy.arena_half_extent = 1.5;
    save_scenario_file(easy, "/tmp/diag_easy.txt");

    ExperimentConfig cfg;
    cfg.train_scenario = "/tmp/diag_easy.txt";
    cfg.eval_scenario = "/tmp/diag_easy.txt";
    cfg.train_episodes = (argc > 1) ? std::stoul(argv[1]) : 300;
    cfg.td3.eta = 8;

    const TrainResult tr = train(cfg, 1, "/tmp/diag_out");
    std::size_t arrivals = 0;
    for (std::size_t i = 0; i < tr.episodes.size(); ++i) {
        if (tr.episodes[i].outcome == Outcome::kArrive) ++arrivals;
        if ((i + 1) % 50 == 0) {
            double ma = 0.0;
            for (std::size_t j = i + 1 - 50; j <= i; ++j) ma += tr.episodes[j].total_reward;
            std::printf("ep %4zu  ma50 %7.2f  arrivals so far %zu\n", i + 1, ma / 50.0, arrivals);
        }
    }
    Td3Agent agent = Td3Agent::load_checkpoint(tr.checkpoint_path);
    const EvalResult greedy = evaluate(agent, cfg.env, resolve_scenario(cfg.train_scenario), 100, 1);
    std::printf("greedy success %.1f%%  er_mean %.2f\n", greedy.report.success_rate,
                greedy.report.er_mean);
    std::filesystem::remove_all("/tmp/diag_out");
    return 0;
}
