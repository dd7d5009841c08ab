#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpu/config.hpp"
#include "dpu/harness.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"TD3 delayed-policy-update navigation benchmark"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train one agent and write logs + checkpoint");
    std::string train_config;
    std::uint64_t train_seed = 1;
    bool seed_given = false;
    std::string train_out = "out";
    train_cmd->add_option("--config", train_config, "experiment config file")->required();
    train_cmd->add_option("--seed", train_seed, "master seed (overrides config)")
        ->each([&](const std::string&) { seed_given = true; });
    train_cmd->add_option("--out", train_out, "output directory")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint greedily");
    std::string ckpt, scenario_name, eval_out;
    std::size_t eval_episodes = 100;
    std::uint64_t eval_seed = 1;
    std::string eval_mode = "terrestrial";
    eval_cmd->add_option("--checkpoint", ckpt, "td3-v1 checkpoint")->required();
    eval_cmd->add_option("--scenario", scenario_name, "builtin name or scenario file")->required();
    eval_cmd->add_option("--episodes", eval_episodes, "evaluation episodes");
    eval_cmd->add_option("--seed", eval_seed, "master seed");
    eval_cmd->add_option("--mode", eval_mode, "aerial | terrestrial")
        ->check(CLI::IsMember({"aerial", "terrestrial"}));
    eval_cmd->add_option("--out", eval_out, "directory for metrics + trajectory exports");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Train/evaluate a grid of (eta, seed) cells");
    std::string sweep_config, sweep_out = "sweep_out";
    std::vector<std::size_t> etas = {2, 4, 8};
    std::vector<std::uint64_t> seeds = {1};
    sweep_cmd->add_option("--config", sweep_config, "experiment config file")->required();
    sweep_cmd->add_option("--etas", etas, "delay values")->delimiter(',');
    sweep_cmd->add_option("--seeds", seeds, "master seeds")->delimiter(',');
    sweep_cmd->add_option("--out", sweep_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            dpu::ExperimentConfig cfg = dpu::load_experiment_config(train_config);
            const std::uint64_t seed = seed_given ? train_seed : cfg.seed;
            dpu::TrainResult res = dpu::train(cfg, seed, train_out);
            std::cout << "trained " << res.episodes.size() << " episodes, " << res.env_steps
                      << " env steps, " << res.critic_updates << " critic updates, "
                      << res.actor_updates << " actor updates\n"
                      << "checkpoint: " << res.checkpoint_path << "\n";
        } else if (*eval_cmd) {
            dpu::Td3Agent agent = dpu::Td3Agent::load_checkpoint(ckpt);
            const dpu::EnvSpec spec = dpu::default_spec(
                eval_mode == "aerial" ? dpu::EnvMode::kAerial : dpu::EnvMode::kTerrestrial);
            const dpu::Scenario scenario = dpu::resolve_scenario(scenario_name);
            dpu::EvalResult res = dpu::evaluate(agent, spec, scenario, eval_episodes, eval_seed);
            std::cout << scenario.name << ": " << dpu::format_report(res.report) << "\n";
            if (!eval_out.empty()) {
                fs::create_directories(eval_out);
                dpu::write_eval_metrics_csv(res.report, scenario.name,
                                            (fs::path(eval_out) / "metrics.csv").string());
                dpu::export_trajectories(res.episodes, spec.mode, scenario, eval_out);
                std::cout << "wrote " << eval_out << "\n";
            }
        } else if (*sweep_cmd) {
            dpu::ExperimentConfig cfg = dpu::load_experiment_config(sweep_config);
            const auto rows = dpu::sweep(cfg, etas, seeds, sweep_out);
            for (const auto& r : rows) {
                std::cout << "eta=" << r.eta << " seed="
                          << (r.is_mean ? std::string("mean") : std::to_string(r.seed))
                          << " scenario=" << r.scenario << " ";
                if (r.failed)
                    std::cout << "FAILED: " << r.error << "\n";
                else
                    std::cout << dpu::format_report(r.report) << "\n";
            }
            std::cout << "wrote " << (fs::path(sweep_out) / "metrics.csv").string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
