#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dpu/config.hpp"
#include "dpu/harness.hpp"

using namespace dpu;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Small enough to train in well under a second.
ExperimentConfig tiny_cfg() {
    ExperimentConfig cfg;
    cfg.env.max_episode_steps = 40;
    cfg.td3.actor_hidden = {8};
    cfg.td3.critic_hidden = {8};
    cfg.td3.batch_size = 8;
    cfg.td3.start_steps = 30;
    cfg.train_episodes = 4;
    cfg.eval_episodes = 3;
    return cfg;
}

}  // namespace

TEST_CASE("moving_average: identity, constancy, arithmetic") {
    CHECK(moving_average({3, 1, 4}, 1) == std::vector<double>{3, 1, 4});
    CHECK(moving_average({5, 5, 5, 5}, 3) == std::vector<double>{5, 5, 5, 5});
    CHECK(moving_average({0, 10, 20}, 2) == std::vector<double>{0, 5, 15});
    CHECK(moving_average({}, 4).empty());
    CHECK_THROWS(moving_average({1.0}, 0));
}

TEST_CASE("aggregate: hand-computed mixed-outcome aerial case") {
    std::vector<EpisodeRecord> recs(3);
    recs[0] = {0, Outcome::kArrive, 200.0, 100, 10.0, {}};
    recs[1] = {1, Outcome::kArrive, 200.0, 120, 12.0, {}};
    recs[2] = {2, Outcome::kCollide, -20.0, 50, 5.0, {}};
    const MetricsReport r = aggregate(recs);
    CHECK(r.er_mean == doctest::Approx(126.67).epsilon(1e-4));
    CHECK(r.success_rate == doctest::Approx(66.67).epsilon(1e-4));
    CHECK(r.er_std == doctest::Approx(103.7089945740).epsilon(1e-9));
}

TEST_CASE("aggregate: degenerate always-arrive policy has zero spread") {
    std::vector<EpisodeRecord> recs(5);
    for (std::size_t i = 0; i < recs.size(); ++i)
        recs[i] = {i, Outcome::kArrive, 100.0, 30, 3.0, {}};
    const MetricsReport r = aggregate(recs);
    CHECK(r.success_rate == 100.0);
    CHECK(r.er_std == 0.0);
    CHECK(r.et_std == 0.0);
}

TEST_CASE("aggregate: zero arrivals means zero success rate") {
    std::vector<EpisodeRecord> recs(50);
    for (std::size_t i = 0; i < recs.size(); ++i)
        recs[i] = {i, Outcome::kTimeout, -10.0, 250, 25.0, {}};
    CHECK(aggregate(recs).success_rate == 0.0);
}

TEST_CASE("config: defaults and overrides by section") {
    const std::string text =
        "[env]\n"
        "mode = terrestrial\n"
        "lidar_max_range = 4.0\n"
        "[td3]\n"
        "eta = 8\n"
        "actor_hidden = 32,16\n"
        "[run]\n"
        "train_episodes = 7\n"
        "seed = 99\n";
    const ExperimentConfig cfg = parse_experiment_config(text, "inline");
    CHECK(cfg.env.mode == EnvMode::kTerrestrial);
    CHECK(cfg.env.lidar_max_range == 4.0);
    CHECK(cfg.env.beam_count == 10);  // untouched default
    CHECK(cfg.td3.eta == 8);
    CHECK(cfg.td3.actor_hidden == std::vector<std::size_t>{32, 16});
    CHECK(cfg.train_episodes == 7);
    CHECK(cfg.seed == 99);
}

TEST_CASE("config: aerial mode flips every env default") {
    const ExperimentConfig cfg = parse_experiment_config("[env]\nmode = aerial\n", "inline");
    CHECK(cfg.env.beam_count == 20);
    CHECK(cfg.env.r_arrive == 200.0);
    CHECK(cfg.env.max_episode_steps == 500);
    CHECK(cfg.train_scenario == "aerial-train");
    CHECK(cfg.eval_scenario == "aerial-eval");
}

TEST_CASE("config: unknown keys and sections rejected") {
    CHECK_THROWS(parse_experiment_config("[env]\nwind_speed = 3\n", "inline"));
    CHECK_THROWS(parse_experiment_config("[physics]\ngravity = 9.8\n", "inline"));
    CHECK_THROWS(parse_experiment_config("[td3]\ngamma = fast\n", "inline"));
    CHECK_THROWS(parse_experiment_config("orphan = 1\n", "inline"));
}

TEST_CASE("train: same seed produces byte-identical episode logs") {
    const ExperimentConfig cfg = tiny_cfg();
    train(cfg, 7, "tmp_train_a");
    train(cfg, 7, "tmp_train_b");
    CHECK(slurp("tmp_train_a/episodes.csv") == slurp("tmp_train_b/episodes.csv"));
    CHECK(slurp("tmp_train_a/reward_ma.csv") == slurp("tmp_train_b/reward_ma.csv"));
    fs::remove_all("tmp_train_a");
    fs::remove_all("tmp_train_b");
}

TEST_CASE("train: warm-up episodes flagged, schedule bookkeeping correct") {
    ExperimentConfig cfg = tiny_cfg();
    cfg.td3.eta = 2;
    const TrainResult res = train(cfg, 3, "tmp_train_c");
    CHECK(res.env_steps >= cfg.td3.start_steps);
    CHECK(res.critic_updates == res.env_steps - cfg.td3.start_steps + 1);
    CHECK(res.actor_updates == res.critic_updates / cfg.td3.eta);

    const std::string log = slurp("tmp_train_c/episodes.csv");
    CHECK(log.find("warmup") != std::string::npos);
    CHECK(log.find(",1\n") != std::string::npos);  // at least one warm-up episode
    fs::remove_all("tmp_train_c");
}

TEST_CASE("evaluate: never trains and never samples the buffer") {
    const ExperimentConfig cfg = tiny_cfg();
    const TrainResult tr = train(cfg, 5, "tmp_train_d");
    Td3Agent agent = Td3Agent::load_checkpoint(tr.checkpoint_path);
    const auto critic_updates = agent.critic_update_count();
    const auto actor_updates = agent.actor_update_count();
    const auto actor_w = agent.actor().weights;

    const EvalResult ev =
        evaluate(agent, cfg.env, resolve_scenario(cfg.eval_scenario), 3, 11);
    CHECK(ev.episodes.size() == 3);
    CHECK(agent.critic_update_count() == critic_updates);
    CHECK(agent.actor_update_count() == actor_updates);
    CHECK(agent.actor().weights == actor_w);
    fs::remove_all("tmp_train_d");
}

TEST_CASE("evaluate: width mismatch between checkpoint and env is explicit") {
    const ExperimentConfig cfg = tiny_cfg();
    const TrainResult tr = train(cfg, 5, "tmp_train_e");
    Td3Agent agent = Td3Agent::load_checkpoint(tr.checkpoint_path);
    const EnvSpec aerial = default_spec(EnvMode::kAerial);
    CHECK_THROWS(evaluate(agent, aerial, resolve_scenario("aerial-eval"), 1, 1));
    fs::remove_all("tmp_train_e");
}

TEST_CASE("metrics report is reproducible from raw records") {
    const ExperimentConfig cfg = tiny_cfg();
    train(cfg, 2, "tmp_train_f");
    Td3Agent agent = Td3Agent::load_checkpoint("tmp_train_f/checkpoint.bin");
    const EvalResult ev =
        evaluate(agent, cfg.env, resolve_scenario(cfg.train_scenario), 5, 3);
    const MetricsReport again = aggregate(ev.episodes);
    CHECK(std::abs(again.success_rate - ev.report.success_rate) < 1e-9);
    CHECK(std::abs(again.er_mean - ev.report.er_mean) < 1e-9);
    CHECK(std::abs(again.er_std - ev.report.er_std) < 1e-9);
    CHECK(std::abs(again.et_mean - ev.report.et_mean) < 1e-9);
    fs::remove_all("tmp_train_f");
}

TEST_CASE("export_trajectories: fencepost, monotone echo, stable bytes") {
    EpisodeRecord rec;
    rec.index = 0;
    rec.outcome = Outcome::kArrive;
    rec.steps = 3;
    for (int i = 0; i <= 3; ++i) rec.trajectory.push_back({0.1 * i, 0.0, 0.0});
    const Scenario sc{"empty", 2.5, {}};

    export_trajectories({rec}, EnvMode::kTerrestrial, sc, "tmp_traj");
    const std::string body = slurp("tmp_traj/traj_0.csv");
    // header + steps + 1 pose rows
    CHECK(std::count(body.begin(), body.end(), '\n') == 1 + 4);
    double prev = -1.0;
    std::istringstream in(body);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const double x = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        CHECK(x > prev);
        prev = x;
    }
    export_trajectories({rec}, EnvMode::kTerrestrial, sc, "tmp_traj2");
    CHECK(body == slurp("tmp_traj2/traj_0.csv"));
    CHECK(fs::exists("tmp_traj/scenario.txt"));
    fs::remove_all("tmp_traj");
    fs::remove_all("tmp_traj2");
}

TEST_CASE("sweep: cell and report counting") {
    ExperimentConfig cfg = tiny_cfg();
    cfg.train_episodes = 2;
    cfg.eval_episodes = 2;
    const auto rows = sweep(cfg, {2, 4}, {1}, "tmp_sweep");
    // 2 cells x 2 scenarios + 2x2 per-eta means
    std::size_t cell_rows = 0, mean_rows = 0;
    for (const auto& r : rows) (r.is_mean ? mean_rows : cell_rows) += 1;
    CHECK(cell_rows == 4);
    CHECK(mean_rows == 4);
    CHECK(fs::exists("tmp_sweep/metrics.csv"));
    const std::string metrics = slurp("tmp_sweep/metrics.csv");
    CHECK(metrics.find("eta,seed,scenario") != std::string::npos);
    CHECK(metrics.find("success_rate_pct") != std::string::npos);
    fs::remove_all("tmp_sweep");
}
