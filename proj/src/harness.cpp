#include "dpu/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpu {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    return out;
}

EpisodeRecord run_episode(NavEnv& env, Rng& env_rng,
                          const std::function<std::vector<double>(const std::vector<double>&)>& policy,
                          std::size_t index) {
    EpisodeRecord rec;
    rec.index = index;
    std::vector<double> obs = env.reset(env_rng);
    rec.trajectory.push_back(env.pose());
    while (!env.done()) {
        const StepResult res = env.step(policy(obs));
        obs = res.observation;
        rec.total_reward += res.reward;
        rec.outcome = res.outcome;
        rec.trajectory.push_back(env.pose());
    }
    rec.steps = env.episode_step();
    rec.time_s = static_cast<double>(rec.steps) * env.spec().dt;
    return rec;
}

}  // namespace

TrainResult train(const ExperimentConfig& cfg, std::uint64_t seed, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);

    Rng init_rng = Rng::stream(seed, "init");
    Rng env_rng = Rng::stream(seed, "env");
    Rng noise_rng = Rng::stream(seed, "agent-noise");
    Rng warmup_rng = Rng::stream(seed, "warmup");
    Rng sample_rng = Rng::stream(seed, "buffer-sampling");
    Rng smoothing_rng = Rng::stream(seed, "target-smoothing");

    const Scenario scenario = resolve_scenario(cfg.train_scenario);
    NavEnv env(cfg.env, scenario);
    Td3Agent agent(cfg.env.observation_width(), cfg.env.action_lo, cfg.env.action_hi,
                   cfg.td3, init_rng);
    ReplayBuffer buffer(cfg.td3.buffer_capacity, cfg.env.observation_width(),
                        cfg.env.action_width());

    TrainResult result;
    std::uint64_t global_step = 0;
    std::size_t warmup_episodes = 0;

    for (std::size_t ep = 0; ep < cfg.train_episodes; ++ep) {
        EpisodeRecord rec;
        rec.index = ep;
        if (global_step < cfg.td3.start_steps) ++warmup_episodes;

        std::vector<double> obs = env.reset(env_rng);
        agent.reset_exploration();
        rec.trajectory.push_back(env.pose());
        while (!env.done()) {
            std::vector<double> action;
            if (global_step < cfg.td3.start_steps)
                action = Td3Agent::random_warmup_action(cfg.env.action_lo, cfg.env.action_hi,
                                                        warmup_rng);
            else
                action = agent.select_action(obs, /*explore=*/true, noise_rng);

            const StepResult res = env.step(action);
            buffer.push({obs, action, res.reward, res.observation, res.done});
            obs = res.observation;
            rec.total_reward += res.reward;
            rec.outcome = res.outcome;
            rec.trajectory.push_back(env.pose());
            ++global_step;

            if (global_step >= cfg.td3.start_steps) {
                try {
                    agent.train_step(buffer, sample_rng, smoothing_rng);
                } catch (const std::exception& e) {
                    throw std::runtime_error("training aborted at episode " +
                                             std::to_string(ep) + ": " + e.what());
                }
            }
        }
        rec.steps = env.episode_step();
        rec.time_s = static_cast<double>(rec.steps) * cfg.env.dt;
        result.episodes.push_back(std::move(rec));
    }

    result.env_steps = global_step;
    result.critic_updates = agent.critic_update_count();
    result.actor_updates = agent.actor_update_count();
    result.checkpoint_path = (fs::path(out_dir) / "checkpoint.bin").string();
    agent.save_checkpoint(result.checkpoint_path);
    write_episodes_csv(result.episodes, cfg.env.dt, warmup_episodes,
                       (fs::path(out_dir) / "episodes.csv").string());
    write_reward_ma_csv(result.episodes, cfg.ma_window,
                        (fs::path(out_dir) / "reward_ma.csv").string());

    auto summary = open_out((fs::path(out_dir) / "train_summary.txt").string());
    summary << "episodes " << result.episodes.size() << "\n"
            << "env_steps " << result.env_steps << "\n"
            << "critic_updates " << result.critic_updates << "\n"
            << "actor_updates " << result.actor_updates << "\n"
            << "eta " << cfg.td3.eta << "\n"
            << "seed " << seed << "\n"
            << "scenario " << scenario.name << "\n";
    return result;
}

EvalResult evaluate(Td3Agent& agent, const EnvSpec& spec, const Scenario& scenario,
                    std::size_t episodes, std::uint64_t seed) {
    if (spec.observation_width() != agent.state_width())
        throw std::runtime_error("evaluate: checkpoint/env observation width mismatch");
    if (spec.action_width() != agent.action_lo().size())
        throw std::runtime_error("evaluate: checkpoint/env action width mismatch");

    Rng env_rng = Rng::stream(seed, "eval-env:" + scenario.name);
    Rng unused_noise = Rng::stream(seed, "eval-noise");
    NavEnv env(spec, scenario);

    EvalResult result;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        result.episodes.push_back(run_episode(
            env, env_rng,
            [&](const std::vector<double>& obs) {
                return agent.select_action(obs, /*explore=*/false, unused_noise);
            },
            ep));
    }
    result.report = aggregate(result.episodes);
    return result;
}

EvalResult random_policy_baseline(const EnvSpec& spec, const Scenario& scenario,
                                  std::size_t episodes, std::uint64_t seed) {
    Rng env_rng = Rng::stream(seed, "env");
    Rng action_rng = Rng::stream(seed, "warmup");
    NavEnv env(spec, scenario);
    EvalResult result;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        result.episodes.push_back(run_episode(
            env, env_rng,
            [&](const std::vector<double>&) {
                return Td3Agent::random_warmup_action(spec.action_lo, spec.action_hi, action_rng);
            },
            ep));
    }
    result.report = aggregate(result.episodes);
    return result;
}

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& etas,
                            const std::vector<std::uint64_t>& seeds, const std::string& out_dir) {
    if (seeds.empty()) throw std::invalid_argument("sweep: need at least one seed");
    fs::create_directories(out_dir);

    std::vector<SweepRow> rows;
    const Scenario train_sc = resolve_scenario(cfg.train_scenario);
    const Scenario eval_sc = resolve_scenario(cfg.eval_scenario);

    for (std::size_t eta : etas) {
        for (std::uint64_t seed : seeds) {
            ExperimentConfig cell = cfg;
            cell.td3.eta = eta;
            const std::string cell_dir =
                (fs::path(out_dir) / ("eta" + std::to_string(eta) + "_seed" + std::to_string(seed)))
                    .string();
            try {
                train(cell, seed, cell_dir);
                Td3Agent agent = Td3Agent::load_checkpoint(
                    (fs::path(cell_dir) / "checkpoint.bin").string());
                for (const Scenario* sc : {&train_sc, &eval_sc}) {
                    SweepRow row;
                    row.eta = eta;
                    row.seed = seed;
                    row.scenario = sc->name;
                    EvalResult ev = evaluate(agent, cell.env, *sc, cell.eval_episodes, seed);
                    row.report = ev.report;
                    rows.push_back(std::move(row));
                }
            } catch (const std::exception& e) {
                SweepRow row;
                row.eta = eta;
                row.seed = seed;
                row.scenario = "-";
                row.failed = true;
                row.error = e.what();
                rows.push_back(std::move(row));
            }
        }
    }

    // Per-eta, per-scenario means over seeds: the Tables I-IV row structure.
    std::vector<SweepRow> means;
    for (std::size_t eta : etas) {
        for (const Scenario* sc : {&train_sc, &eval_sc}) {
            MetricsReport acc;
            std::size_t count = 0;
            for (const auto& r : rows) {
                if (r.failed || r.eta != eta || r.scenario != sc->name) continue;
                acc.success_rate += r.report.success_rate;
                acc.er_mean += r.report.er_mean;
                acc.er_std += r.report.er_std;
                acc.et_mean += r.report.et_mean;
                acc.et_std += r.report.et_std;
                acc.episodes += r.report.episodes;
                ++count;
            }
            if (count == 0) continue;
            acc.success_rate /= static_cast<double>(count);
            acc.er_mean /= static_cast<double>(count);
            acc.er_std /= static_cast<double>(count);
            acc.et_mean /= static_cast<double>(count);
            acc.et_std /= static_cast<double>(count);
            SweepRow row;
            row.eta = eta;
            row.seed = 0;
            row.is_mean = true;
            row.scenario = sc->name;
            row.report = acc;
            means.push_back(std::move(row));
        }
    }
    rows.insert(rows.end(), means.begin(), means.end());
    write_metrics_csv(rows, (fs::path(out_dir) / "metrics.csv").string());
    return rows;
}

void write_episodes_csv(const std::vector<EpisodeRecord>& records, double dt,
                        std::size_t warmup_episodes, const std::string& path) {
    auto out = open_out(path);
    out << "episode,outcome,reward,steps,time_s,warmup\n";
    for (const auto& r : records) {
        out << r.index << ',' << outcome_name(r.outcome) << ',' << num(r.total_reward) << ','
            << r.steps << ',' << num(static_cast<double>(r.steps) * dt) << ','
            << (r.index < warmup_episodes ? 1 : 0) << '\n';
    }
}

void write_reward_ma_csv(const std::vector<EpisodeRecord>& records, std::size_t window,
                         const std::string& path) {
    std::vector<double> rewards;
    rewards.reserve(records.size());
    for (const auto& r : records) rewards.push_back(r.total_reward);
    const std::vector<double> ma = moving_average(rewards, window);
    auto out = open_out(path);
    out << "# window=" << window << "\n";
    out << "episode,reward,reward_ma\n";
    for (std::size_t i = 0; i < rewards.size(); ++i)
        out << i << ',' << num(rewards[i]) << ',' << num(ma[i]) << '\n';
}

void write_metrics_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "# std convention: population (divide by n)\n";
    out << "eta,seed,scenario,episodes,success_rate_pct,er_mean,er_std,et_mean_s,et_std_s,error\n";
    for (const auto& r : rows) {
        out << r.eta << ',' << (r.is_mean ? std::string("mean") : std::to_string(r.seed)) << ','
            << r.scenario << ',';
        if (r.failed) {
            out << "0,,,,," << r.error << '\n';
        } else {
            out << r.report.episodes << ',' << num(r.report.success_rate) << ','
                << num(r.report.er_mean) << ',' << num(r.report.er_std) << ','
                << num(r.report.et_mean) << ',' << num(r.report.et_std) << ",\n";
        }
    }
}

void write_eval_metrics_csv(const MetricsReport& r, const std::string& scenario,
                            const std::string& path) {
    auto out = open_out(path);
    out << "# std convention: population (divide by n)\n";
    out << "scenario,episodes,success_rate_pct,er_mean,er_std,et_mean_s,et_std_s\n";
    out << scenario << ',' << r.episodes << ',' << num(r.success_rate) << ',' << num(r.er_mean)
        << ',' << num(r.er_std) << ',' << num(r.et_mean) << ',' << num(r.et_std) << '\n';
}

void export_trajectories(const std::vector<EpisodeRecord>& records, EnvMode mode,
                         const Scenario& scenario, const std::string& dir) {
    fs::create_directories(dir);
    const bool aerial = (mode == EnvMode::kAerial);
    for (const auto& r : records) {
        auto out = open_out((fs::path(dir) / ("traj_" + std::to_string(r.index) + ".csv")).string());
        out << (aerial ? "step,x,y,z,yaw\n" : "step,x,y,yaw\n");
        for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
            const Pose& p = r.trajectory[i];
            out << i << ',' << num(p.x) << ',' << num(p.y) << ',';
            if (aerial) out << num(p.z) << ',';
            out << num(p.yaw) << '\n';
        }
    }
    save_scenario_file(scenario, (fs::path(dir) / "scenario.txt").string());
}

std::string format_report(const MetricsReport& r) {
    std::ostringstream os;
    os << "episodes=" << r.episodes << " success_rate=" << num(r.success_rate)
       << "% er_mean=" << num(r.er_mean) << " er_std=" << num(r.er_std)
       << " et_mean=" << num(r.et_mean) << "s et_std=" << num(r.et_std) << "s";
    return os.str();
}

}  // namespace dpu
