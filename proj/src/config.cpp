#include "dpu/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dpu {

namespace {

struct Entry {
    std::string section, key, value;
    std::size_t line;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<Entry> parse_ini(const std::string& text, const std::string& origin) {
    std::vector<Entry> entries;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": key outside any section");
        entries.push_back({section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno});
    }
    return entries;
}

[[noreturn]] void fail(const Entry& e, const std::string& origin, const std::string& msg) {
    throw std::runtime_error(origin + ":" + std::to_string(e.line) + ": " + msg);
}

double as_double(const Entry& e, const std::string& origin) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        fail(e, origin, "key '" + e.key + "': expected a number, got '" + e.value + "'");
    }
}

std::uint64_t as_uint(const Entry& e, const std::string& origin) {
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        fail(e, origin, "key '" + e.key + "': expected an unsigned integer, got '" + e.value + "'");
    }
}

std::vector<double> as_dlist(const Entry& e, const std::string& origin) {
    std::vector<double> out;
    std::istringstream in(e.value);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            out.push_back(std::stod(trim(tok)));
        } catch (...) {
            fail(e, origin, "key '" + e.key + "': bad list element '" + tok + "'");
        }
    }
    if (out.empty()) fail(e, origin, "key '" + e.key + "': empty list");
    return out;
}

std::vector<std::size_t> as_slist(const Entry& e, const std::string& origin) {
    std::vector<std::size_t> out;
    for (double v : as_dlist(e, origin)) {
        if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
            fail(e, origin, "key '" + e.key + "': expected positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    env.validate();
    td3.validate();
    if (train_episodes < 1 || eval_episodes < 1)
        throw std::invalid_argument("config: episode counts must be >= 1");
    if (ma_window < 1) throw std::invalid_argument("config: ma_window must be >= 1");
    resolve_scenario(train_scenario);
    resolve_scenario(eval_scenario);
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin) {
    const auto entries = parse_ini(text, origin);

    // Mode decides the env defaults, so resolve it before other [env] keys.
    ExperimentConfig cfg;
    for (const auto& e : entries) {
        if (e.section == "env" && e.key == "mode") {
            if (e.value == "aerial") {
                cfg.env = default_spec(EnvMode::kAerial);
                cfg.train_scenario = "aerial-train";
                cfg.eval_scenario = "aerial-eval";
            } else if (e.value == "terrestrial") {
                cfg.env = default_spec(EnvMode::kTerrestrial);
            } else {
                fail(e, origin, "mode must be 'aerial' or 'terrestrial'");
            }
        }
    }

    for (const auto& e : entries) {
        if (e.section == "env") {
            if (e.key == "mode") continue;
            else if (e.key == "train_scenario") cfg.train_scenario = e.value;
            else if (e.key == "eval_scenario") cfg.eval_scenario = e.value;
            else if (e.key == "beam_count") cfg.env.beam_count = as_uint(e, origin);
            else if (e.key == "fov_degrees") cfg.env.fov_degrees = as_double(e, origin);
            else if (e.key == "lidar_max_range") cfg.env.lidar_max_range = as_double(e, origin);
            else if (e.key == "r_arrive") cfg.env.r_arrive = as_double(e, origin);
            else if (e.key == "r_collide") cfg.env.r_collide = as_double(e, origin);
            else if (e.key == "goal_radius") cfg.env.goal_radius = as_double(e, origin);
            else if (e.key == "collision_radius") cfg.env.collision_radius = as_double(e, origin);
            else if (e.key == "max_episode_steps") cfg.env.max_episode_steps = as_uint(e, origin);
            else if (e.key == "dt") cfg.env.dt = as_double(e, origin);
            else if (e.key == "z_min") cfg.env.z_min = as_double(e, origin);
            else if (e.key == "z_max") cfg.env.z_max = as_double(e, origin);
            else if (e.key == "action_lo") cfg.env.action_lo = as_dlist(e, origin);
            else if (e.key == "action_hi") cfg.env.action_hi = as_dlist(e, origin);
            else fail(e, origin, "unknown [env] key '" + e.key + "'");
        } else if (e.section == "td3") {
            if (e.key == "gamma") cfg.td3.gamma = as_double(e, origin);
            else if (e.key == "tau") cfg.td3.tau = as_double(e, origin);
            else if (e.key == "eta") cfg.td3.eta = as_uint(e, origin);
            else if (e.key == "policy_noise_std") cfg.td3.policy_noise_std = as_double(e, origin);
            else if (e.key == "noise_clip") cfg.td3.noise_clip = as_double(e, origin);
            else if (e.key == "batch_size") cfg.td3.batch_size = as_uint(e, origin);
            else if (e.key == "start_steps") cfg.td3.start_steps = as_uint(e, origin);
            else if (e.key == "actor_lr") cfg.td3.actor_lr = as_double(e, origin);
            else if (e.key == "critic_lr") cfg.td3.critic_lr = as_double(e, origin);
            else if (e.key == "ou_theta") cfg.td3.ou_theta = as_double(e, origin);
            else if (e.key == "ou_sigma") cfg.td3.ou_sigma = as_double(e, origin);
            else if (e.key == "ou_mu") cfg.td3.ou_mu = as_double(e, origin);
            else if (e.key == "ou_dt") cfg.td3.ou_dt = as_double(e, origin);
            else if (e.key == "actor_hidden") cfg.td3.actor_hidden = as_slist(e, origin);
            else if (e.key == "critic_hidden") cfg.td3.critic_hidden = as_slist(e, origin);
            else if (e.key == "buffer_capacity") cfg.td3.buffer_capacity = as_uint(e, origin);
            else if (e.key == "adam_beta1") cfg.td3.adam_beta1 = as_double(e, origin);
            else if (e.key == "adam_beta2") cfg.td3.adam_beta2 = as_double(e, origin);
            else if (e.key == "adam_eps") cfg.td3.adam_eps = as_double(e, origin);
            else fail(e, origin, "unknown [td3] key '" + e.key + "'");
        } else if (e.section == "run") {
            if (e.key == "train_episodes") cfg.train_episodes = as_uint(e, origin);
            else if (e.key == "eval_episodes") cfg.eval_episodes = as_uint(e, origin);
            else if (e.key == "seed") cfg.seed = as_uint(e, origin);
            else if (e.key == "ma_window") cfg.ma_window = as_uint(e, origin);
            else if (e.key == "out_dir") cfg.out_dir = e.value;
            else fail(e, origin, "unknown [run] key '" + e.key + "'");
        } else {
            fail(e, origin, "unknown section [" + e.section + "]");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str(), path);
}

}  // namespace dpu
