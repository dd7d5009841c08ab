#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpu/net.hpp"
#include "dpu/ou_noise.hpp"
#include "dpu/replay.hpp"
#include "dpu/rng.hpp"

namespace dpu {

struct Td3Config {
    double gamma = 0.99;
    double tau = 0.005;
    std::size_t eta = 2;              // policy/target update delay
    double policy_noise_std = 0.2;    // target smoothing sigma
    double noise_clip = 0.5;
    std::size_t batch_size = 100;
    std::size_t start_steps = 1000;   // uniform-random warm-up steps
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    double ou_theta = 0.15;
    double ou_sigma = 0.2;
    double ou_mu = 0.0;
    double ou_dt = 1.0;
    std::vector<std::size_t> actor_hidden = {64, 64};
    std::vector<std::size_t> critic_hidden = {64, 64};
    std::size_t buffer_capacity = 200000;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

// One target-smoothing noise draw: N(0, stddev) clipped to [-clip, clip].
double clipped_gaussian(Rng& rng, double stddev, double clip);

struct LossReport {
    double critic1_loss = 0.0;
    double critic2_loss = 0.0;
    std::optional<double> actor_loss;  // present only on delayed update steps
};

// TD3 learner: actor, twin critics, three target networks, OU exploration
// noise, clipped double-Q targets, and the eta-gated delayed policy update.
class Td3Agent {
public:
    Td3Agent(std::size_t state_width, std::vector<double> action_lo,
             std::vector<double> action_hi, Td3Config config, Rng& init_rng);

    std::vector<double> select_action(const std::vector<double>& state, bool explore,
                                      Rng& noise_rng);

    static std::vector<double> random_warmup_action(const std::vector<double>& action_lo,
                                                    const std::vector<double>& action_hi,
                                                    Rng& rng);

    // Clipped double-Q targets with clipped-Gaussian smoothing on the
    // target-actor action; terminal transitions cut the bootstrap term.
    std::vector<double> compute_targets(const std::vector<const Transition*>& batch,
                                        Rng& smoothing_rng) const;

    LossReport train_step(const ReplayBuffer& buffer, Rng& sample_rng, Rng& smoothing_rng);

    void reset_exploration() { ou_.reset(); }

    std::uint64_t critic_update_count() const { return critic_update_count_; }
    std::uint64_t actor_update_count() const { return actor_update_count_; }
    const Td3Config& config() const { return config_; }
    std::size_t state_width() const { return state_width_; }
    const std::vector<double>& action_lo() const { return action_lo_; }
    const std::vector<double>& action_hi() const { return action_hi_; }

    DenseNet& actor() { return actor_; }
    DenseNet& actor_target() { return actor_target_; }
    DenseNet& critic1() { return critic1_; }
    DenseNet& critic2() { return critic2_; }
    DenseNet& critic1_target() { return critic1_target_; }
    DenseNet& critic2_target() { return critic2_target_; }

    // td3-v1 container: config echo, counters, OU state, all six networks.
    void save_checkpoint(const std::string& path) const;
    static Td3Agent load_checkpoint(const std::string& path);

private:
    Td3Agent() = default;  // for load_checkpoint

    std::size_t state_width_ = 0;
    std::vector<double> action_lo_, action_hi_;
    Td3Config config_;
    DenseNet actor_, actor_target_;
    DenseNet critic1_, critic2_, critic1_target_, critic2_target_;
    OuNoise ou_{1, 0.15, 0.2};
    std::uint64_t critic_update_count_ = 0;
    std::uint64_t actor_update_count_ = 0;
};

}  // namespace dpu
