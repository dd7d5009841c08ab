#include "dpu/td3.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dpu {

namespace {

constexpr char kMagic[8] = {'t', 'd', '3', '-', 'v', '1', '\0', '\0'};

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_f64(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return v;
}

double read_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return v;
}

void write_dvec(std::ostream& out, const std::vector<double>& v) {
    write_u64(out, v.size());
    for (double x : v) write_f64(out, x);
}

std::vector<double> read_dvec(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    if (n > (1ULL << 24)) throw std::runtime_error("checkpoint corrupt");
    std::vector<double> v(n);
    for (auto& x : v) x = read_f64(in);
    return v;
}

void write_svec(std::ostream& out, const std::vector<std::size_t>& v) {
    write_u64(out, v.size());
    for (std::size_t x : v) write_u64(out, x);
}

std::vector<std::size_t> read_svec(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    if (n > 64) throw std::runtime_error("checkpoint corrupt");
    std::vector<std::size_t> v(n);
    for (auto& x : v) x = read_u64(in);
    return v;
}

}  // namespace

double clipped_gaussian(Rng& rng, double stddev, double clip) {
    return clamp(rng.normal(0.0, stddev), -clip, clip);
}

void Td3Config::validate() const {
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("td3: gamma outside (0,1)");
    if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("td3: tau outside (0,1]");
    if (eta < 1) throw std::invalid_argument("td3: eta must be >= 1");
    if (policy_noise_std < 0.0) throw std::invalid_argument("td3: negative smoothing noise");
    if (noise_clip <= 0.0) throw std::invalid_argument("td3: noise_clip must be > 0");
    if (batch_size < 1) throw std::invalid_argument("td3: batch_size must be >= 1");
    if (actor_lr <= 0.0 || critic_lr <= 0.0) throw std::invalid_argument("td3: bad learning rate");
    if (buffer_capacity < 1) throw std::invalid_argument("td3: bad buffer capacity");
}

Td3Agent::Td3Agent(std::size_t state_width, std::vector<double> action_lo,
                   std::vector<double> action_hi, Td3Config config, Rng& init_rng)
    : state_width_(state_width),
      action_lo_(std::move(action_lo)),
      action_hi_(std::move(action_hi)),
      config_(std::move(config)),
      ou_(action_lo_.size(), config_.ou_theta, config_.ou_sigma, config_.ou_mu, config_.ou_dt) {
    config_.validate();
    if (action_lo_.size() != action_hi_.size() || action_lo_.empty())
        throw std::invalid_argument("td3: malformed action box");

    const std::size_t act_w = action_lo_.size();
    std::vector<std::size_t> actor_sizes{state_width_};
    actor_sizes.insert(actor_sizes.end(), config_.actor_hidden.begin(), config_.actor_hidden.end());
    actor_sizes.push_back(act_w);
    std::vector<std::size_t> critic_sizes{state_width_ + act_w};
    critic_sizes.insert(critic_sizes.end(), config_.critic_hidden.begin(), config_.critic_hidden.end());
    critic_sizes.push_back(1);

    actor_ = make_net(actor_sizes, OutputActivation::kScaledTanh, init_rng);
    set_output_box(actor_, action_lo_, action_hi_);
    critic1_ = make_net(critic_sizes, OutputActivation::kIdentity, init_rng);
    critic2_ = make_net(critic_sizes, OutputActivation::kIdentity, init_rng);
    actor_target_ = clone_into_target(actor_);
    critic1_target_ = clone_into_target(critic1_);
    critic2_target_ = clone_into_target(critic2_);
}

std::vector<double> Td3Agent::select_action(const std::vector<double>& state, bool explore,
                                            Rng& noise_rng) {
    std::vector<double> a = forward(actor_, state);
    if (explore) {
        const std::vector<double>& eps = ou_.step(noise_rng);
        for (std::size_t i = 0; i < a.size(); ++i)
            a[i] = clamp(a[i] + eps[i], action_lo_[i], action_hi_[i]);
    }
    return a;
}

std::vector<double> Td3Agent::random_warmup_action(const std::vector<double>& action_lo,
                                                   const std::vector<double>& action_hi,
                                                   Rng& rng) {
    std::vector<double> a(action_lo.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.uniform(action_lo[i], action_hi[i]);
    return a;
}

std::vector<double> Td3Agent::compute_targets(const std::vector<const Transition*>& batch,
                                              Rng& smoothing_rng) const {
    const std::size_t n = batch.size();
    const std::size_t act_w = action_lo_.size();

    Mat next_states(n, state_width_);
    for (std::size_t i = 0; i < n; ++i)
        std::copy(batch[i]->next_state.begin(), batch[i]->next_state.end(),
                  next_states.row(i));

    Mat next_actions = batch_forward(actor_target_, next_states);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = next_actions.row(i);
        for (std::size_t j = 0; j < act_w; ++j) {
            const double eps =
                clipped_gaussian(smoothing_rng, config_.policy_noise_std, config_.noise_clip);
            row[j] = clamp(row[j] + eps, action_lo_[j], action_hi_[j]);
        }
    }

    Mat critic_in(n, state_width_ + act_w);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(next_states.row(i), next_states.row(i) + state_width_, critic_in.row(i));
        std::copy(next_actions.row(i), next_actions.row(i) + act_w,
                  critic_in.row(i) + state_width_);
    }
    Mat q1 = batch_forward(critic1_target_, critic_in);
    Mat q2 = batch_forward(critic2_target_, critic_in);

    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double qmin = std::min(q1.at(i, 0), q2.at(i, 0));
        const double mask = batch[i]->done ? 0.0 : 1.0;
        targets[i] = batch[i]->reward + config_.gamma * mask * qmin;
    }
    return targets;
}

LossReport Td3Agent::train_step(const ReplayBuffer& buffer, Rng& sample_rng,
                                Rng& smoothing_rng) {
    if (buffer.size() == 0) throw std::runtime_error("train_step: replay buffer empty");

    const std::size_t n = config_.batch_size;
    const std::size_t act_w = action_lo_.size();
    const auto batch = buffer.sample(n, sample_rng);
    const std::vector<double> targets = compute_targets(batch, smoothing_rng);

    Mat states(n, state_width_);
    Mat critic_in(n, state_width_ + act_w);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(batch[i]->state.begin(), batch[i]->state.end(), states.row(i));
        std::copy(batch[i]->state.begin(), batch[i]->state.end(), critic_in.row(i));
        std::copy(batch[i]->action.begin(), batch[i]->action.end(),
                  critic_in.row(i) + state_width_);
    }

    LossReport report;
    auto update_critic = [&](DenseNet& critic, double& loss_out) {
        BatchCache cache;
        Mat q = batch_forward(critic, critic_in, &cache);
        double loss = 0.0;
        Mat ograd(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double err = q.at(i, 0) - targets[i];
            loss += err * err;
            ograd.at(i, 0) = 2.0 * err / static_cast<double>(n);
        }
        loss /= static_cast<double>(n);
        if (!std::isfinite(loss))
            throw std::runtime_error("train_step: non-finite critic loss");
        GradientSet grads = batch_backward(critic, cache, ograd);
        adam_step(critic, grads, config_.critic_lr, config_.adam_beta1, config_.adam_beta2,
                  config_.adam_eps);
        loss_out = loss;
    };
    update_critic(critic1_, report.critic1_loss);
    update_critic(critic2_, report.critic2_loss);
    critic_update_count_ += 1;

    if (critic_update_count_ % config_.eta == 0) {
        // Deterministic policy gradient through critic1 at a = pi(s).
        BatchCache actor_cache;
        Mat pi_actions = batch_forward(actor_, states, &actor_cache);
        Mat q_in(n, state_width_ + act_w);
        for (std::size_t i = 0; i < n; ++i) {
            std::copy(states.row(i), states.row(i) + state_width_, q_in.row(i));
            std::copy(pi_actions.row(i), pi_actions.row(i) + act_w,
                      q_in.row(i) + state_width_);
        }
        BatchCache critic_cache;
        Mat q = batch_forward(critic1_, q_in, &critic_cache);
        double actor_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) actor_loss -= q.at(i, 0);
        actor_loss /= static_cast<double>(n);
        if (!std::isfinite(actor_loss))
            throw std::runtime_error("train_step: non-finite actor loss");

        Mat ograd(n, 1);
        for (std::size_t i = 0; i < n; ++i) ograd.at(i, 0) = -1.0 / static_cast<double>(n);
        Mat dq_din;
        batch_backward(critic1_, critic_cache, ograd, &dq_din);  // critic grads discarded
        Mat dq_da(n, act_w);
        for (std::size_t i = 0; i < n; ++i)
            std::copy(dq_din.row(i) + state_width_, dq_din.row(i) + state_width_ + act_w,
                      dq_da.row(i));

        GradientSet actor_grads = batch_backward(actor_, actor_cache, dq_da);
        adam_step(actor_, actor_grads, config_.actor_lr, config_.adam_beta1,
                  config_.adam_beta2, config_.adam_eps);

        soft_update(actor_target_, actor_, config_.tau);
        soft_update(critic1_target_, critic1_, config_.tau);
        soft_update(critic2_target_, critic2_, config_.tau);
        actor_update_count_ += 1;
        report.actor_loss = actor_loss;
    }
    return report;
}

void Td3Agent::save_checkpoint(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, state_width_);
    write_dvec(out, action_lo_);
    write_dvec(out, action_hi_);
    // Config echo, fixed field order.
    write_f64(out, config_.gamma);
    write_f64(out, config_.tau);
    write_u64(out, config_.eta);
    write_f64(out, config_.policy_noise_std);
    write_f64(out, config_.noise_clip);
    write_u64(out, config_.batch_size);
    write_u64(out, config_.start_steps);
    write_f64(out, config_.actor_lr);
    write_f64(out, config_.critic_lr);
    write_f64(out, config_.ou_theta);
    write_f64(out, config_.ou_sigma);
    write_f64(out, config_.ou_mu);
    write_f64(out, config_.ou_dt);
    write_svec(out, config_.actor_hidden);
    write_svec(out, config_.critic_hidden);
    write_u64(out, config_.buffer_capacity);
    write_f64(out, config_.adam_beta1);
    write_f64(out, config_.adam_beta2);
    write_f64(out, config_.adam_eps);
    write_u64(out, critic_update_count_);
    write_u64(out, actor_update_count_);
    write_dvec(out, ou_.state());
    save_net(actor_, out);
    save_net(actor_target_, out);
    save_net(critic1_, out);
    save_net(critic2_, out);
    save_net(critic1_target_, out);
    save_net(critic2_target_, out);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Td3Agent Td3Agent::load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic/version tag (want td3-v1)");

    Td3Agent agent;
    agent.state_width_ = read_u64(in);
    agent.action_lo_ = read_dvec(in);
    agent.action_hi_ = read_dvec(in);
    Td3Config& c = agent.config_;
    c.gamma = read_f64(in);
    c.tau = read_f64(in);
    c.eta = read_u64(in);
    c.policy_noise_std = read_f64(in);
    c.noise_clip = read_f64(in);
    c.batch_size = read_u64(in);
    c.start_steps = read_u64(in);
    c.actor_lr = read_f64(in);
    c.critic_lr = read_f64(in);
    c.ou_theta = read_f64(in);
    c.ou_sigma = read_f64(in);
    c.ou_mu = read_f64(in);
    c.ou_dt = read_f64(in);
    c.actor_hidden = read_svec(in);
    c.critic_hidden = read_svec(in);
    c.buffer_capacity = read_u64(in);
    c.adam_beta1 = read_f64(in);
    c.adam_beta2 = read_f64(in);
    c.adam_eps = read_f64(in);
    c.validate();
    agent.critic_update_count_ = read_u64(in);
    agent.actor_update_count_ = read_u64(in);
    std::vector<double> ou_state = read_dvec(in);
    agent.ou_ = OuNoise(agent.action_lo_.size(), c.ou_theta, c.ou_sigma, c.ou_mu, c.ou_dt);
    if (ou_state.size() != agent.ou_.state().size())
        throw std::runtime_error("checkpoint corrupt: OU state width");
    agent.ou_.state() = ou_state;
    agent.actor_ = load_net(in);
    agent.actor_target_ = load_net(in);
    agent.critic1_ = load_net(in);
    agent.critic2_ = load_net(in);
    agent.critic1_target_ = load_net(in);
    agent.critic2_target_ = load_net(in);
    if (agent.actor_.input_width() != agent.state_width_)
        throw std::runtime_error("checkpoint corrupt: actor width mismatch");
    return agent;
}

}  // namespace dpu
