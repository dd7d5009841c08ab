#pragma once

#include <cmath>
#include <vector>

#include "dpu/rng.hpp"

namespace dpu {

// Ornstein-Uhlenbeck process used as temporally correlated exploration
// noise: x += theta*(mu - x)*dt + sigma*sqrt(dt)*N(0,1).
class OuNoise {
public:
    OuNoise(std::size_t dim, double theta, double sigma, double mu = 0.0, double dt = 1.0)
        : theta_(theta), sigma_(sigma), mu_(mu), dt_(dt), state_(dim, mu) {}

    const std::vector<double>& step(Rng& rng) {
        const double sq = std::sqrt(dt_);
        for (auto& x : state_)
            x += theta_ * (mu_ - x) * dt_ + sigma_ * sq * rng.normal();
        return state_;
    }

    void reset() { std::fill(state_.begin(), state_.end(), mu_); }

    const std::vector<double>& state() const { return state_; }
    std::vector<double>& state() { return state_; }

private:
    double theta_, sigma_, mu_, dt_;
    std::vector<double> state_;
};

}  // namespace dpu
