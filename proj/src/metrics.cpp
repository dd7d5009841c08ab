#include "dpu/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace dpu {

MetricsReport aggregate(const std::vector<EpisodeRecord>& records) {
    MetricsReport r;
    r.episodes = records.size();
    if (records.empty()) return r;
    const double n = static_cast<double>(records.size());

    std::size_t arrivals = 0;
    double er_sum = 0.0, et_sum = 0.0;
    for (const auto& e : records) {
        if (e.outcome == Outcome::kArrive) ++arrivals;
        er_sum += e.total_reward;
        et_sum += e.time_s;
    }
    r.success_rate = 100.0 * static_cast<double>(arrivals) / n;
    r.er_mean = er_sum / n;
    r.et_mean = et_sum / n;

    double er_var = 0.0, et_var = 0.0;
    for (const auto& e : records) {
        er_var += (e.total_reward - r.er_mean) * (e.total_reward - r.er_mean);
        et_var += (e.time_s - r.et_mean) * (e.time_s - r.et_mean);
    }
    r.er_std = std::sqrt(er_var / n);
    r.et_std = std::sqrt(et_var / n);
    return r;
}

std::vector<double> moving_average(const std::vector<double>& series, std::size_t window) {
    if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
    std::vector<double> out;
    out.reserve(series.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        acc += series[i];
        if (i >= window) acc -= series[i - window];
        const std::size_t span = std::min(i + 1, window);
        out.push_back(acc / static_cast<double>(span));
    }
    return out;
}

}  // namespace dpu
