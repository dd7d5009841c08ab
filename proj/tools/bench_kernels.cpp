// Compares the batched OpenMP forward/backward kernels against the
// single-sample serial reference on TD3-sized nets.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dpu/net.hpp"
#include "dpu/rng.hpp"
#include "dpu/serial_ref.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void bench_case(const char* label, const std::vector<std::size_t>& sizes,
                std::size_t batch, std::size_t reps) {
    dpu::Rng rng(42);
    dpu::DenseNet net = dpu::make_net(sizes, dpu::OutputActivation::kIdentity, rng);

    dpu::Mat x(batch, sizes.front());
    for (auto& v : x.data) v = rng.uniform(-1.0, 1.0);
    dpu::Mat og(batch, sizes.back());
    for (auto& v : og.data) v = rng.uniform(-1.0, 1.0);

    // Serial reference: one sample at a time, gradients accumulated.
    auto t0 = Clock::now();
    double serial_checksum = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        dpu::GradientSet acc = dpu::zero_gradients(net);
        for (std::size_t i = 0; i < batch; ++i) {
            std::vector<double> in(x.row(i), x.row(i) + x.cols);
            std::vector<double> g(og.row(i), og.row(i) + og.cols);
            dpu::GradientSet gs = dpu::serial_ref::backward(net, in, g);
            acc.add_scaled(gs, 1.0);
        }
        serial_checksum += acc.biases.back()[0];
    }
    const double serial_s = seconds_since(t0);

    // Batched OpenMP path.
    t0 = Clock::now();
    double batched_checksum = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        dpu::BatchCache cache;
        dpu::batch_forward(net, x, &cache);
        dpu::GradientSet gs = dpu::batch_backward(net, cache, og);
        batched_checksum += gs.biases.back()[0];
    }
    const double batched_s = seconds_since(t0);

    std::printf("%-20s batch=%zu reps=%zu serial=%.3fs batched=%.3fs speedup=%.2fx drift=%.3g\n",
                label, batch, reps, serial_s, batched_s, serial_s / batched_s,
                std::abs(serial_checksum - batched_checksum));
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP: disabled\n");
#endif
    bench_case("actor 14-64-64-2", {14, 64, 64, 2}, 100, 200);
    bench_case("critic 16-64-64-1", {16, 64, 64, 1}, 100, 200);
    bench_case("critic 16-256-256-1", {16, 256, 256, 1}, 100, 20);
    bench_case("aerial 26-256-256-3", {26, 256, 256, 3}, 100, 20);
    return 0;
}
