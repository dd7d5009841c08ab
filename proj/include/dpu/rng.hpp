#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dpu {

// Seeded RNG with named-stream derivation: one master seed spawns
// independent streams ("env", "agent-noise", ...) so changing how one
// stream is consumed does not perturb the others.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static std::uint64_t derive_stream(std::uint64_t master, std::string_view name) {
        std::uint64_t h = master ^ 0x9e3779b97f4a7c15ULL;
        for (char c : name) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 0xff51afd7ed558ccdULL;
            h ^= h >> 33;
        }
        return splitmix(h);
    }

    static Rng stream(std::uint64_t master, std::string_view name) {
        return Rng(derive_stream(master, name));
    }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        // One-shot construction keeps the distribution stateless across calls.
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace dpu
