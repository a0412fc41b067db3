#pragma once

#include <cstdint>
#include <random>

namespace ispest {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based seed split: the seed of stream `index` under `master`.
///
/// split(m, i) = splitmix64(splitmix64(m) ^ splitmix64(i + 0x9E3779B97F4A7C15)).
/// Distinct indices give distinct seeds for a fixed master (both maps are
/// bijections), so replication streams never collide.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seeded generator owned by a single worker.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0,1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }
    /// Uniform on (0,1].
    double uniform_pos() noexcept { return 1.0 - uniform(); }
    double exponential() noexcept;
    double normal() noexcept;
    std::uint64_t poisson(double mean);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ispest
