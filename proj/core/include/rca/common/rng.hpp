#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <string_view>

namespace rca {

// Seeded random source. Every distribution is implemented here on top of
// std::mt19937_64 (whose output sequence is fixed by the standard) so that
// simulations and perturbation draws are byte-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n);

    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Standard normal resampled until |x| <= limit.
    double truncated_normal(double limit);

    double exponential(double rate);
    std::uint64_t poisson(double lambda);

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

} // namespace rca
