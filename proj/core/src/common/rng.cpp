#include "rca/common/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rca {

namespace {
__extension__ typedef unsigned __int128 u128;
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("Rng::index: empty range");
    }
    // Lemire's nearly-divisionless bounded integer.
    const auto range = static_cast<std::uint64_t>(n);
    u128 m = static_cast<u128>(engine_()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
        const std::uint64_t threshold = (0 - range) % range;
        while (low < threshold) {
            m = static_cast<u128>(engine_()) * range;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

double Rng::normal() {
    if (spare_) {
        const double value = *spare_;
        spare_.reset();
        return value;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

double Rng::truncated_normal(double limit) {
    for (;;) {
        const double x = normal();
        if (std::abs(x) <= limit) {
            return x;
        }
    }
}

double Rng::exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
}

std::uint64_t Rng::poisson(double lambda) {
    if (lambda <= 0.0) {
        return 0;
    }
    if (lambda > 30.0) {
        const double draw = std::round(normal(lambda, std::sqrt(lambda)));
        return draw < 0.0 ? 0 : static_cast<std::uint64_t>(draw);
    }
    // Knuth's multiplication method.
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double product = uniform();
    while (product > limit) {
        ++k;
        product *= uniform();
    }
    return k;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = mix64(base);
    for (const auto part : parts) {
        h = mix64(h ^ mix64(part + 0x632be59bd9b4e019ULL));
    }
    return h;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace rca
