#include "rca/causal/mutual_info.hpp"

#include "rca/common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rca::causal {

std::vector<int> equal_frequency_bins(std::span<const double> xs, int bins) {
    if (bins < 1) throw std::invalid_argument("equal_frequency_bins: bins must be >= 1");
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<int> out(n, 0);
    std::size_t r = 0;
    while (r < n) {
        std::size_t end = r;
        while (end < n && xs[order[end]] == xs[order[r]]) ++end;
        const int bin = static_cast<int>((r * static_cast<std::size_t>(bins)) / n);
        for (std::size_t k = r; k < end; ++k) out[order[k]] = bin;
        r = end;
    }
    return out;
}

double mutual_information(const std::vector<int>& x, const std::vector<int>& y, int bins) {
    const std::vector<int> z(x.size(), 0);
    return conditional_mutual_information(x, y, z, bins);
}

double conditional_mutual_information(const std::vector<int>& x, const std::vector<int>& y,
                                      const std::vector<int>& z, int bins) {
    if (x.size() != y.size() || x.size() != z.size()) throw std::invalid_argument("CMI: length mismatch");
    if (x.empty()) return 0.0;
    const auto b = static_cast<std::size_t>(bins);
    std::vector<double> xyz(b * b * b, 0.0);
    std::vector<double> xz(b * b, 0.0);
    std::vector<double> yz(b * b, 0.0);
    std::vector<double> zc(b, 0.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
        const auto xi = static_cast<std::size_t>(x[t]);
        const auto yi = static_cast<std::size_t>(y[t]);
        const auto zi = static_cast<std::size_t>(z[t]);
        xyz[(xi * b + yi) * b + zi] += 1.0;
        xz[xi * b + zi] += 1.0;
        yz[yi * b + zi] += 1.0;
        zc[zi] += 1.0;
    }
    const auto n = static_cast<double>(x.size());
    double cmi = 0.0;
    for (std::size_t xi = 0; xi < b; ++xi) {
        for (std::size_t yi = 0; yi < b; ++yi) {
            for (std::size_t zi = 0; zi < b; ++zi) {
                const double c = xyz[(xi * b + yi) * b + zi];
                if (c == 0.0) continue;
                cmi += c / n * std::log(c * zc[zi] / (xz[xi * b + zi] * yz[yi * b + zi]));
            }
        }
    }
    return std::max(0.0, cmi);
}

double cmi_excess(const std::vector<int>& x, const std::vector<int>& y, const std::vector<int>& z, int bins,
                  std::size_t permutations, std::uint64_t seed) {
    const double observed = conditional_mutual_information(x, y, z, bins);
    if (permutations == 0) return observed;
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(bins));
    for (std::size_t t = 0; t < z.size(); ++t) members[static_cast<std::size_t>(z[t])].push_back(t);
    Rng rng(seed);
    std::vector<int> shuffled = x;
    std::vector<double> null(permutations);
    for (std::size_t r = 0; r < permutations; ++r) {
        for (const auto& idx : members) {
            for (std::size_t i = idx.size(); i > 1; --i) {
                const std::size_t j = rng.index(i);
                std::swap(shuffled[idx[i - 1]], shuffled[idx[j]]);
            }
        }
        null[r] = conditional_mutual_information(shuffled, y, z, bins);
    }
    const auto q = static_cast<std::size_t>(std::ceil(kNullQuantile * static_cast<double>(permutations))) - 1;
    std::nth_element(null.begin(), null.begin() + static_cast<std::ptrdiff_t>(q), null.end());
    return observed - null[q];
}

} // namespace rca::causal
