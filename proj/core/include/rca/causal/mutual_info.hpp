#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rca::causal {

// Rank-based equal-frequency binning; ties share the bin of their first rank.
std::vector<int> equal_frequency_bins(std::span<const double> xs, int bins);

// Plug-in estimates in nats over discrete codes in [0, bins).
double mutual_information(const std::vector<int>& x, const std::vector<int>& y, int bins);
double conditional_mutual_information(const std::vector<int>& x, const std::vector<int>& y,
                                      const std::vector<int>& z, int bins);

inline constexpr double kNullQuantile = 0.95;

// CMI(x; y | z) minus the 95th percentile of its permutation null (x shuffled
// within z bins). Absorbs the plug-in estimator's small-sample bias and its
// spread, so a conditionally independent x lands below 0 most of the time.
double cmi_excess(const std::vector<int>& x, const std::vector<int>& y, const std::vector<int>& z, int bins,
                  std::size_t permutations, std::uint64_t seed);

} // namespace rca::causal
