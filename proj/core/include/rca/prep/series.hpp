#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace rca::prep {

// Centered moving average; the window shrinks symmetrically at the edges.
std::vector<double> denoise(std::span<const double> series, int window = 3);

// Population z-score. Constant input maps to all zeros.
std::vector<double> normalize_zscore(std::span<const double> series);

// Half-open sample ranges [start, end) of full windows; partial tail dropped.
std::vector<std::pair<std::size_t, std::size_t>> segment_windows(std::size_t samples, double window_s,
                                                                 double stride_s, double tick_s);

inline constexpr std::size_t kMetricFeatureCount = 12;
inline constexpr std::array<std::string_view, kMetricFeatureCount> kMetricFeatureNames{
    "mean", "variance", "min", "max", "last", "growth_rate",
    "slope", "range", "autocorr1", "spike_count", "energy", "change_rate"};

inline constexpr double kChangeRateEpsilon = 1e-8;

// Derived features of one window sampled at `tick_s`. `previous_mean` is the
// mean of the preceding window of the same series (change rate is 0 without
// it). Growth rate divides by the window duration, n * tick_s.
std::array<double, kMetricFeatureCount> derive_metric_features(std::span<const double> window, double tick_s,
                                                               std::optional<double> previous_mean = std::nullopt);

double mean(std::span<const double> xs);
double population_variance(std::span<const double> xs);
double lag1_autocorrelation(std::span<const double> xs);

} // namespace rca::prep
