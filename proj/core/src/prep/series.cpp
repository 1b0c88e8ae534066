#include "rca/prep/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rca::prep {

std::vector<double> denoise(std::span<const double> series, int window) {
    if (series.empty()) throw std::invalid_argument("denoise: empty series");
    if (window < 1 || window % 2 == 0) throw std::invalid_argument("denoise: window must be odd and >= 1");
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    const std::ptrdiff_t half = window / 2;
    std::vector<double> out(series.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
        double s = 0.0;
        for (std::ptrdiff_t k = i - h; k <= i + h; ++k) s += series[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(i)] = s / static_cast<double>(2 * h + 1);
    }
    return out;
}

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_variance(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size());
}

double lag1_autocorrelation(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        den += (xs[i] - m) * (xs[i] - m);
        if (i > 0) num += (xs[i] - m) * (xs[i - 1] - m);
    }
    // Relative guard: rounding leaves a tiny positive variance on constants.
    if (den <= 1e-24 * static_cast<double>(xs.size()) * std::max(1.0, m * m)) return 0.0;
    return num / den;
}

std::vector<double> normalize_zscore(std::span<const double> series) {
    if (series.empty()) throw std::invalid_argument("normalize_zscore: empty series");
    const double m = mean(series);
    const double sd = std::sqrt(population_variance(series));
    std::vector<double> out(series.size(), 0.0);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) return out;
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - m) / sd;
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> segment_windows(std::size_t samples, double window_s,
                                                                 double stride_s, double tick_s) {
    if (!(tick_s > 0.0)) throw std::invalid_argument("segment_windows: tick must be positive");
    if (window_s < tick_s || stride_s < tick_s) {
        throw std::invalid_argument("segment_windows: window and stride must be at least one tick");
    }
    const auto width = static_cast<std::size_t>(std::llround(window_s / tick_s));
    const auto step = static_cast<std::size_t>(std::llround(stride_s / tick_s));
    if (width > samples) throw std::invalid_argument("segment_windows: window longer than series");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t start = 0; start + width <= samples; start += step) out.emplace_back(start, start + width);
    return out;
}

std::array<double, kMetricFeatureCount> derive_metric_features(std::span<const double> w, double tick_s,
                                                               std::optional<double> previous_mean) {
    if (w.empty()) throw std::invalid_argument("derive_metric_features: empty window");
    for (double x : w) {
        if (std::isnan(x)) throw std::invalid_argument("derive_metric_features: NaN in window");
    }
    const auto n = static_cast<double>(w.size());
    const double m = mean(w);
    const double var = population_variance(w);
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    const double duration = n * tick_s;

    // Least-squares slope against time in seconds.
    const double tbar = (n - 1.0) / 2.0 * tick_s;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double dt = static_cast<double>(i) * tick_s - tbar;
        sxy += dt * (w[i] - m);
        sxx += dt * dt;
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;

    const double sd = std::sqrt(var);
    double spikes = 0.0;
    double energy = 0.0;
    for (double x : w) {
        if (sd > 0.0 && x > m + 3.0 * sd) spikes += 1.0;
        energy += x * x;
    }
    energy /= n;

    double change = 0.0;
    if (previous_mean) change = (m - *previous_mean) / std::max(std::abs(*previous_mean), kChangeRateEpsilon);

    return {m, var, *lo, *hi, w.back(), (w.back() - w.front()) / duration, slope, *hi - *lo,
            lag1_autocorrelation(w), spikes, energy, change};
}

} // namespace rca::prep
