#include "rca/eval/latency.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

namespace rca::eval {

LatencyStats latency_from_samples(std::vector<double> samples_s) {
    if (samples_s.empty()) throw std::invalid_argument("latency: at least one case is required");
    LatencyStats out;
    for (double& s : samples_s) s = std::max(s, std::numeric_limits<double>::min());
    double sum = 0.0;
    for (double s : samples_s) sum += s;
    out.mean_s = sum / static_cast<double>(samples_s.size());
    for (double s : samples_s) out.variance_s2 += (s - out.mean_s) * (s - out.mean_s);
    out.variance_s2 /= static_cast<double>(samples_s.size());
    out.throughput_per_min = 60.0 / out.mean_s;
    out.samples_s = std::move(samples_s);
    return out;
}

LatencyStats measure_latency(const std::function<void(std::size_t)>& run_case, std::size_t cases) {
    if (cases == 0) throw std::invalid_argument("measure_latency: at least one case is required");
    std::vector<double> samples;
    samples.reserve(cases);
    for (std::size_t i = 0; i < cases; ++i) {
        const auto start = std::chrono::steady_clock::now();
        run_case(i);
        samples.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    return latency_from_samples(std::move(samples));
}

} // namespace rca::eval
