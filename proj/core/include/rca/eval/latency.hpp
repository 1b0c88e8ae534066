#pragma once

#include <functional>
#include <vector>

namespace rca::eval {

struct LatencyStats {
    std::vector<double> samples_s;
    double mean_s = 0.0;
    double variance_s2 = 0.0; // population variance of the samples
    double throughput_per_min = 0.0; // 60 / mean, serial execution
};

// Wall-clock timing of run_case(i) for i in [0, cases).
LatencyStats measure_latency(const std::function<void(std::size_t)>& run_case, std::size_t cases);

LatencyStats latency_from_samples(std::vector<double> samples_s);

} // namespace rca::eval
