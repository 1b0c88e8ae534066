#pragma once

#include "rca/prep/tensor.hpp"
#include "rca/sim/telemetry.hpp"

#include <cstdint>
#include <vector>

namespace rca::prep {

struct TraceEncoding {
    FeatureBlock block;                // mean latency, p95 latency, error ratio, max depth, mean child count
    std::vector<std::uint8_t> interpolated; // windows x entities
    std::size_t orphans = 0;
    AlignStats stats;
};

// Span depth counts from the trace root (root = 1). Status >= 400 is an error.
// Spans whose parent cannot be resolved inside their trace are counted as
// orphans and skipped. Below `interpolation_threshold` sampling, an empty
// (window, service) cell takes the statistics of the same service's spans in
// the neighbouring windows and is flagged.
TraceEncoding build_trace_features(const std::vector<sim::Span>& spans, double origin_s, double window_s,
                                   std::size_t windows, const std::vector<std::string>& entities,
                                   double sampling_rate, double interpolation_threshold = 0.05);

} // namespace rca::prep
