#pragma once

#include "rca/sim/scenario.hpp"
#include "rca/sim/topology.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rca::sim {

struct MetricPoint {
    double timestamp_s = 0.0;
    std::string entity;
    std::string metric;
    double value = 0.0;
};

enum class LogLevel : std::uint8_t { info, warn, error };
std::string_view to_string(LogLevel level);
std::optional<LogLevel> parse_log_level(std::string_view text);

struct LogLine {
    std::int64_t timestamp_ms = 0;
    std::string entity;
    LogLevel level = LogLevel::info;
    std::string message;
};

struct Span {
    std::string trace_id;
    std::string span_id;
    std::optional<std::string> parent_span_id; // empty for the root span
    std::string service;
    std::int64_t start_ms = 0;
    double duration_ms = 0.0;
    int status = 200;
};

struct TelemetryBundle {
    double duration_s = 0.0;
    double tick_s = 1.0;
    double sampling_rate = 1.0;
    std::vector<MetricPoint> metrics;
    std::vector<LogLine> logs;
    std::vector<Span> spans;
};

struct SimulationOptions {
    double noise_scale = 1.0;   // 0 yields the noise-free generative signal
    double trace_rate = 2.0;    // traces per second per entry service
    double sampling_rate = 1.0; // fraction of traces kept
    double timeout_ms = 500.0;
};

TelemetryBundle simulate_telemetry(const Topology& topology, const FaultScenario& scenario, double duration_s,
                                   double tick_s, std::uint64_t seed, const SimulationOptions& options = {});

// Checks the bundle invariants; throws InputError naming the first violation.
void validate_bundle(const TelemetryBundle& bundle);

} // namespace rca::sim
