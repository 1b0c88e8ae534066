#pragma once

#include "rca/sim/scenario.hpp"
#include "rca/sim/telemetry.hpp"

#include <filesystem>
#include <string>

namespace rca::sim {

// File names inside a telemetry directory.
inline constexpr const char* kMetricsFile = "metrics.jsonl";
inline constexpr const char* kLogsFile = "logs.jsonl";
inline constexpr const char* kSpansFile = "spans.jsonl";
inline constexpr const char* kGroundTruthFile = "ground_truth.jsonl";
inline constexpr const char* kRunInfoFile = "run.txt";

std::string metrics_to_jsonl(const TelemetryBundle& bundle);
std::string logs_to_jsonl(const TelemetryBundle& bundle);
std::string spans_to_jsonl(const TelemetryBundle& bundle);
std::string ground_truth_to_jsonl(const GroundTruth& truth);

// Writes the three telemetry files plus run.txt (duration, tick, sampling).
void write_bundle(const std::filesystem::path& dir, const TelemetryBundle& bundle);

// Parse errors name the file, line and field. When run.txt is absent the
// duration is taken from the last metric timestamp plus one tick.
TelemetryBundle read_bundle(const std::filesystem::path& dir);

void write_ground_truth(const std::filesystem::path& file, const GroundTruth& truth);
GroundTruth read_ground_truth(const std::filesystem::path& file);

} // namespace rca::sim
