#pragma once

#include "rca/prep/drain.hpp"
#include "rca/sim/telemetry.hpp"
#include "rca/sim/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rca::prep {

// Window x entity x feature values of one modality.
struct FeatureBlock {
    std::size_t windows = 0;
    std::vector<std::string> entities;
    std::vector<std::string> features;
    std::vector<double> values;

    FeatureBlock() = default;
    FeatureBlock(std::size_t t, std::vector<std::string> ents, std::vector<std::string> feats)
        : windows(t), entities(std::move(ents)), features(std::move(feats)),
          values(windows * entities.size() * features.size(), 0.0) {}

    double& at(std::size_t t, std::size_t e, std::size_t f) {
        return values[(t * entities.size() + e) * features.size() + f];
    }
    double at(std::size_t t, std::size_t e, std::size_t f) const {
        return values[(t * entities.size() + e) * features.size() + f];
    }
};

struct FeatureTensor {
    std::size_t windows = 0;
    double window_s = 5.0;
    double origin_s = 0.0;
    std::vector<std::string> entities;
    std::vector<sim::EntityKind> kinds;
    std::vector<std::string> features;
    std::size_t metric_end = 0; // metric block = [0, metric_end)
    std::size_t log_end = 0;    // log block = [metric_end, log_end), trace block = [log_end, F)
    std::vector<double> values;
    // Metric name bound to each metric slot, per entity ("" for padding).
    std::vector<std::vector<std::string>> metric_slots;
    std::vector<std::string> log_templates; // patterns behind the top-K log columns

    std::size_t feature_count() const noexcept { return features.size(); }
    double& at(std::size_t t, std::size_t e, std::size_t f) { return values[(t * entities.size() + e) * features.size() + f]; }
    double at(std::size_t t, std::size_t e, std::size_t f) const {
        return values[(t * entities.size() + e) * features.size() + f];
    }
    std::optional<std::size_t> entity_index(std::string_view id) const;
    std::optional<std::size_t> feature_index(std::string_view name) const;
    // Human-readable feature name for one entity, e.g. "mem_usage.slope".
    std::string display_name(std::size_t entity, std::size_t feature) const;
};

inline constexpr std::size_t kMetricSlots = 6;
inline constexpr std::size_t kTraceFeatureCount = 5;

struct AlignStats {
    std::size_t ingested = 0;
    std::size_t kept = 0;
    std::size_t dropped = 0;
};

// floor((t - origin) / window) when inside [origin, origin + windows*window).
std::optional<std::size_t> window_of(double t, double origin, double window, std::size_t windows);

// Concatenates the three blocks along the feature axis. All blocks must share
// the window count and the entity list (same ids, same order).
FeatureTensor align_tensor(const FeatureBlock& metric, const FeatureBlock& log, const FeatureBlock& trace,
                           double window_s, double origin_s);

struct PrepConfig {
    double window_s = 5.0;
    int denoise_window = 3;
    std::size_t log_top_k = 8;
    double drain_similarity = 0.5;
    std::size_t drain_depth = 4;
    double interpolation_sampling_threshold = 0.05;
};

struct Preprocessed {
    FeatureTensor tensor;
    LogTemplateTable log_table;
    AlignStats metrics;
    AlignStats logs;
    AlignStats spans;
    std::size_t orphan_spans = 0;
    std::size_t interpolated_cells = 0;
};

Preprocessed preprocess(const sim::TelemetryBundle& bundle, const std::vector<sim::Entity>& universe,
                        const PrepConfig& config = {});

// tensor.bin (little-endian header + float64 values) and schema.txt.
void write_tensor(const std::filesystem::path& dir, const FeatureTensor& tensor);
FeatureTensor read_tensor(const std::filesystem::path& dir);

} // namespace rca::prep
