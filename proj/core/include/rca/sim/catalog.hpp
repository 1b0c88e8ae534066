#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

namespace rca::sim {

enum class EntityKind : std::uint8_t { host = 0, pod = 1, service = 2 };
inline constexpr std::size_t kEntityKindCount = 3;

enum class EdgeKind : std::uint8_t { deploy = 0, member = 1, call = 2, causal = 3 };
inline constexpr std::size_t kEdgeKindCount = 4;

std::string_view to_string(EntityKind kind);
std::string_view to_string(EdgeKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view text);
std::optional<EdgeKind> parse_edge_kind(std::string_view text);

struct MetricProfile {
    std::string_view name;
    double baseline;
    double noise_sd;
    double lower;
    double upper;
};

// Metrics emitted by every entity of a kind, in emission order.
std::span<const MetricProfile> metric_profiles(EntityKind kind);

struct MetricEffect {
    std::string_view metric;
    double gain; // added per unit of fault intensity
};

struct FaultProfile {
    EntityKind kind;
    std::string_view name;
    std::span<const MetricEffect> effects;
    // Metric whose value integrates intensity over time instead of tracking it.
    std::string_view cumulative_metric;
    std::string_view error_template;
    std::string_view repair;
};

// host: 6 classes, pod: 3 classes, service: 4 classes.
std::span<const FaultProfile> fault_catalog(EntityKind kind);
std::optional<std::size_t> fault_index(EntityKind kind, std::string_view fault);
const FaultProfile& fault_profile(EntityKind kind, std::string_view fault);
const FaultProfile* find_fault(std::string_view fault);

// Fault type an entity of `target` kind exhibits when a `source` fault
// propagates into it.
std::string_view downstream_fault(const FaultProfile& source, EntityKind target);

// The metric name annotated as the key feature of a fault.
std::string_view key_metric(const FaultProfile& fault);

} // namespace rca::sim
