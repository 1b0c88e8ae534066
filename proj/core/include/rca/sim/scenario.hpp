#pragma once

#include "rca/sim/topology.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rca::sim {

struct PropagationRule {
    std::string source;
    std::string target;
    double lag_s = 0.0;
    std::string effect; // fault type the target exhibits
    double gain = 1.0;  // target intensity = gain * source intensity(t - lag)
};

// A benign, non-propagating anomaly on one entity. Not part of the ground
// truth; used to build suites where anomaly magnitude alone does not
// identify the incident.
struct Disturbance {
    std::string entity;
    std::string fault_type;
    double start_s = 0.0;
    double magnitude = 1.0;
};

struct FaultScenario {
    std::string template_name;
    std::string root; // empty for the nominal template
    std::string fault_type;
    double injection_s = 0.0;
    double magnitude = 1.0;
    std::vector<PropagationRule> rules;
    std::vector<Disturbance> disturbances;
    std::uint64_t seed = 0;

    bool nominal() const noexcept { return root.empty(); }
    // Onset time of every faulty entity, root first.
    std::map<std::string, double> onsets() const;
};

struct ChainLink {
    double time_s = 0.0;
    std::string source;
    std::string target;
};

struct GroundTruth {
    std::string root;
    std::vector<std::string> faulty;
    std::map<std::string, std::string> fault_types;
    std::map<std::string, std::vector<std::string>> key_features;
    std::vector<ChainLink> chain;

    bool empty() const noexcept { return faulty.empty(); }
};

struct ScenarioOptions {
    std::optional<std::string> root;
    double injection_s = 300.0;
    int lag_min_s = 5;
    int lag_max_s = 15;
    double gain_min = 0.6;
    double gain_max = 0.9;
    std::size_t decoys = 0;
};

struct GeneratedScenario {
    FaultScenario scenario;
    GroundTruth truth;
};

// Template names: "nominal" and "<kind>-<fault>", e.g. "host-memory-leak".
std::vector<std::string> scenario_templates();

GeneratedScenario generate_scenario(const Topology& topology, std::string_view template_name,
                                    std::uint64_t seed, const ScenarioOptions& options = {});

// Canonical plain-text form (also the on-disk scenario file).
std::string format_scenario(const FaultScenario& scenario);
FaultScenario parse_scenario(std::string_view text);

} // namespace rca::sim
