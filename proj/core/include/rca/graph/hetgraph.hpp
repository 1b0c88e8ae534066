#pragma once

#include "rca/causal/pagerank.hpp"
#include "rca/causal/types.hpp"
#include "rca/prep/fusion.hpp"
#include "rca/sim/topology.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rca::graph {

struct HetNode {
    std::string id;
    sim::EntityKind kind = sim::EntityKind::host;
    std::vector<double> features;
    std::vector<std::string> labels; // per-feature display names, e.g. "mem_usage.slope"
};

struct HetEdge {
    std::size_t source = 0;
    std::size_t target = 0;
    sim::EdgeKind kind = sim::EdgeKind::causal;
    double weight = 1.0;
};

struct HetGraph {
    std::vector<HetNode> nodes;
    std::vector<HetEdge> edges;
    std::vector<std::string> feature_names;

    std::size_t feature_dim() const noexcept { return feature_names.size(); }
    std::optional<std::size_t> find(std::string_view id) const;
};

// Node inputs aligned with topology.entities().
struct NodeFeatures {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::string>> labels;
};

// Structural edges get their association degree as weight; duplicate causal
// edges collapse to the strongest, with strength clamped into [0,1].
HetGraph build_hetgraph(const sim::Topology& topology, const NodeFeatures& features,
                        const causal::CausalEdgeSet& edges);

inline constexpr std::size_t kCausalSummaryFeatures = 3;

// Time-mean of the fused features over the analysis horizon (the later half
// of the windows, where an incident is established), followed by causal
// out-strength, in-strength and |V| * PageRank score.
NodeFeatures node_inputs(const prep::FeatureTensor& tensor, const prep::FusedFeatures& fused,
                         const sim::Topology& topology, const causal::CausalEdgeSet& edges,
                         const std::vector<causal::RankedEntity>& ranking);

std::string graph_to_jsonl(const HetGraph& graph);
HetGraph graph_from_jsonl(std::string_view text);

} // namespace rca::graph
