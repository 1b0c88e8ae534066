#pragma once

#include "rca/causal/pagerank.hpp"
#include "rca/causal/types.hpp"

#include <string>
#include <vector>

namespace rca::explain {

struct ChainLink {
    double time_s = 0.0;
    std::string source;
    std::string target;
    double strength = 0.0;
};

struct CausalChain {
    std::string root;
    std::vector<ChainLink> links;    // times nondecreasing
    std::vector<std::string> unreachable; // flagged entities the tree does not reach
    bool warning = false;             // no retained edge touched the root
};

// Greedy maximum-strength tree grown from the top-ranked entity over the
// retained causal edges (always taking the strongest edge that reaches a new
// entity), with leaves that are not flagged pruned repeatedly. A link's time
// is its edge onset, raised to its parent link's time so the order along
// every path is causal; links are listed by (time, depth, source, target).
CausalChain build_causal_chain(const causal::CausalEdgeSet& edges, const std::vector<causal::RankedEntity>& ranked,
                               const std::vector<std::string>& flagged);

} // namespace rca::explain
