#pragma once

#include "rca/causal/types.hpp"

#include <cstdint>

namespace rca::causal {

struct FilterOptions {
    double threshold = 0.3;
    int bins = 8;
    double significance = 0.01; // nats of CMI in excess of the permutation null
    std::size_t permutations = 20;
    std::size_t lag = 1; // windows between cause and effect in the CMI test
    std::uint64_t seed = 1;
};

// Stage 1 keeps pairs whose time-mean strength exceeds the threshold
// (strictly), dropping self-pairs and keeping the strongest duplicate.
// Stage 2 looks at every target j with two retained parents i and k that are
// themselves linked (k is a common parent of i and j, or a mediator between
// them). The parent whose excess CMI with j given the other parent is
// smaller is removed when that excess is below the significance cutoff.
CausalEdgeSet filter_causal(const CausalTensor& tensor, const FilterOptions& options = {});

} // namespace rca::causal
