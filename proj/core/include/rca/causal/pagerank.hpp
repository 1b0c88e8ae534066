#pragma once

#include "rca/causal/types.hpp"

#include <string>
#include <vector>

namespace rca::causal {

struct RankedEntity {
    std::string id;
    double score = 0.0;
};

struct PageRankOptions {
    double damping = 0.85;
    double tolerance = 1e-9;
    std::size_t max_iterations = 10000;
    double half_life_fraction = 1.0 / 3.0; // of the analysis horizon, in steps
};

// Recency-weighted mean of a per-step profile: weights halve every
// `half_life` steps counted back from the last step. Negative values count 0.
double recency_weight(const std::vector<double>& profile, double half_life);

// Weighted PageRank over `entities` with every causal edge reversed, so that
// causes collect score from their effects. Dangling mass is spread uniformly.
// Sorted by score, ties broken by id.
std::vector<RankedEntity> pagerank_rank(const CausalEdgeSet& edges, const std::vector<std::string>& entities,
                                        const PageRankOptions& options = {});

// Plain weighted power iteration on an explicit graph (w(i,j) = weight of
// link i -> j); exposed for tests.
std::vector<double> pagerank_scores(const Eigen::MatrixXd& weights, double damping, double tolerance,
                                    std::size_t max_iterations);

} // namespace rca::causal
