#pragma once

#include "rca/graph/gat.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rca::explain {

struct FeatureScore {
    std::string feature; // display label, e.g. "mem_usage.slope"
    double score = 0.0;
};

struct ImportanceEntry {
    std::string entity;
    std::vector<FeatureScore> scores; // descending, ties by label
};

using ImportanceTable = std::vector<ImportanceEntry>;

struct MaskOptions {
    std::size_t trials = 32;
    double context_fraction = 0.2; // chance that each other feature is masked in a trial
    std::uint64_t seed = 1;
};

// Random combination masking on the entity's own inputs with the model
// frozen. Each trial draws a context set S of other features; feature f
// scores p(S masked) - p(S and f masked). Zero-masking is the neutral value
// for fused z-scored features. Negative means are clamped to 0.
ImportanceEntry mask_importance(const graph::GatModel& model, const graph::HetGraph& graph, std::string_view entity,
                                const MaskOptions& options = {});

ImportanceTable importance_table(const graph::GatModel& model, const graph::HetGraph& graph,
                                 const std::vector<std::string>& entities, const MaskOptions& options = {});

// Metric names behind the k highest-scoring telemetry features ("mem_usage"
// for "mem_usage.slope"), in score order without repeats (so possibly fewer
// than k). Causal summary
// inputs are not telemetry and are skipped.
std::vector<std::string> top_metrics(const ImportanceEntry& entry, std::size_t k);

} // namespace rca::explain
