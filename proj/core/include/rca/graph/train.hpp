#pragma once

#include "rca/graph/gat.hpp"

#include <cstdint>
#include <vector>

namespace rca::graph {

struct LabeledGraph {
    HetGraph graph;
    NodeLabels labels;
};

struct TrainOptions {
    std::size_t epochs = 1000;
    double learning_rate = 0.1;
    std::size_t patience = 10;
    double validation_fraction = 0.2; // held out from the end of a seeded shuffle
    std::uint64_t seed = 7;
};

struct TrainResult {
    GatModel model; // parameters of the best validation epoch
    std::vector<double> loss_history;
    std::vector<double> validation_history;
    std::size_t best_epoch = 0;
    bool stopped_early = false;
};

// Full-batch gradient descent with a fixed step on the mean per-graph loss.
// Stops once the validation loss has not improved for `patience` epochs
// (training loss stands in when nothing is held out).
TrainResult train_gat(GatModel model, const std::vector<LabeledGraph>& graphs, const TrainOptions& options = {});

} // namespace rca::graph
