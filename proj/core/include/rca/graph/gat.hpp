#pragma once

#include "rca/graph/hetgraph.hpp"
#include "rca/sim/scenario.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rca::graph {

struct GatShape {
    std::size_t input_dim = 0;
    std::size_t hidden = 16;
    std::size_t heads = 2;
    std::size_t layers = 2;
    // Off: no type embedding and no type/relation logits (plain GAT).
    bool type_aware = true;
};

// Classes per entity kind, from the fault catalog (host 6, pod 3, service 4).
std::array<std::size_t, sim::kEntityKindCount> class_counts();

struct GatModel {
    GatShape shape;
    std::vector<double> params;
    std::vector<std::string> feature_names; // input schema the model was trained on
};

std::size_t gat_parameter_count(const GatShape& shape);

// Glorot-uniform weights; type embedding, type and relation logits start at 0.
GatModel init_gat(const GatShape& shape, std::uint64_t seed);

// Additive logit offsets inside the attention score; exp(offset) multiplies
// the unnormalized attention of neighbors of that type / over that relation.
double& type_logit(GatModel& model, std::size_t layer, std::size_t head, sim::EntityKind kind);
double& relation_logit(GatModel& model, std::size_t layer, std::size_t head, sim::EdgeKind kind);

struct AttentionEntry {
    std::size_t neighbor = 0;
    int relation = -1; // EdgeKind, or -1 for the automatic self-loop
    double weight = 1.0;
    double alpha = 0.0;
};

struct GatOutput {
    // Final-layer embeddings (heads concatenated), one row per node.
    std::vector<std::vector<double>> embeddings;
    // attention[layer][head][node] lists that node's neighborhood.
    std::vector<std::vector<std::vector<std::vector<AttentionEntry>>>> attention;
};

// Neighborhood of v = every node sharing an edge with v (either direction,
// one entry per edge). Isolated nodes attend to themselves.
GatOutput attention_forward(const GatModel& model, const HetGraph& graph);

struct Prediction {
    std::vector<std::string> ids;
    std::vector<sim::EntityKind> kinds;
    std::vector<double> probability;
    std::vector<std::vector<double>> types; // distribution over the kind's catalog

    bool flagged(std::size_t i) const { return probability[i] > 0.5; }
    std::vector<std::string> flagged_ids() const;
    std::string type_of(std::size_t i) const; // argmax of the type distribution
};

Prediction predict(const GatModel& model, const HetGraph& graph);

struct NodeLabels {
    std::vector<int> faulty;     // 0/1 per node
    std::vector<int> fault_type; // catalog index for faulty nodes, else -1
};

NodeLabels labels_from_truth(const HetGraph& graph, const sim::GroundTruth& truth);

// BCE over all nodes / N + CE of the type head over faulty nodes / N_faulty.
// Adds d loss / d params into `grad` when given (sized like params).
double gat_loss(const GatModel& model, const HetGraph& graph, const NodeLabels& labels,
                std::vector<double>* grad = nullptr);

} // namespace rca::graph
