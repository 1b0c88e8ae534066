#include "rca/explain/importance.hpp"

#include "rca/common/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace rca::explain {

namespace {

bool is_telemetry(std::string_view label) { return label.rfind("causal_", 0) != 0; }

} // namespace

ImportanceEntry mask_importance(const graph::GatModel& model, const graph::HetGraph& graph, std::string_view entity,
                                const MaskOptions& options) {
    if (options.trials == 0) throw std::invalid_argument("mask_importance: trials must be positive");
    const auto v = graph.find(entity);
    if (!v) throw std::invalid_argument(fmt::format("mask_importance: entity '{}' is not in the graph", entity));
    const std::size_t dims = graph.feature_dim();
    const auto& original = graph.nodes[*v].features;

    graph::HetGraph work = graph;
    auto& x = work.nodes[*v].features;
    std::vector<double> total(dims, 0.0);
    Rng rng(derive_seed(options.seed, {fnv1a(entity)}));
    std::vector<char> context(dims);
    for (std::size_t t = 0; t < options.trials; ++t) {
        for (auto& c : context) c = rng.uniform() < options.context_fraction ? 1 : 0;
        for (std::size_t f = 0; f < dims; ++f) x[f] = context[f] ? 0.0 : original[f];
        const double base = graph::predict(model, work).probability[*v];
        for (std::size_t f = 0; f < dims; ++f) {
            if (context[f] || original[f] == 0.0) continue; // masking changes nothing
            x[f] = 0.0;
            total[f] += base - graph::predict(model, work).probability[*v];
            x[f] = original[f];
        }
    }

    ImportanceEntry out;
    out.entity = std::string(entity);
    const auto& labels = graph.nodes[*v].labels.size() == dims ? graph.nodes[*v].labels : graph.feature_names;
    for (std::size_t f = 0; f < dims; ++f) {
        out.scores.push_back({labels[f], std::max(0.0, total[f] / static_cast<double>(options.trials))});
    }
    std::stable_sort(out.scores.begin(), out.scores.end(), [](const FeatureScore& a, const FeatureScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.feature < b.feature;
    });
    return out;
}

ImportanceTable importance_table(const graph::GatModel& model, const graph::HetGraph& graph,
                                 const std::vector<std::string>& entities, const MaskOptions& options) {
    ImportanceTable table;
    for (const auto& e : entities) table.push_back(mask_importance(model, graph, e, options));
    return table;
}

std::vector<std::string> top_metrics(const ImportanceEntry& entry, std::size_t k) {
    std::vector<std::string> out;
    std::size_t taken = 0;
    for (const auto& s : entry.scores) {
        if (taken >= k) break;
        if (!is_telemetry(s.feature) || s.score <= 0.0) continue;
        ++taken;
        const auto dot = s.feature.find('.');
        std::string metric = s.feature.substr(0, dot);
        if (std::find(out.begin(), out.end(), metric) == out.end()) out.push_back(std::move(metric));
    }
    return out;
}

} // namespace rca::explain
