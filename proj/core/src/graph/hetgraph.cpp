#include "rca/graph/hetgraph.hpp"

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <map>
#include <stdexcept>

namespace rca::graph {

using nlohmann::json;

std::optional<std::size_t> HetGraph::find(std::string_view id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return i;
    }
    return std::nullopt;
}

HetGraph build_hetgraph(const sim::Topology& topology, const NodeFeatures& features,
                        const causal::CausalEdgeSet& edges) {
    const auto& entities = topology.entities();
    if (features.values.size() != entities.size()) {
        throw std::invalid_argument("build_hetgraph: one feature vector per topology entity required");
    }
    HetGraph g;
    g.feature_names = features.names;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (features.values[i].size() != features.names.size()) {
            throw std::invalid_argument(fmt::format("build_hetgraph: feature width mismatch for {}", entities[i].id));
        }
        HetNode n;
        n.id = entities[i].id;
        n.kind = entities[i].kind;
        n.features = features.values[i];
        n.labels = i < features.labels.size() ? features.labels[i] : features.names;
        g.nodes.push_back(std::move(n));
    }
    for (const auto& e : topology.edges()) {
        g.edges.push_back({topology.index(e.source), topology.index(e.target), e.kind,
                           topology.relation(e.source, e.target)});
    }
    std::map<std::pair<std::size_t, std::size_t>, double> causal;
    for (const auto& e : edges.edges) {
        const auto s = topology.find(e.source);
        const auto t = topology.find(e.target);
        if (!s || !t) {
            throw InputError(fmt::format("causal edge {} -> {} names an unknown entity", e.source, e.target));
        }
        if (*s == *t) continue;
        const double w = std::clamp(e.strength, 0.0, 1.0);
        auto [it, fresh] = causal.emplace(std::pair{*s, *t}, w);
        if (!fresh) it->second = std::max(it->second, w);
    }
    for (const auto& [key, w] : causal) g.edges.push_back({key.first, key.second, sim::EdgeKind::causal, w});
    return g;
}

NodeFeatures node_inputs(const prep::FeatureTensor& tensor, const prep::FusedFeatures& fused,
                         const sim::Topology& topology, const causal::CausalEdgeSet& edges,
                         const std::vector<causal::RankedEntity>& ranking) {
    const std::size_t begin = tensor.windows / 2;
    const auto means = prep::node_features(fused, begin, tensor.windows);
    NodeFeatures out;
    out.names = tensor.features;
    out.names.insert(out.names.end(), {"causal_out", "causal_in", "causal_rank"});

    std::map<std::string, double> out_strength, in_strength, rank;
    for (const auto& e : edges.edges) {
        out_strength[e.source] += e.strength;
        in_strength[e.target] += e.strength;
    }
    for (const auto& r : ranking) rank[r.id] = r.score * static_cast<double>(ranking.size());

    for (const auto& entity : topology.entities()) {
        const auto e = tensor.entity_index(entity.id);
        if (!e) throw InputError(fmt::format("entity {} missing from the feature tensor", entity.id));
        std::vector<double> v = means[*e];
        v.push_back(out_strength[entity.id]);
        v.push_back(in_strength[entity.id]);
        v.push_back(rank.count(entity.id) ? rank[entity.id] : 0.0);
        std::vector<std::string> labels;
        labels.reserve(out.names.size());
        for (std::size_t f = 0; f < tensor.features.size(); ++f) labels.push_back(tensor.display_name(*e, f));
        labels.insert(labels.end(), {"causal_out", "causal_in", "causal_rank"});
        out.values.push_back(std::move(v));
        out.labels.push_back(std::move(labels));
    }
    return out;
}

std::string graph_to_jsonl(const HetGraph& graph) {
    std::string out = json{{"type", "schema"}, {"features", graph.feature_names}}.dump() + "\n";
    for (const auto& n : graph.nodes) {
        out += json{{"type", "node"},
                    {"id", n.id},
                    {"kind", sim::to_string(n.kind)},
                    {"features", n.features},
                    {"labels", n.labels}}
                   .dump();
        out += '\n';
    }
    for (const auto& e : graph.edges) {
        out += json{{"type", "edge"},
                    {"source", graph.nodes[e.source].id},
                    {"target", graph.nodes[e.target].id},
                    {"kind", sim::to_string(e.kind)},
                    {"weight", e.weight}}
                   .dump();
        out += '\n';
    }
    return out;
}

HetGraph graph_from_jsonl(std::string_view text) {
    HetGraph g;
    std::size_t lineno = 0;
    for (const auto line : text::split_lines(text)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            const auto r = json::parse(line);
            const auto type = r.at("type").get<std::string>();
            if (type == "schema") {
                g.feature_names = r.at("features").get<std::vector<std::string>>();
            } else if (type == "node") {
                HetNode n;
                n.id = r.at("id").get<std::string>();
                const auto kind = sim::parse_entity_kind(r.at("kind").get<std::string>());
                if (!kind) throw InputError(fmt::format("line {}: unknown node kind", lineno));
                n.kind = *kind;
                n.features = r.at("features").get<std::vector<double>>();
                n.labels = r.value("labels", g.feature_names);
                if (n.features.size() != g.feature_names.size()) {
                    throw InputError(fmt::format("line {}: node {} has {} features, schema has {}", lineno, n.id,
                                                 n.features.size(), g.feature_names.size()));
                }
                g.nodes.push_back(std::move(n));
            } else if (type == "edge") {
                const auto s = g.find(r.at("source").get<std::string>());
                const auto t = g.find(r.at("target").get<std::string>());
                const auto kind = sim::parse_edge_kind(r.at("kind").get<std::string>());
                if (!s || !t) throw InputError(fmt::format("line {}: edge endpoint not declared", lineno));
                if (!kind) throw InputError(fmt::format("line {}: unknown edge kind", lineno));
                g.edges.push_back({*s, *t, *kind, r.at("weight").get<double>()});
            } else {
                throw InputError(fmt::format("line {}: unknown record type '{}'", lineno, type));
            }
        } catch (const json::exception& ex) {
            throw InputError(fmt::format("line {}: {}", lineno, ex.what()));
        }
    }
    return g;
}

} // namespace rca::graph
