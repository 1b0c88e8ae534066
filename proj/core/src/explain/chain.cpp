#include "rca/explain/chain.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace rca::explain {

CausalChain build_causal_chain(const causal::CausalEdgeSet& edges, const std::vector<causal::RankedEntity>& ranked,
                               const std::vector<std::string>& flagged) {
    CausalChain chain;
    const std::set<std::string> flag(flagged.begin(), flagged.end());
    if (ranked.empty()) {
        chain.warning = !flagged.empty();
        chain.unreachable.assign(flag.begin(), flag.end());
        return chain;
    }
    chain.root = ranked.front().id;

    struct Node {
        std::string parent;
        const causal::CausalEdge* edge = nullptr;
        std::size_t depth = 0;
    };
    std::map<std::string, Node> tree{{chain.root, {}}};
    for (;;) {
        const causal::CausalEdge* best = nullptr;
        for (const auto& e : edges.edges) {
            if (!tree.count(e.source) || tree.count(e.target)) continue;
            if (!best || std::tie(e.strength, best->onset_s, best->source, best->target) >
                             std::tie(best->strength, e.onset_s, e.source, e.target)) {
                best = &e;
            }
        }
        if (!best) break;
        tree[best->target] = {best->source, best, tree[best->source].depth + 1};
    }

    for (bool pruned = true; pruned;) {
        pruned = false;
        std::set<std::string> parents;
        for (const auto& [id, node] : tree) {
            if (node.edge) parents.insert(node.parent);
        }
        for (auto it = tree.begin(); it != tree.end();) {
            if (it->first != chain.root && !parents.count(it->first) && !flag.count(it->first)) {
                it = tree.erase(it);
                pruned = true;
            } else {
                ++it;
            }
        }
    }

    std::map<std::string, double> time;
    std::vector<std::pair<std::size_t, std::string>> by_depth;
    for (const auto& [id, node] : tree) by_depth.emplace_back(node.depth, id);
    std::sort(by_depth.begin(), by_depth.end());
    std::vector<std::tuple<double, std::size_t, ChainLink>> links;
    for (const auto& [depth, id] : by_depth) {
        const auto& node = tree[id];
        if (!node.edge) continue;
        const double parent_time = time.count(node.parent) ? time[node.parent] : node.edge->onset_s;
        time[id] = std::max(node.edge->onset_s, parent_time);
        links.emplace_back(time[id], depth, ChainLink{time[id], node.parent, id, node.edge->strength});
    }
    std::sort(links.begin(), links.end(), [](const auto& a, const auto& b) {
        const auto& la = std::get<2>(a);
        const auto& lb = std::get<2>(b);
        return std::tie(std::get<0>(a), std::get<1>(a), la.source, la.target) <
               std::tie(std::get<0>(b), std::get<1>(b), lb.source, lb.target);
    });
    for (auto& l : links) chain.links.push_back(std::move(std::get<2>(l)));

    chain.warning = chain.links.empty();
    for (const auto& id : flag) {
        if (!tree.count(id)) chain.unreachable.push_back(id);
    }
    return chain;
}

} // namespace rca::explain
