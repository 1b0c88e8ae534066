#include "helpers.hpp"

#include "rca/common/rng.hpp"
#include "rca/explain/chain.hpp"
#include "rca/explain/importance.hpp"
#include "rca/explain/report.hpp"
#include "rca/graph/gat.hpp"
#include "rca/graph/train.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace rca;
using namespace rca::explain;
using sim::EdgeKind;
using sim::EntityKind;

namespace {

graph::HetGraph toy_graph(std::size_t n, std::size_t features, Rng& rng) {
    graph::HetGraph g;
    for (std::size_t f = 0; f < features; ++f) g.feature_names.push_back("m" + std::to_string(f) + ".mean");
    const EntityKind kinds[] = {EntityKind::host, EntityKind::pod, EntityKind::service};
    for (std::size_t i = 0; i < n; ++i) {
        graph::HetNode node;
        node.id = "n" + std::to_string(i);
        node.kind = kinds[i % 3];
        for (std::size_t f = 0; f < features; ++f) node.features.push_back(rng.normal());
        g.nodes.push_back(std::move(node));
    }
    for (std::size_t i = 1; i < n; ++i) {
        g.edges.push_back({rng.index(i), i, static_cast<EdgeKind>(rng.index(4)), rng.uniform(0.2, 1.0)});
    }
    return g;
}

// Zeroes every parameter that reads input feature f: its column of the
// first-layer projection in each head and its readout weight in the fault head.
// Mirrors the parameter layout of the GAT (type embedding, then per layer and
// head W, a_src, a_dst, type logits, relation logits, then the fault head).
void cut_feature(graph::GatModel& m, std::size_t f) {
    const auto& s = m.shape;
    std::size_t pos = sim::kEntityKindCount * s.input_dim;
    for (std::size_t l = 0; l < s.layers; ++l) {
        const std::size_t din = l == 0 ? s.input_dim : s.heads * s.hidden;
        for (std::size_t h = 0; h < s.heads; ++h) {
            if (l == 0) {
                for (std::size_t i = 0; i < s.hidden; ++i) m.params[pos + i * din + f] = 0.0;
            }
            pos += s.hidden * din + 2 * s.hidden + sim::kEntityKindCount + sim::kEdgeKindCount;
        }
    }
    m.params[pos + f] = 0.0;
}

causal::CausalEdge edge(std::string a, std::string b, double strength, double onset) {
    causal::CausalEdge e;
    e.source = std::move(a);
    e.target = std::move(b);
    e.strength = strength;
    e.onset_s = onset;
    return e;
}

std::vector<causal::RankedEntity> ranked(std::initializer_list<std::string> ids) {
    std::vector<causal::RankedEntity> out;
    double score = 1.0;
    for (const auto& id : ids) out.push_back({id, score /= 2.0});
    return out;
}

graph::Prediction prediction(const std::vector<std::pair<std::string, double>>& nodes) {
    graph::Prediction p;
    const auto classes = graph::class_counts();
    for (const auto& [id, prob] : nodes) {
        const EntityKind kind = id[0] == 'h' ? EntityKind::host : id[0] == 'p' ? EntityKind::pod : EntityKind::service;
        p.ids.push_back(id);
        p.kinds.push_back(kind);
        p.probability.push_back(prob);
        const std::size_t c = classes[static_cast<std::size_t>(kind)];
        std::vector<double> t(c, 0.1 / static_cast<double>(c - 1));
        t[1 % c] = 0.9;
        p.types.push_back(std::move(t));
    }
    return p;
}

ReportPayload sample_payload() {
    ReportPayload pl;
    pl.run_id = "sample";
    pl.prediction = prediction({{"h1", 0.93}, {"p1", 0.81}, {"s1", 0.66}, {"s2", 0.12}});
    pl.ranking = ranked({"h1", "p1", "s1", "s2"});
    pl.importance = {{"h1", {{"mem_usage.slope", 0.4}, {"cpu.mean", 0.125}}},
                     {"p1", {{"mem_usage.mean", 0.25}, {"causal_out", 0.0}}}};
    causal::CausalEdgeSet edges;
    edges.edges = {edge("h1", "p1", 0.8, 300), edge("p1", "s1", 0.6, 330)};
    pl.chain = build_causal_chain(edges, pl.ranking, {"h1", "p1", "s1"});
    return pl;
}

std::vector<graph::LabeledGraph> separable_corpus(std::size_t graphs, Rng& rng) {
    std::vector<graph::LabeledGraph> out;
    for (std::size_t k = 0; k < graphs; ++k) {
        auto g = toy_graph(5, 4, rng);
        const std::size_t root = rng.index(5);
        graph::NodeLabels l;
        for (std::size_t i = 0; i < 5; ++i) {
            g.nodes[i].features[0] = i == root ? 1.0 : 0.0;
            l.faulty.push_back(i == root ? 1 : 0);
            l.fault_type.push_back(i == root ? 0 : -1);
        }
        out.push_back({std::move(g), std::move(l)});
    }
    return out;
}

} // namespace

TEST_SUITE("explain") {

TEST_CASE("a feature with no weight path scores 0") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        const auto g = toy_graph(6, 5, rng);
        graph::GatShape s;
        s.input_dim = 5;
        auto m = graph::init_gat(s, seed);
        for (auto& p : m.params) p += 0.2 * rng.normal();
        cut_feature(m, 2);
        MaskOptions o;
        o.seed = seed;
        for (const auto& node : g.nodes) {
            const auto entry = mask_importance(m, g, node.id, o);
            for (const auto& sc : entry.scores) {
                if (sc.feature == "m2.mean") CHECK(sc.score == 0.0);
            }
        }
    }
}

TEST_CASE("scores are sorted and clamped") {
    Rng rng(3);
    const auto g = toy_graph(7, 6, rng);
    graph::GatShape s;
    s.input_dim = 6;
    auto m = graph::init_gat(s, 3);
    for (auto& p : m.params) p += 0.5 * rng.normal();
    const auto table = importance_table(m, g, {"n0", "n3", "n6"});
    REQUIRE(table.size() == 3);
    for (const auto& entry : table) {
        CHECK(entry.scores.size() == 6);
        for (std::size_t i = 0; i < entry.scores.size(); ++i) {
            CHECK(entry.scores[i].score >= 0.0);
            if (i > 0) CHECK(entry.scores[i - 1].score >= entry.scores[i].score);
        }
    }
}

TEST_CASE("masking leaves the model and prediction untouched") {
    Rng rng(4);
    const auto g = toy_graph(6, 4, rng);
    graph::GatShape s;
    s.input_dim = 4;
    const auto m = graph::init_gat(s, 4);
    const auto params = m.params;
    const auto before = graph::predict(m, g).probability;
    (void)mask_importance(m, g, "n2");
    CHECK(m.params == params);
    CHECK(graph::predict(m, g).probability == before);
}

TEST_CASE("masking is deterministic per seed") {
    Rng rng(5);
    const auto g = toy_graph(6, 4, rng);
    graph::GatShape s;
    s.input_dim = 4;
    auto m = graph::init_gat(s, 5);
    for (auto& p : m.params) p += 0.4 * rng.normal();
    const auto a = mask_importance(m, g, "n1");
    const auto b = mask_importance(m, g, "n1");
    REQUIRE(a.scores.size() == b.scores.size());
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
        CHECK(a.scores[i].feature == b.scores[i].feature);
        CHECK(a.scores[i].score == b.scores[i].score);
    }
}

TEST_CASE("unknown entity and zero trials are rejected") {
    Rng rng(6);
    const auto g = toy_graph(3, 2, rng);
    graph::GatShape s;
    s.input_dim = 2;
    const auto m = graph::init_gat(s, 6);
    CHECK_THROWS_AS(mask_importance(m, g, "nope"), std::invalid_argument);
    MaskOptions o;
    o.trials = 0;
    CHECK_THROWS_AS(mask_importance(m, g, "n0", o), std::invalid_argument);
}

TEST_CASE("the distinguishing feature ranks first in a trained toy model") {
    int first = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const auto corpus = separable_corpus(20, rng);
        graph::GatShape s;
        s.input_dim = 4;
        graph::TrainOptions o;
        o.epochs = 200;
        o.learning_rate = 0.1;
        o.validation_fraction = 0.0;
        o.seed = seed;
        const auto model = graph::train_gat(graph::init_gat(s, seed), corpus, o).model;
        const auto& probe = corpus.front();
        std::size_t root = 0;
        while (probe.labels.faulty[root] == 0) ++root;
        MaskOptions mo;
        mo.seed = seed;
        const auto entry = mask_importance(model, probe.graph, probe.graph.nodes[root].id, mo);
        first += entry.scores.front().feature == "m0.mean" ? 1 : 0;
    }
    CHECK(first >= 9);
}

TEST_CASE("top metrics skip causal inputs and repeats") {
    ImportanceEntry e{"h1",
                      {{"causal_in", 0.9}, {"mem_usage.slope", 0.5}, {"mem_usage.mean", 0.4}, {"cpu.max", 0.3},
                       {"disk.mean", 0.2}, {"net.mean", 0.0}}};
    CHECK(top_metrics(e, 3) == std::vector<std::string>{"mem_usage", "cpu"});
    CHECK(top_metrics(e, 10) == std::vector<std::string>{"mem_usage", "cpu", "disk"});
    CHECK(top_metrics(e, 0).empty());
}

TEST_CASE("empty edge set gives an empty chain with warning") {
    causal::CausalEdgeSet none;
    const auto c = build_causal_chain(none, ranked({"h1", "p1"}), {"h1", "p1"});
    CHECK(c.links.empty());
    CHECK(c.warning);
    CHECK(c.root == "h1");
    CHECK(c.unreachable == std::vector<std::string>{"p1"});

    const auto empty = build_causal_chain(none, {}, {});
    CHECK(empty.links.empty());
    CHECK(empty.root.empty());
}

TEST_CASE("chain follows the strongest edges and prunes unflagged leaves") {
    causal::CausalEdgeSet es;
    es.edges = {edge("h1", "p1", 0.8, 300), edge("h1", "p2", 0.4, 310), edge("p1", "s1", 0.7, 320),
                edge("p2", "s1", 0.9, 305), edge("s1", "s2", 0.5, 340), edge("p3", "s3", 0.9, 100)};
    const auto c = build_causal_chain(es, ranked({"h1", "p1", "s1"}), {"h1", "p1", "s1", "s3"});
    CHECK_FALSE(c.warning);
    REQUIRE(c.links.size() == 2);
    CHECK(c.links[0].source == "h1");
    CHECK(c.links[0].target == "p1");
    CHECK(c.links[1].source == "p1");
    CHECK(c.links[1].target == "s1");
    CHECK(c.unreachable == std::vector<std::string>{"s3"});
}

TEST_CASE("chain times never precede the parent link") {
    causal::CausalEdgeSet es;
    es.edges = {edge("h1", "p1", 0.8, 400), edge("p1", "s1", 0.7, 350), edge("s1", "s2", 0.6, 500)};
    const auto c = build_causal_chain(es, ranked({"h1"}), {"h1", "p1", "s1", "s2"});
    REQUIRE(c.links.size() == 3);
    CHECK(c.links[1].time_s == 400.0);
    CHECK(c.links[2].time_s == 500.0);
}

TEST_CASE("chain tree property on random edge sets (property)") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        Rng rng(seed);
        std::vector<std::string> ids;
        for (int i = 0; i < 8; ++i) ids.push_back("e" + std::to_string(i));
        causal::CausalEdgeSet es;
        for (int k = 0; k < 14; ++k) {
            const auto a = ids[rng.index(ids.size())];
            const auto b = ids[rng.index(ids.size())];
            if (a != b) es.edges.push_back(edge(a, b, rng.uniform(0.3, 1.0), 5.0 * static_cast<double>(rng.index(100))));
        }
        std::vector<std::string> flagged;
        for (const auto& id : ids) {
            if (rng.uniform() < 0.5) flagged.push_back(id);
        }
        const auto c = build_causal_chain(es, ranked({ids[rng.index(ids.size())]}), flagged);
        std::map<std::string, int> incoming;
        std::set<std::string> nodes{c.root};
        for (std::size_t i = 0; i < c.links.size(); ++i) {
            ++incoming[c.links[i].target];
            nodes.insert(c.links[i].source);
            nodes.insert(c.links[i].target);
            if (i > 0) CHECK(c.links[i - 1].time_s <= c.links[i].time_s);
        }
        CHECK(incoming.count(c.root) == 0);
        for (const auto& [id, count] : incoming) CHECK(count == 1);
        const std::set<std::string> flag(flagged.begin(), flagged.end());
        for (const auto& id : c.unreachable) {
            CHECK(flag.count(id) == 1);
            CHECK(nodes.count(id) == 0);
        }
    }
}

TEST_CASE("report has the four sections and is deterministic") {
    const auto pl = sample_payload();
    const auto a = render_report(pl);
    const auto b = render_report(pl);
    CHECK(a.text == b.text);
    CHECK(a.jsonl == b.jsonl);
    for (auto title : kReportSections) CHECK(a.text.find(title) != std::string::npos);
    CHECK(a.text.find("root cause: h1") != std::string::npos);
    CHECK(a.text.find("0.930") != std::string::npos);
}

TEST_CASE("nothing flagged reads no fault detected") {
    ReportPayload pl;
    pl.run_id = "quiet";
    pl.prediction = prediction({{"h1", 0.2}, {"s1", 0.5}});
    pl.ranking = ranked({"h1", "s1"});
    const auto r = render_report(pl);
    CHECK(r.text.find("no fault detected") != std::string::npos);
    for (auto title : kReportSections) CHECK(r.text.find(title) != std::string::npos);
    CHECK(r.text.find("root cause:") == std::string::npos);
}

TEST_CASE("payload round trip reproduces the rendering") {
    const auto pl = sample_payload();
    const auto r = render_report(pl);
    const auto back = parse_report_payload(r.jsonl);
    CHECK(back.run_id == pl.run_id);
    CHECK(back.prediction.probability == pl.prediction.probability);
    CHECK(back.chain.links.size() == pl.chain.links.size());
    const auto again = render_report(back);
    CHECK(again.text == r.text);
    CHECK(again.jsonl == r.jsonl);
}

TEST_CASE("chain plot exports") {
    const auto pl = sample_payload();
    const auto csv = chain_plot_csv(pl);
    CHECK(csv.rfind("time_s,source,target,level,target_level,strength\n", 0) == 0);
    CHECK(csv.find("h1,p1,host,pod") != std::string::npos);
    CHECK(csv.find("p1,s1,pod,service") != std::string::npos);
    const auto vl = chain_plot_vegalite(pl);
    CHECK(vl.find("\"time_s\"") != std::string::npos);
    CHECK(vl.find("vega-lite") != std::string::npos);
}

} // TEST_SUITE
