#include "fd.hpp"
#include "helpers.hpp"

#include "rca/common/error.hpp"
#include "rca/common/rng.hpp"
#include "rca/common/text.hpp"
#include "rca/graph/gat.hpp"
#include "rca/graph/hetgraph.hpp"
#include "rca/graph/model_io.hpp"
#include "rca/graph/train.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <numeric>

using namespace rca;
using namespace rca::graph;
using sim::EdgeKind;
using sim::EntityKind;

namespace {

HetGraph random_graph(std::size_t n, std::size_t features, Rng& rng) {
    HetGraph g;
    for (std::size_t f = 0; f < features; ++f) g.feature_names.push_back("f" + std::to_string(f));
    const EntityKind kinds[] = {EntityKind::host, EntityKind::pod, EntityKind::service};
    for (std::size_t i = 0; i < n; ++i) {
        HetNode node;
        node.id = "n" + std::to_string(i);
        node.kind = kinds[i % 3];
        for (std::size_t f = 0; f < features; ++f) node.features.push_back(rng.normal());
        g.nodes.push_back(std::move(node));
    }
    for (std::size_t i = 1; i < n; ++i) {
        g.edges.push_back({rng.index(i), i, static_cast<EdgeKind>(rng.index(4)), rng.uniform(0.2, 1.0)});
    }
    g.edges.push_back({0, n - 1, EdgeKind::causal, 0.6});
    return g;
}

NodeLabels random_labels(const HetGraph& g, Rng& rng) {
    const auto classes = class_counts();
    NodeLabels l;
    for (const auto& node : g.nodes) {
        const bool faulty = rng.uniform() < 0.5;
        l.faulty.push_back(faulty ? 1 : 0);
        l.fault_type.push_back(faulty ? static_cast<int>(rng.index(classes[static_cast<std::size_t>(node.kind)])) : -1);
    }
    return l;
}

GatModel perturbed_model(const GatShape& shape, std::uint64_t seed, Rng& rng) {
    auto m = init_gat(shape, seed);
    for (auto& p : m.params) p += 0.3 * rng.normal();
    return m;
}

// Five-node corpus where the faulty node is the only one with feature 0 set.
std::vector<LabeledGraph> separable_corpus(std::size_t graphs, Rng& rng) {
    std::vector<LabeledGraph> out;
    for (std::size_t k = 0; k < graphs; ++k) {
        HetGraph g = random_graph(5, 4, rng);
        const std::size_t root = rng.index(5);
        NodeLabels l;
        for (std::size_t i = 0; i < 5; ++i) {
            g.nodes[i].features[0] = i == root ? 1.0 : 0.0;
            l.faulty.push_back(i == root ? 1 : 0);
            l.fault_type.push_back(i == root ? 0 : -1);
        }
        out.push_back({std::move(g), std::move(l)});
    }
    return out;
}

std::size_t argmax(const std::vector<double>& xs) {
    return static_cast<std::size_t>(std::max_element(xs.begin(), xs.end()) - xs.begin());
}

} // namespace

TEST_SUITE("graph") {

TEST_CASE("build_hetgraph") {
    const auto topo = rca::testing::minimal_topology();
    NodeFeatures nf;
    nf.names = {"x"};
    nf.values = {{1.0}, {2.0}, {3.0}};
    const auto g = build_hetgraph(topo, nf, {});
    CHECK(g.nodes.size() == 3);
    CHECK(g.edges.size() == 2);

    causal::CausalEdgeSet edges;
    causal::CausalEdge e;
    e.source = "p1";
    e.target = "s1";
    e.strength = 0.6;
    edges.edges.push_back(e);
    e.strength = 0.4; // duplicate collapses to the stronger
    edges.edges.push_back(e);
    const auto g2 = build_hetgraph(topo, nf, edges);
    REQUIRE(g2.edges.size() == 3);
    std::set<EdgeKind> kinds;
    for (const auto& edge : g2.edges) kinds.insert(edge.kind);
    CHECK(kinds == std::set<EdgeKind>{EdgeKind::deploy, EdgeKind::member, EdgeKind::causal});
    CHECK(g2.edges.back().weight == 0.6);
    std::set<std::tuple<std::size_t, std::size_t, EdgeKind>> triples;
    for (const auto& edge : g2.edges) CHECK(triples.insert({edge.source, edge.target, edge.kind}).second);

    edges.edges[0].target = "x";
    CHECK_THROWS_AS(build_hetgraph(topo, nf, edges), InputError);
}

TEST_CASE("graph jsonl round trip") {
    Rng rng(1);
    const auto g = random_graph(6, 3, rng);
    const auto back = graph_from_jsonl(graph_to_jsonl(g));
    CHECK(graph_to_jsonl(back) == graph_to_jsonl(g));
    CHECK_THROWS_AS(graph_from_jsonl("{\"type\":\"edge\",\"source\":\"a\",\"target\":\"b\",\"kind\":\"call\",\"weight\":1}\n"),
                    InputError);
    CHECK_THROWS_AS(graph_from_jsonl("not json\n"), InputError);
}

TEST_CASE("head sizes follow the fault catalog") {
    CHECK(class_counts() == std::array<std::size_t, 3>{6, 3, 4});
    Rng rng(2);
    const auto g = random_graph(6, 3, rng);
    GatShape s;
    s.input_dim = 3;
    const auto p = predict(init_gat(s, 1), g);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        CHECK(p.types[i].size() == class_counts()[static_cast<std::size_t>(g.nodes[i].kind)]);
    }
}

TEST_CASE("flag threshold is strict at 0.5") {
    Prediction p;
    p.ids = {"a", "b", "c"};
    p.probability = {0.51, 0.49, 0.5};
    CHECK(p.flagged(0));
    CHECK_FALSE(p.flagged(1));
    CHECK_FALSE(p.flagged(2));
    CHECK(p.flagged_ids() == std::vector<std::string>{"a"});
}

TEST_CASE("outputs are normalized (property)") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = random_graph(3 + rng.index(8), 4, rng);
        GatShape s;
        s.input_dim = 4;
        s.type_aware = trial % 2 == 0;
        const auto m = perturbed_model(s, static_cast<std::uint64_t>(trial), rng);
        const auto out = attention_forward(m, g);
        for (const auto& layer : out.attention) {
            for (const auto& head : layer) {
                for (const auto& hood : head) {
                    REQUIRE_FALSE(hood.empty());
                    double total = 0.0;
                    for (const auto& a : hood) total += a.alpha;
                    CHECK(std::abs(total - 1.0) < 1e-9);
                }
            }
        }
        const auto p = predict(m, g);
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            CHECK((p.probability[i] >= 0.0 && p.probability[i] <= 1.0));
            CHECK(std::abs(std::accumulate(p.types[i].begin(), p.types[i].end(), 0.0) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("single neighbor passes its transformed features") {
    // v's only neighbor is u; w is isolated with u's features, so it attends
    // to itself through the automatic self-loop.
    HetGraph g;
    g.feature_names = {"a", "b"};
    g.nodes = {{"u", EntityKind::pod, {0.4, -1.2}, {}},
               {"v", EntityKind::service, {3.0, 7.0}, {}},
               {"w", EntityKind::pod, {0.4, -1.2}, {}}};
    g.edges = {{0, 1, EdgeKind::member, 1.0}};
    GatShape s;
    s.input_dim = 2;
    s.layers = 1;
    s.heads = 1;
    Rng rng(4);
    const auto m = perturbed_model(s, 5, rng);
    const auto out = attention_forward(m, g);
    REQUIRE(out.attention[0][0][1].size() == 1);
    CHECK(out.attention[0][0][1][0].alpha == 1.0);
    CHECK(out.attention[0][0][2][0].relation == -1);
    for (std::size_t k = 0; k < out.embeddings[1].size(); ++k) {
        CHECK(out.embeddings[1][k] == doctest::Approx(out.embeddings[2][k]).epsilon(1e-12));
    }
}

TEST_CASE("raising the causal relation logit raises causal attention") {
    HetGraph g;
    g.feature_names = {"a", "b"};
    g.nodes = {{"v", EntityKind::service, {0.1, 0.2}, {}},
               {"c", EntityKind::service, {0.5, -0.3}, {}},
               {"t", EntityKind::service, {-0.2, 0.9}, {}}};
    g.edges = {{1, 0, EdgeKind::causal, 0.8}, {2, 0, EdgeKind::call, 0.7}};
    GatShape s;
    s.input_dim = 2;
    Rng rng(6);
    auto m = perturbed_model(s, 2, rng);
    auto causal_alpha = [&](const GatModel& model) {
        const auto out = attention_forward(model, g);
        for (const auto& a : out.attention[0][0][0]) {
            if (a.relation == static_cast<int>(EdgeKind::causal)) return a.alpha;
        }
        return -1.0;
    };
    relation_logit(m, 0, 0, EdgeKind::causal) = 0.5;
    const double before = causal_alpha(m);
    relation_logit(m, 0, 0, EdgeKind::causal) = 1.0;
    CHECK(causal_alpha(m) > before);
}

TEST_CASE("gat gradients match finite differences") {
    Rng rng(5);
    for (bool typed : {true, false}) {
        const auto g = random_graph(5, 4, rng);
        const auto labels = random_labels(g, rng);
        GatShape s;
        s.input_dim = 4;
        s.hidden = 3;
        s.type_aware = typed;
        const auto m = perturbed_model(s, 3, rng);
        std::vector<double> grad(m.params.size(), 0.0);
        gat_loss(m, g, labels, &grad);
        std::vector<std::size_t> coords(m.params.size());
        std::iota(coords.begin(), coords.end(), 0);
        const double worst = rca::testing::worst_fd_error(m.params, grad, coords, [&](const std::vector<double>& p) {
            auto copy = m;
            copy.params = p;
            return gat_loss(copy, g, labels);
        });
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("permutation invariance") {
    Rng rng(7);
    const auto g = random_graph(7, 3, rng);
    GatShape s;
    s.input_dim = 3;
    const auto m = perturbed_model(s, 4, rng);
    std::vector<std::size_t> perm(g.nodes.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    HetGraph h;
    h.feature_names = g.feature_names;
    h.nodes.resize(g.nodes.size());
    for (std::size_t i = 0; i < perm.size(); ++i) h.nodes[perm[i]] = g.nodes[i];
    for (auto e : g.edges) {
        e.source = perm[e.source];
        e.target = perm[e.target];
        h.edges.push_back(e);
    }
    const auto a = predict(m, g);
    const auto b = predict(m, h);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        CHECK(a.probability[i] == doctest::Approx(b.probability[perm[i]]).epsilon(1e-12));
        for (std::size_t k = 0; k < a.types[i].size(); ++k) {
            CHECK(a.types[i][k] == doctest::Approx(b.types[perm[i]][k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("attention locality") {
    // Path 0-1-2-3-4: with two layers node 0 cannot see nodes 3 and 4.
    Rng rng(8);
    HetGraph g;
    g.feature_names = {"a", "b"};
    for (int i = 0; i < 5; ++i) g.nodes.push_back({"n" + std::to_string(i), EntityKind::pod, {rng.normal(), rng.normal()}, {}});
    for (std::size_t i = 0; i + 1 < 5; ++i) g.edges.push_back({i, i + 1, EdgeKind::call, 1.0});
    GatShape s;
    s.input_dim = 2;
    const auto m = perturbed_model(s, 9, rng);
    const auto base = predict(m, g);
    auto far = g;
    far.nodes[3].features = {40.0, -40.0};
    far.nodes[4].features = {-9.0, 9.0};
    CHECK(predict(m, far).probability[0] == base.probability[0]);
    auto near = g;
    near.nodes[2].features = {40.0, -40.0};
    CHECK(predict(m, near).probability[0] != base.probability[0]);
}

TEST_CASE("training separates a distinguishing feature") {
    int perfect = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const auto corpus = separable_corpus(20, rng);
        GatShape s;
        s.input_dim = 4;
        TrainOptions o;
        o.epochs = 200;
        o.learning_rate = 0.1;
        o.validation_fraction = 0.0;
        o.seed = seed;
        const auto r = train_gat(init_gat(s, seed), corpus, o);
        bool all = true;
        for (const auto& c : corpus) {
            const auto p = predict(r.model, c.graph);
            all = all && c.labels.faulty[argmax(p.probability)] == 1;
        }
        perfect += all ? 1 : 0;
    }
    CHECK(perfect >= 9);
}

TEST_CASE("training is deterministic and stops early") {
    Rng rng(11);
    const auto corpus = separable_corpus(10, rng);
    GatShape s;
    s.input_dim = 4;
    TrainOptions o;
    o.epochs = 60;
    const auto a = train_gat(init_gat(s, 1), corpus, o);
    const auto b = train_gat(init_gat(s, 1), corpus, o);
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.model.params == b.model.params);
    CHECK(a.loss_history.back() < a.loss_history.front());

    o.epochs = 500;
    o.learning_rate = 5.0;
    o.patience = 3;
    const auto c = train_gat(init_gat(s, 1), corpus, o);
    CHECK(c.stopped_early);
    CHECK(c.loss_history.size() < 500);
    CHECK(c.validation_history[c.best_epoch] ==
          *std::min_element(c.validation_history.begin(), c.validation_history.end()));

    o.learning_rate = 1e300;
    CHECK_THROWS_AS(train_gat(init_gat(s, 1), corpus, o), DivergenceError);
    CHECK_THROWS_AS(train_gat(init_gat(s, 1), {}, o), std::invalid_argument);
}

TEST_CASE("model io round trip and validation") {
    Rng rng(12);
    GatShape s;
    s.input_dim = 3;
    s.type_aware = false;
    auto m = perturbed_model(s, 1, rng);
    m.feature_names = {"a", "b", "c"};
    const auto back = parse_gat_model(format_gat_model(m));
    CHECK(back.params == m.params);
    CHECK(back.feature_names == m.feature_names);
    CHECK(back.shape.type_aware == false);
    CHECK(back.shape.hidden == s.hidden);
    auto text = format_gat_model(m);
    CHECK_THROWS_AS(parse_gat_model(text.substr(0, text.size() / 2)), InputError);
    CHECK_THROWS_AS(parse_gat_model("rca-gat 99\n"), InputError);
    CHECK_THROWS_AS(read_gat_model("/nonexistent/model.txt"), InputError);
}

}
