#include "rca/causal/discovery.hpp"
#include "rca/causal/predictor.hpp"
#include "rca/causal/strength.hpp"
#include "rca/common/rng.hpp"
#include "rca/graph/gat.hpp"
#include "rca/prep/tensor.hpp"
#include "rca/sim/scenario.hpp"
#include "rca/sim/telemetry.hpp"

#include <benchmark/benchmark.h>

using namespace rca;

namespace {

const sim::Topology& topology() {
    static const auto t = sim::build_topology(sim::standard_topology_spec(3, 6, 4));
    return t;
}

const sim::TelemetryBundle& incident() {
    static const auto b = [] {
        const auto g = sim::generate_scenario(topology(), "host-memory-leak", 4);
        return sim::simulate_telemetry(topology(), g.scenario, 1200, 1, 4);
    }();
    return b;
}

void BM_Simulate(benchmark::State& state) {
    const auto g = sim::generate_scenario(topology(), "host-memory-leak", 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::simulate_telemetry(topology(), g.scenario, static_cast<double>(state.range(0)), 1, 4));
    }
}
BENCHMARK(BM_Simulate)->Arg(600)->Arg(1200)->Unit(benchmark::kMillisecond);

void BM_Preprocess(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(prep::preprocess(incident(), topology().entities()));
}
BENCHMARK(BM_Preprocess)->Unit(benchmark::kMillisecond);

void BM_CausalStrength(benchmark::State& state) {
    Rng rng(1);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    Eigen::MatrixXd s(240, n);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
    const auto p = causal::fit_predictor(s, {});
    for (auto _ : state) benchmark::DoNotOptimize(causal::causal_strength_from(*p, s, 0, {}));
}
BENCHMARK(BM_CausalStrength)->Arg(4)->Arg(13)->Unit(benchmark::kMillisecond);

void BM_Discovery(benchmark::State& state) {
    const auto pre = prep::preprocess(incident(), topology().entities());
    for (auto _ : state) benchmark::DoNotOptimize(causal::discover_causality(pre.tensor, topology()));
}
BENCHMARK(BM_Discovery)->Unit(benchmark::kMillisecond);

void BM_GatForward(benchmark::State& state) {
    Rng rng(2);
    const auto n = static_cast<std::size_t>(state.range(0));
    graph::HetGraph g;
    for (std::size_t f = 0; f < 32; ++f) g.feature_names.push_back("f" + std::to_string(f));
    for (std::size_t i = 0; i < n; ++i) {
        graph::HetNode node;
        node.id = "n" + std::to_string(i);
        node.kind = static_cast<sim::EntityKind>(i % 3);
        for (std::size_t f = 0; f < 32; ++f) node.features.push_back(rng.normal());
        g.nodes.push_back(std::move(node));
        if (i > 0) g.edges.push_back({rng.index(i), i, static_cast<sim::EdgeKind>(rng.index(4)), 1.0});
    }
    graph::GatShape s;
    s.input_dim = 32;
    const auto m = graph::init_gat(s, 1);
    for (auto _ : state) benchmark::DoNotOptimize(graph::predict(m, g));
}
BENCHMARK(BM_GatForward)->Arg(13)->Arg(100)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
