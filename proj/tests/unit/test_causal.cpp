#include "fd.hpp"
#include "helpers.hpp"

#include "rca/common/error.hpp"
#include "rca/common/rng.hpp"
#include "rca/common/text.hpp"
#include "rca/causal/cross_level.hpp"
#include "rca/causal/discovery.hpp"
#include "rca/causal/edges_io.hpp"
#include "rca/causal/filter.hpp"
#include "rca/causal/latent_var.hpp"
#include "rca/causal/mutual_info.hpp"
#include "rca/causal/pagerank.hpp"
#include "rca/causal/strength.hpp"
#include "rca/causal/tcn.hpp"
#include "rca/prep/tensor.hpp"
#include "rca/sim/scenario.hpp"
#include "rca/sim/telemetry.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace rca;
using namespace rca::causal;
using doctest::Approx;

namespace {

Eigen::MatrixXd ar1(std::size_t T, double phi, double noise, Rng& rng) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(T), 1);
    x(0, 0) = rng.normal();
    for (Eigen::Index t = 1; t < x.rows(); ++t) x(t, 0) = phi * x(t - 1, 0) + noise * rng.normal();
    return x;
}

// Forecasts column 1 as column 0 one step earlier, column 0 as zero.
class ShiftPredictor final : public TemporalPredictor {
public:
    PredictorKind kind() const override { return PredictorKind::latent_var; }
    std::size_t features() const override { return 2; }
    std::size_t warmup() const override { return 1; }
    Eigen::MatrixXd predict(const Eigen::MatrixXd& s) const override {
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(s.rows(), 2);
        for (Eigen::Index t = 1; t < s.rows(); ++t) p(t, 1) = s(t - 1, 0);
        return p;
    }
};

// Tensor over `entities` with one intra cube and explicit per-pair strengths.
CausalTensor tensor_with(const std::vector<std::string>& entities,
                         const std::vector<std::tuple<std::string, std::string, double>>& strengths,
                         const Eigen::MatrixXd& signals, std::size_t steps = 4) {
    CausalTensor t;
    t.entities = entities;
    t.signals = signals;
    t.step_windows = 10;
    StrengthCube cube("all", false, entities, entities, steps);
    auto idx = [&](const std::string& id) {
        return static_cast<std::size_t>(std::find(entities.begin(), entities.end(), id) - entities.begin());
    };
    for (const auto& [s, d, v] : strengths) {
        for (std::size_t k = 0; k < steps; ++k) cube.at(idx(s), idx(d), k) = v;
    }
    t.cubes.push_back(std::move(cube));
    return t;
}

bool has_edge(const CausalEdgeSet& set, const std::string& s, const std::string& t) {
    return std::any_of(set.edges.begin(), set.edges.end(), [&](const auto& e) { return e.source == s && e.target == t; });
}

} // namespace

TEST_SUITE("causal") {

TEST_CASE("latent var recovers an exact AR(1)") {
    Eigen::MatrixXd x(500, 1);
    x(0, 0) = 1.0;
    for (Eigen::Index t = 1; t < 500; ++t) x(t, 0) = 0.5 * x(t - 1, 0);
    const auto m = fit_latent_var(x, 1, 1, 1e-8);
    CHECK(std::abs(m.coefficient(1)(0, 0) - 0.5) < 1e-3);
}

TEST_CASE("latent var shrinks white noise") {
    Rng rng(2);
    Eigen::MatrixXd x(5000, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const auto m = fit_latent_var(x, 1, 3, 1.0);
    CHECK(m.coefficient(1).norm() < 0.1);
}

TEST_CASE("latent var is scale consistent") {
    Rng rng(4);
    const Eigen::MatrixXd x = ar1(400, 0.7, 1.0, rng);
    const double a = fit_latent_var(x, 1, 1, 0.5).coefficient(1)(0, 0);
    for (double c : {0.001, 3.0, 1e4}) CHECK(std::abs(fit_latent_var(c * x, 1, 1, 0.5).coefficient(1)(0, 0) - a) < 1e-9);
}

TEST_CASE("latent var validation and forecasting") {
    Rng rng(1);
    Eigen::MatrixXd x(6, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    CHECK_THROWS_AS(fit_latent_var(x.topRows(2), 2, 1, 1.0), std::invalid_argument);
    Eigen::MatrixXd dup(50, 2);
    for (Eigen::Index t = 0; t < 50; ++t) dup(t, 0) = dup(t, 1) = std::sin(0.3 * static_cast<double>(t));
    CHECK_THROWS_AS(fit_latent_var(dup, 1, 2, 0.0), std::invalid_argument);

    // Forecasts only use rows before t.
    const Eigen::MatrixXd s = ar1(200, 0.8, 1.0, rng);
    const auto m = fit_latent_var(s, 2, 1, 1.0);
    const Eigen::MatrixXd p = m.predict(s);
    Eigen::MatrixXd changed = s;
    changed(100, 0) += 50.0;
    const Eigen::MatrixXd q = m.predict(changed);
    for (Eigen::Index t = 2; t <= 100; ++t) CHECK(p(t, 0) == q(t, 0));
    CHECK(p(101, 0) != q(101, 0));
}

TEST_CASE("tcn gradients match finite differences") {
    Rng rng(3);
    TcnShape shape;
    shape.features = 3;
    Eigen::MatrixXd x(64, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (std::uint64_t seed : {1, 2}) {
        const auto params = init_tcn_parameters(shape, seed);
        CHECK(params.size() == shape.parameter_count());
        std::vector<double> grad;
        TcnAutoencoder::loss(shape, params, x, &grad);
        REQUIRE(grad.size() == params.size());
        std::vector<std::size_t> coords(params.size());
        std::iota(coords.begin(), coords.end(), 0);
        const double worst = rca::testing::worst_fd_error(
            params, grad, coords, [&](const std::vector<double>& p) { return TcnAutoencoder::loss(shape, p, x); });
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("tcn training halves reconstruction error on a sinusoid") {
    Eigen::MatrixXd x(160, 2);
    for (Eigen::Index t = 0; t < 160; ++t) {
        x(t, 0) = std::sin(0.2 * static_cast<double>(t));
        x(t, 1) = std::cos(0.2 * static_cast<double>(t));
    }
    TcnShape shape;
    shape.features = 2;
    const auto untrained = fit_tcn_autoencoder(x, shape, 1, 1e-12, 5);
    const auto trained = fit_tcn_autoencoder(x, shape, 200, 0.05, 5);
    CHECK(trained.loss_history().size() == 200);
    CHECK(tcn_reconstruction_mse(trained, x) < 0.5 * tcn_reconstruction_mse(untrained, x));
    const auto again = fit_tcn_autoencoder(x, shape, 200, 0.05, 5);
    CHECK(again.parameters() == trained.parameters());
}

TEST_CASE("tcn rejects even kernels and reports divergence") {
    Eigen::MatrixXd x(40, 1);
    for (Eigen::Index t = 0; t < 40; ++t) x(t, 0) = std::sin(0.5 * static_cast<double>(t));
    TcnShape ok;
    ok.features = 1;
    CHECK_NOTHROW(fit_tcn_autoencoder(x, ok, 1, 0.01, 1));
    TcnShape even = ok;
    even.kernels = {4};
    CHECK_THROWS_AS(fit_tcn_autoencoder(x, even, 1, 0.01, 1), std::invalid_argument);
    try {
        fit_tcn_autoencoder(x, ok, 50, 1e6, 1);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.epoch() >= 1);
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("perturb_segmented") {
    Rng rng(6);
    std::vector<double> xs(103);
    for (auto& x : xs) x = rng.normal();
    const auto p = perturb_segmented(xs, 10, 77);
    CHECK(p == perturb_segmented(xs, 10, 77));
    CHECK(p != xs);
    for (std::size_t start = 0; start < xs.size(); start += 10) {
        const std::size_t end = std::min(start + 10, xs.size());
        std::vector<double> a(xs.begin() + start, xs.begin() + end), b(p.begin() + start, p.begin() + end);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
    const auto full = perturb_segmented(xs, xs.size(), 1);
    auto a = xs, b = full;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    CHECK_THROWS_AS(perturb_segmented(xs, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(perturb_segmented(xs, 104, 1), std::invalid_argument);
}

TEST_CASE("causal strength formula") {
    // Original loss 1 at every step; the replacement raises it to 1.5.
    Eigen::MatrixXd s(6, 2);
    for (Eigen::Index t = 0; t < 6; ++t) {
        s(t, 0) = static_cast<double>(t);
        s(t, 1) = t == 0 ? 0.0 : s(t - 1, 0) + 1.0;
    }
    std::vector<double> replacement(6);
    for (std::size_t t = 0; t < 6; ++t) replacement[t] = static_cast<double>(t) + 1.0 - std::sqrt(1.5);
    const auto prof = strength_under(ShiftPredictor{}, s, 0, {replacement}, 1);
    REQUIRE(prof[1].per_step.size() == 5);
    for (double c : prof[1].per_step) CHECK(c == Approx(0.5));
    CHECK(prof[1].mean == Approx(0.5));
    CHECK(prof[0].per_step.empty());
}

TEST_CASE("identity perturbation gives exactly zero strength") {
    Rng rng(8);
    Eigen::MatrixXd s(120, 3);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
    const auto p = fit_predictor(s, {});
    for (std::size_t i = 0; i < 3; ++i) {
        const std::vector<double> same(s.col(static_cast<Eigen::Index>(i)).data(),
                                       s.col(static_cast<Eigen::Index>(i)).data() + s.rows());
        const auto prof = strength_under(*p, s, i, {same, same}, 5);
        for (std::size_t j = 0; j < 3; ++j) {
            if (j == i) continue;
            for (double c : prof[j].per_step) CHECK(c == 0.0);
        }
    }
}

TEST_CASE("strength direction on a coupled pair") {
    int right = 0, quiet = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        Eigen::MatrixXd s(1000, 2); // column 0 = x, column 1 = y
        s(0, 0) = rng.normal();
        s(0, 1) = rng.normal();
        for (Eigen::Index t = 1; t < 1000; ++t) {
            s(t, 1) = 0.5 * s(t - 1, 1) + rng.normal();
            s(t, 0) = 0.9 * s(t - 1, 1) + rng.normal();
        }
        PredictorOptions po;
        po.lag = 2;
        const auto p = fit_predictor(s, po);
        StrengthOptions so;
        so.seed = seed;
        right += causal_strength(*p, s, 1, 0, so).mean > causal_strength(*p, s, 0, 1, so).mean;

        Eigen::MatrixXd ind(1000, 2);
        ind.col(0) = ar1(1000, 0.6, 1.0, rng);
        ind.col(1) = ar1(1000, 0.6, 1.0, rng);
        const auto q = fit_predictor(ind, po);
        quiet += std::abs(causal_strength(*q, ind, 0, 1, so).mean) < 0.1;
    }
    CHECK(right == 5);
    CHECK(quiet >= 4);
}

TEST_CASE("cross-level transmission") {
    Eigen::MatrixXd intra(1, 1), r(1, 1);
    intra << 0.8;
    r << 0.5;
    CHECK(cross_level_raw({intra}, r)[0](0, 0) == Approx(0.4));

    Rng rng(2);
    std::vector<Eigen::MatrixXd> steps;
    for (int k = 0; k < 4; ++k) steps.push_back(Eigen::MatrixXd::Random(3, 2));
    Eigen::MatrixXd rel = (Eigen::MatrixXd::Random(3, 2).array() + 1.0) / 2.0;
    const auto out = cross_level_causal(steps, rel);
    double lo = 1e9, hi = -1e9;
    for (const auto& m : out) {
        lo = std::min(lo, m.minCoeff());
        hi = std::max(hi, m.maxCoeff());
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);

    std::vector<Eigen::MatrixXd> flat{Eigen::MatrixXd::Constant(2, 2, 0.7), Eigen::MatrixXd::Constant(2, 2, 0.7)};
    for (const auto& m : cross_level_causal(flat, Eigen::MatrixXd::Ones(2, 2))) CHECK(m.isZero());
    CHECK_THROWS_AS(cross_level_raw(steps, Eigen::MatrixXd::Ones(2, 2)), std::invalid_argument);

    // Raising an association degree never lowers the raw cross entry.
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd bumped = rel;
        const auto i = static_cast<Eigen::Index>(rng.index(3));
        const auto j = static_cast<Eigen::Index>(rng.index(2));
        bumped(i, j) = std::min(1.0, bumped(i, j) + rng.uniform());
        const auto a = cross_level_raw(steps, rel);
        const auto b = cross_level_raw(steps, bumped);
        for (std::size_t k = 0; k < steps.size(); ++k) CHECK(b[k](i, j) >= a[k](i, j));
    }
}

TEST_CASE("bounded strength and joint normalization") {
    CHECK(bounded_strength(0.0) == 0.0);
    CHECK(bounded_strength(1.0) == Approx(0.5));
    CHECK(bounded_strength(-0.5) == 0.0);
    StrengthCube c("x", false, {"a", "b"}, {"a", "b"}, 2);
    c.at(0, 1, 0) = 0.2;
    c.at(0, 1, 1) = 0.6;
    c.at(1, 0, 0) = 0.4;
    c.at(0, 0, 1) = 9.0; // self pair, ignored
    std::vector<StrengthCube> cubes{c};
    normalize_cubes(cubes);
    CHECK(cubes[0].at(0, 0, 1) == 0.0);
    CHECK(cubes[0].at(0, 1, 1) == 1.0);
    CHECK(cubes[0].at(1, 1, 0) == 0.0);
    CHECK(cubes[0].at(1, 0, 0) == Approx(4.0 / 6.0));
}

TEST_CASE("filter threshold boundary") {
    Rng rng(1);
    Eigen::MatrixXd sig(60, 4);
    for (Eigen::Index i = 0; i < sig.size(); ++i) sig.data()[i] = rng.normal();
    const auto t = tensor_with({"a", "b", "c", "d"}, {{"a", "b", 0.31}, {"c", "d", 0.29}}, sig);
    const auto e = filter_causal(t, {});
    CHECK(has_edge(e, "a", "b"));
    CHECK_FALSE(has_edge(e, "c", "d"));
    CHECK(e.stage1_dropped >= 1);
    for (const auto& edge : e.edges) {
        CHECK(edge.strength > 0.3);
        CHECK(edge.source != edge.target);
    }
    const auto empty = filter_causal(CausalTensor{}, {});
    CHECK(empty.edges.empty());
}

TEST_CASE("filter removes common-cause edges") {
    int removed = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const Eigen::Index T = 240;
        Eigen::MatrixXd sig(T, 3); // k, i, j
        sig(0, 0) = rng.normal();
        sig(0, 1) = rng.normal();
        sig(0, 2) = rng.normal();
        for (Eigen::Index t = 1; t < T; ++t) {
            sig(t, 0) = 0.7 * sig(t - 1, 0) + rng.normal();
            sig(t, 1) = sig(t - 1, 0) + 0.5 * rng.normal();
            sig(t, 2) = sig(t - 1, 0) + 0.5 * rng.normal();
        }
        const auto t = tensor_with({"k", "i", "j"}, {{"k", "i", 0.8}, {"k", "j", 0.8}, {"i", "j", 0.5}}, sig);
        FilterOptions o;
        o.seed = seed;
        const auto e = filter_causal(t, o);
        CHECK(has_edge(e, "k", "j"));
        removed += !has_edge(e, "i", "j");
    }
    CHECK(removed >= 16);
}

TEST_CASE("mutual information estimators") {
    const std::vector<double> xs{5, 1, 4, 2, 3, 6, 8, 7};
    const auto b = equal_frequency_bins(xs, 4);
    CHECK(b == std::vector<int>{2, 0, 1, 0, 1, 2, 3, 3});
    const std::vector<int> x{0, 1, 0, 1, 0, 1, 0, 1};
    const std::vector<int> zero(8, 0);
    CHECK(mutual_information(x, x, 2) == Approx(std::log(2.0)));
    CHECK(mutual_information(x, zero, 2) == Approx(0.0));
    CHECK(conditional_mutual_information(x, x, x, 2) == Approx(0.0));
}

TEST_CASE("pagerank") {
    const Eigen::MatrixXd complete = Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
    for (double s : pagerank_scores(complete, 0.85, 1e-12, 1000)) CHECK(s == Approx(0.25));

    CausalEdgeSet star;
    for (const char* leaf : {"l1", "l2", "l3", "l4"}) {
        CausalEdge e;
        e.source = "c";
        e.target = leaf;
        e.strength = 0.8;
        e.profile = {0.8, 0.8, 0.8};
        star.edges.push_back(e);
    }
    const auto ranked = pagerank_rank(star, {"l1", "l2", "c", "l3", "l4", "iso"});
    CHECK(ranked.front().id == "c");
    double total = 0.0;
    for (const auto& r : ranked) total += r.score;
    CHECK(std::abs(total - 1.0) < 1e-9);
    CHECK(std::find_if(ranked.begin(), ranked.end(), [](const auto& r) { return r.id == "iso"; })->score > 0.0);
}

TEST_CASE("pagerank sums to one and argmax is scale invariant (property)") {
    Rng rng(12);
    const std::vector<std::string> ids{"a", "b", "c", "d", "e", "f"};
    for (int trial = 0; trial < 100; ++trial) {
        CausalEdgeSet set;
        for (const auto& s : ids) {
            for (const auto& t : ids) {
                if (s == t || rng.uniform() > 0.3) continue;
                CausalEdge e;
                e.source = s;
                e.target = t;
                e.profile = {rng.uniform(), rng.uniform(), rng.uniform()};
                e.strength = e.profile[0];
                set.edges.push_back(e);
            }
        }
        const auto a = pagerank_rank(set, ids);
        double total = 0.0;
        for (const auto& r : a) total += r.score;
        CHECK(std::abs(total - 1.0) < 1e-9);
        for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].score >= a[i].score);
        auto scaled = set;
        const double c = std::exp(rng.uniform(-3, 3));
        for (auto& e : scaled.edges) {
            e.strength *= c;
            for (auto& v : e.profile) v *= c;
        }
        CHECK(pagerank_rank(scaled, ids).front().id == a.front().id);
    }
}

TEST_CASE("discovery on a simulated incident") {
    const auto topo = rca::testing::standard_topology();
    const auto g = sim::generate_scenario(topo, "host-memory-leak", 1000);
    const auto b = sim::simulate_telemetry(topo, g.scenario, 1200, 1, 1000);
    const auto pre = prep::preprocess(b, topo.entities());
    const auto ct = discover_causality(pre.tensor, topo, {});
    CHECK(ct.entities.size() == topo.size());
    for (const auto& cube : ct.cubes) {
        for (double v : cube.values) CHECK((v >= 0.0 && v <= 1.0));
    }
    const auto edges = filter_causal(ct, {});
    const auto again = filter_causal(discover_causality(pre.tensor, topo, {}), {});
    CHECK(edges_to_jsonl(edges) == edges_to_jsonl(again));
    const auto ranked = pagerank_rank(edges, ct.entities);
    CHECK(ranked.front().id == g.truth.root);

    const auto dir = rca::testing::scratch_dir("edges");
    text::write_file((dir / "e.jsonl").string(), edges_to_jsonl(edges));
    const auto back = read_edges_jsonl(dir / "e.jsonl");
    CHECK(edges_to_jsonl(back) == edges_to_jsonl(edges));
    CHECK_FALSE(strengths_to_csv(ct).empty());
}

}
