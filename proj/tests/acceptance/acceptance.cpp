// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "rca/causal/filter.hpp"
#include "rca/causal/latent_var.hpp"
#include "rca/causal/pagerank.hpp"
#include "rca/causal/predictor.hpp"
#include "rca/causal/strength.hpp"
#include "rca/causal/tcn.hpp"
#include "rca/common/rng.hpp"
#include "rca/common/text.hpp"
#include "rca/graph/gat.hpp"
#include "rca/pipeline/config.hpp"
#include "rca/pipeline/diagnose.hpp"
#include "rca/pipeline/suite.hpp"
#include "rca/prep/drain.hpp"
#include "rca/prep/fusion.hpp"
#include "rca/prep/series.hpp"
#include "rca/prep/tensor.hpp"
#include "rca/sim/telemetry.hpp"
#include "rca/sim/telemetry_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>

namespace fs = std::filesystem;
using namespace rca;

namespace {

const fs::path kQuickstart = fs::path(RCA_DATA_DIR) / "quickstart";

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = false;
    std::string detail;
};

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "rca-acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

double worst_fd_error(std::vector<double> params, const std::vector<double>& analytic,
                      const std::vector<std::size_t>& coords, const std::function<double(const std::vector<double>&)>& loss) {
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t i : coords) {
        const double keep = params[i];
        params[i] = keep + h;
        const double up = loss(params);
        params[i] = keep - h;
        const double down = loss(params);
        params[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(fd), std::abs(analytic[i]), 1e-7});
        worst = std::max(worst, std::abs(fd - analytic[i]) / scale);
    }
    return worst;
}

std::vector<std::size_t> sample_coords(std::size_t total, std::size_t want, Rng& rng) {
    std::vector<std::size_t> all(total);
    std::iota(all.begin(), all.end(), 0);
    want = std::min(want, total);
    for (std::size_t i = 0; i < want; ++i) std::swap(all[i], all[i + rng.index(total - i)]);
    all.resize(want);
    return all;
}

graph::HetGraph random_graph(std::size_t n, std::size_t features, Rng& rng) {
    graph::HetGraph g;
    for (std::size_t f = 0; f < features; ++f) g.feature_names.push_back("f" + std::to_string(f));
    const sim::EntityKind kinds[] = {sim::EntityKind::host, sim::EntityKind::pod, sim::EntityKind::service};
    for (std::size_t i = 0; i < n; ++i) {
        graph::HetNode node;
        node.id = "n" + std::to_string(i);
        node.kind = kinds[i % 3];
        for (std::size_t f = 0; f < features; ++f) node.features.push_back(rng.normal());
        g.nodes.push_back(std::move(node));
    }
    for (std::size_t i = 1; i < n; ++i) {
        g.edges.push_back({rng.index(i), i, static_cast<sim::EdgeKind>(rng.index(4)), rng.uniform(0.2, 1.0)});
    }
    return g;
}

// 1. Direction of perturbation strength on coupled and independent pairs.
Verdict causal_direction() {
    const auto t0 = Clock::now();
    const causal::PredictorOptions po;
    int right = 0, quiet = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        Eigen::MatrixXd s(1000, 2); // column 0 = x, column 1 = y
        s(0, 0) = rng.normal();
        s(0, 1) = rng.normal();
        for (Eigen::Index t = 1; t < 1000; ++t) {
            s(t, 1) = 0.5 * s(t - 1, 1) + rng.normal();
            s(t, 0) = 0.9 * s(t - 1, 1) + rng.normal();
        }
        causal::StrengthOptions so;
        so.seed = seed;
        const auto p = causal::fit_predictor(s, po);
        right += causal::causal_strength(*p, s, 1, 0, so).mean > causal::causal_strength(*p, s, 0, 1, so).mean;

        Eigen::MatrixXd ind(1000, 2);
        for (Eigen::Index c = 0; c < 2; ++c) {
            ind(0, c) = rng.normal();
            for (Eigen::Index t = 1; t < 1000; ++t) ind(t, c) = 0.6 * ind(t - 1, c) + rng.normal();
        }
        const auto q = causal::fit_predictor(ind, po);
        quiet += std::abs(causal::causal_strength(*q, ind, 0, 1, so).mean) < 0.1 &&
                 std::abs(causal::causal_strength(*q, ind, 1, 0, so).mean) < 0.1;
    }
    const double secs = since(t0);
    return {right >= 18 && quiet >= 18 && secs < 60.0,
            fmt::format("coupled {}/20, independent {}/20, {:.2f} s", right, quiet, secs)};
}

// 2. Closed-form AR(1) recovery.
Verdict var_recovery() {
    Eigen::MatrixXd x(500, 1);
    x(0, 0) = 1.0;
    for (Eigen::Index t = 1; t < 500; ++t) x(t, 0) = 0.5 * x(t - 1, 0);
    const double a = causal::fit_latent_var(x, 1, 1, 1e-8).coefficient(1)(0, 0);
    return {std::abs(a - 0.5) <= 1e-3, fmt::format("coefficient {:.9f}", a)};
}

// 3. Analytic gradients against central differences.
Verdict gradients() {
    Rng rng(2024);
    double tcn_worst = 0.0, gat_worst = 0.0;
    std::size_t tcn_coords = 0, gat_coords = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        causal::TcnShape shape;
        shape.features = 3;
        Eigen::MatrixXd x(64, 3);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        const auto params = causal::init_tcn_parameters(shape, seed);
        std::vector<double> grad;
        causal::TcnAutoencoder::loss(shape, params, x, &grad);
        const auto coords = sample_coords(params.size(), 60, rng);
        tcn_coords += coords.size();
        tcn_worst = std::max(tcn_worst, worst_fd_error(params, grad, coords, [&](const std::vector<double>& p) {
                                 return causal::TcnAutoencoder::loss(shape, p, x);
                             }));

        const auto g = random_graph(6, 4, rng);
        graph::NodeLabels labels;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const bool faulty = i % 2 == 0;
            labels.faulty.push_back(faulty ? 1 : 0);
            labels.fault_type.push_back(faulty ? 1 : -1);
        }
        graph::GatShape gs;
        gs.input_dim = 4;
        gs.hidden = 4;
        auto m = graph::init_gat(gs, seed);
        for (auto& v : m.params) v += 0.3 * rng.normal();
        std::vector<double> ggrad(m.params.size(), 0.0);
        graph::gat_loss(m, g, labels, &ggrad);
        const auto gcoords = sample_coords(m.params.size(), 60, rng);
        gat_coords += gcoords.size();
        gat_worst = std::max(gat_worst, worst_fd_error(m.params, ggrad, gcoords, [&](const std::vector<double>& p) {
                                 auto copy = m;
                                 copy.params = p;
                                 return graph::gat_loss(copy, g, labels);
                             }));
    }
    return {tcn_worst < 1e-4 && gat_worst < 1e-3 && tcn_coords >= 50 && gat_coords >= 50,
            fmt::format("TCN worst {:.2e} over {} coords, GAT worst {:.2e} over {} coords", tcn_worst, tcn_coords,
                        gat_worst, gat_coords)};
}

std::vector<pipeline::CaseOutcome> run_suite(const sim::Topology& topology, const std::vector<pipeline::CaseSpec>& specs,
                                             const graph::GatModel& model, const pipeline::RunConfig& config) {
    std::vector<pipeline::CaseOutcome> out;
    for (const auto& spec : specs) {
        const auto c = pipeline::simulate_case(topology, spec, config);
        out.push_back(pipeline::run_case(topology, c.bundle, c.truth, model, config, "acceptance"));
    }
    return out;
}

// 4 and 5 share the trained default model.
std::pair<Verdict, Verdict> localization_and_ablation() {
    const pipeline::ConfigValues values;
    const auto config = pipeline::make_config(values);
    const auto topology = pipeline::load_topology(config);
    const auto model = pipeline::train_model(topology, config).model;

    const auto loc = pipeline::evaluate_outcomes(run_suite(topology, pipeline::localization_suite(50), model, config),
                                                 config.fia_k);
    const Verdict c4{loc.top1 >= 0.8 && loc.chain_accuracy >= 0.7,
                     fmt::format("top-1 {:.3f}, CCA {:.3f} (edge-set F1 of all retained edges {:.3f}, localization F1 {:.3f})",
                                 loc.top1, loc.chain_accuracy, loc.edge_accuracy, loc.localization.f1)};

    const auto suite = pipeline::cross_level_suite(20);
    const auto full = pipeline::evaluate_outcomes(run_suite(topology, suite, model, config), config.fia_k);

    auto no_cross_values = values;
    no_cross_values.set("ablation.cross_level", "off");
    const auto no_cross_config = pipeline::make_config(no_cross_values);
    const auto no_cross_model = pipeline::train_model(topology, no_cross_config).model;
    const auto no_cross =
        pipeline::evaluate_outcomes(run_suite(topology, suite, no_cross_model, no_cross_config), config.fia_k);

    auto no_mask_values = values;
    no_mask_values.set("ablation.mask_explanation", "off");
    const auto no_mask_config = pipeline::make_config(no_mask_values);
    const auto no_mask = pipeline::evaluate_outcomes(run_suite(topology, suite, model, no_mask_config), config.fia_k);
    const bool mask_same = no_mask.localization.precision == full.localization.precision &&
                           no_mask.localization.recall == full.localization.recall &&
                           no_mask.localization.f1 == full.localization.f1 && no_mask.type.macro == full.type.macro &&
                           no_mask.type.micro == full.type.micro;
    const Verdict c5{no_cross.localization.f1 < full.localization.f1 && mask_same,
                     fmt::format("localization F1 full {:.3f} vs no-cross-level {:.3f}; no-mask delta F1 {:g}, macro {:g}",
                                 full.localization.f1, no_cross.localization.f1,
                                 no_mask.localization.f1 - full.localization.f1, no_mask.type.macro - full.type.macro)};
    return {c4, c5};
}

// 6. Threshold boundary of the edge filter.
Verdict filter_boundary() {
    Rng rng(1);
    causal::CausalTensor t;
    t.entities = {"a", "b", "c", "d"};
    t.signals.resize(60, 4);
    for (Eigen::Index i = 0; i < t.signals.size(); ++i) t.signals.data()[i] = rng.normal();
    t.step_windows = 10;
    causal::StrengthCube cube("all", false, t.entities, t.entities, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        cube.at(0, 1, k) = 0.31;
        cube.at(2, 3, k) = 0.29;
    }
    t.cubes.push_back(std::move(cube));
    const auto e = causal::filter_causal(t, {});
    bool kept = false, dropped = true;
    for (const auto& edge : e.edges) {
        kept = kept || (edge.source == "a" && edge.target == "b");
        dropped = dropped && !(edge.source == "c" && edge.target == "d");
    }
    return {kept && dropped, fmt::format("0.31 {}, 0.29 {}", kept ? "kept" : "dropped", dropped ? "dropped" : "kept")};
}

pipeline::ConfigValues quickstart_values() {
    pipeline::ConfigValues v;
    v.merge_ini(kQuickstart / "config.ini");
    return v;
}

fs::path simulate_quickstart(const pipeline::ConfigValues& values) {
    const auto dir = scratch("quickstart-input");
    const auto config = pipeline::make_config(values);
    const auto topology = pipeline::load_topology(config);
    const auto c =
        pipeline::simulate_case(topology, {config.sim.template_name, config.sim.seed, config.sim.decoys}, config);
    sim::write_bundle(dir, c.bundle);
    sim::write_ground_truth(dir / sim::kGroundTruthFile, c.truth);
    return dir;
}

// 7. Wall clock of the diagnose stage on the quickstart incident.
Verdict latency(const pipeline::ConfigValues& values, const fs::path& input) {
    const auto t0 = Clock::now();
    const auto run = pipeline::run_diagnose(values, {input, scratch("latency"), kQuickstart / "model.txt"}, false);
    const double wall = since(t0);
    return {wall < 2.0, fmt::format("diagnose {:.3f} s wall ({:.3f} s in stages)", wall, run.total_s)};
}

// 8. Two full runs from the same manifest.
Verdict determinism(const pipeline::ConfigValues& values, const fs::path& input) {
    std::vector<std::string> reports, evals;
    for (int k = 0; k < 2; ++k) {
        const auto run = scratch(fmt::format("determinism-{}", k));
        (void)pipeline::run_diagnose(values, {input, run, kQuickstart / "model.txt"}, false);
        reports.push_back(text::read_file((run / pipeline::kReportJsonl).string()));
        const auto out = pipeline::run_evaluate(values, {input}, kQuickstart / "model.txt", false);
        text::write_file((run / "eval.txt").string(), pipeline::format_eval(out.rows));
        evals.push_back(text::read_file((run / "eval.txt").string()));
    }
    const bool same_report = reports[0] == reports[1];
    const bool same_eval = evals[0] == evals[1];
    return {same_report && same_eval, fmt::format("report.jsonl {}, eval.txt {}", same_report ? "identical" : "differs",
                                                  same_eval ? "identical" : "differs")};
}

// 9. Property suites on random inputs.
Verdict invariants() {
    Rng rng(99);
    std::size_t violations = 0;
    std::vector<std::string> failed;
    auto note = [&](bool ok, const char* what) {
        if (ok) return;
        ++violations;
        if (std::find(failed.begin(), failed.end(), what) == failed.end()) failed.emplace_back(what);
    };

    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> xs(2 + rng.index(300));
        const double scale = std::exp(rng.uniform(-5.0, 5.0));
        const double offset = rng.uniform(-1e3, 1e3);
        for (auto& x : xs) x = offset + scale * rng.normal();
        const auto z = prep::normalize_zscore(xs);
        note(std::abs(prep::mean(z)) < 1e-9, "z-score mean");
        note(std::abs(std::sqrt(prep::population_variance(z)) - 1.0) < 1e-9, "z-score std");
    }

    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_graph(3 + rng.index(8), 4, rng);
        graph::GatShape s;
        s.input_dim = 4;
        s.type_aware = trial % 2 == 0;
        auto m = graph::init_gat(s, static_cast<std::uint64_t>(trial));
        for (auto& v : m.params) v += 0.3 * rng.normal();
        for (const auto& layer : graph::attention_forward(m, g).attention) {
            for (const auto& head : layer) {
                for (const auto& hood : head) {
                    double total = 0.0;
                    for (const auto& a : hood) total += a.alpha;
                    note(std::abs(total - 1.0) < 1e-9, "attention sum");
                }
            }
        }
        const auto p = graph::predict(m, g);
        for (const auto& t : p.types) {
            note(std::abs(std::accumulate(t.begin(), t.end(), 0.0) - 1.0) < 1e-9, "type softmax sum");
        }
        const std::array<double, 3> scores{rng.normal() * 5, rng.normal() * 5, rng.normal() * 5};
        const auto w = prep::modal_softmax(scores);
        note(std::abs(w[0] + w[1] + w[2] - 1.0) < 1e-9, "modal softmax sum");
    }

    const std::vector<std::string> ids{"a", "b", "c", "d", "e", "f"};
    for (int trial = 0; trial < 100; ++trial) {
        causal::CausalEdgeSet set;
        for (const auto& s : ids) {
            for (const auto& t : ids) {
                if (s == t || rng.uniform() > 0.3) continue;
                causal::CausalEdge e;
                e.source = s;
                e.target = t;
                e.profile = {rng.uniform(), rng.uniform(), rng.uniform()};
                e.strength = e.profile[0];
                set.edges.push_back(e);
            }
        }
        double total = 0.0;
        for (const auto& r : causal::pagerank_rank(set, ids)) total += r.score;
        note(std::abs(total - 1.0) < 1e-9, "pagerank sum");
    }

    const std::vector<std::string> words{"read", "write", "open", "close", "file", "socket", "ok", "failed", "retry"};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::vector<std::string>> messages(1 + rng.index(200));
        for (auto& m : messages) {
            const std::size_t len = 1 + rng.index(6);
            for (std::size_t k = 0; k < len; ++k) {
                m.push_back(rng.uniform() < 0.2 ? std::to_string(rng.index(1000)) : words[rng.index(words.size())]);
            }
        }
        const auto t = prep::mine_log_templates(messages, rng.uniform(0.3, 1.0), 2 + rng.index(4));
        std::vector<std::size_t> counted(t.templates.size(), 0);
        bool ok = t.assignment.size() == messages.size();
        for (std::size_t i = 0; ok && i < messages.size(); ++i) {
            ok = t.assignment[i] < t.templates.size();
            if (!ok) break;
            ++counted[t.assignment[i]];
            const auto& tpl = t.templates[t.assignment[i]];
            ok = tpl.tokens.size() == messages[i].size();
            for (std::size_t k = 0; ok && k < tpl.tokens.size(); ++k) {
                ok = tpl.tokens[k] == prep::kWildcard || tpl.tokens[k] == messages[i][k];
            }
        }
        for (std::size_t k = 0; ok && k < counted.size(); ++k) ok = counted[k] == t.templates[k].count;
        note(ok, "template partition");
    }

    const auto topology = sim::build_topology(sim::standard_topology_spec(3, 6, 4));
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto g = sim::generate_scenario(topology, sim::scenario_templates()[seed * 3], seed);
        auto bundle = sim::simulate_telemetry(topology, g.scenario, 603, 1, seed);
        bundle.logs.push_back({-1000, "h1", sim::LogLevel::info, "early bird"});
        const auto pre = prep::preprocess(bundle, topology.entities());
        for (const auto* s : {&pre.metrics, &pre.logs, &pre.spans}) {
            note(s->kept + s->dropped == s->ingested, "tensor totality");
        }
    }

    std::string detail = violations == 0 ? "z-score, softmax/attention, PageRank, template partition, tensor totality"
                                         : fmt::format("{} violations: {}", violations, fmt::join(failed, ", "));
    return {violations == 0, detail};
}

} // namespace

int main() {
    std::vector<std::pair<std::string, Verdict>> results;
    auto record = [&](int n, const char* name, Verdict v) {
        std::cout << fmt::format("criterion {} {}: {} ({})\n", n, name, v.pass ? "PASS" : "FAIL", v.detail) << std::flush;
        results.emplace_back(name, std::move(v));
    };
    try {
        record(1, "causal direction", causal_direction());
        record(2, "VAR recovery", var_recovery());
        record(3, "gradient correctness", gradients());
        auto [c4, c5] = localization_and_ablation();
        record(4, "end-to-end localization", std::move(c4));
        record(5, "ablation directionality", std::move(c5));
        record(6, "filter boundary", filter_boundary());
        const auto values = quickstart_values();
        const auto input = simulate_quickstart(values);
        record(7, "quickstart latency", latency(values, input));
        record(8, "determinism", determinism(values, input));
        record(9, "invariant suites", invariants());
    } catch (const std::exception& e) {
        std::cout << "acceptance aborted: " << e.what() << "\n";
        return 1;
    }
    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.second.pass; });
    std::cout << fmt::format("{} of {} criteria passed\n", results.size() - static_cast<std::size_t>(failed), results.size());
    return failed == 0 ? 0 : 1;
}
