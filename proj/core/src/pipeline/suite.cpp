#include "rca/pipeline/suite.hpp"

#include "rca/common/error.hpp"
#include "rca/common/rng.hpp"
#include "rca/explain/importance.hpp"
#include "rca/graph/model_io.hpp"
#include "rca/prep/tensor.hpp"
#include "rca/sim/telemetry_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

namespace rca::pipeline {

namespace fs = std::filesystem;

std::vector<CaseSpec> localization_suite(std::size_t cases, std::uint64_t first_seed) {
    const auto templates = sim::scenario_templates();
    std::vector<std::string> faults;
    for (const auto& t : templates) {
        if (t != "nominal") faults.push_back(t);
    }
    std::vector<CaseSpec> out;
    for (std::size_t i = 0; i < cases; ++i) out.push_back({faults[i % faults.size()], first_seed + i, 0});
    return out;
}

std::vector<CaseSpec> cross_level_suite(std::size_t cases, std::uint64_t first_seed, std::size_t decoys) {
    std::vector<std::string> faults;
    for (const auto& t : sim::scenario_templates()) {
        if (t.rfind("host-", 0) == 0 || t.rfind("pod-", 0) == 0) faults.push_back(t);
    }
    std::vector<CaseSpec> out;
    for (std::size_t i = 0; i < cases; ++i) out.push_back({faults[i % faults.size()], first_seed + i, decoys});
    return out;
}

std::vector<CaseSpec> training_suite(const RunConfig& config) {
    const auto templates = sim::scenario_templates();
    std::vector<CaseSpec> out;
    for (std::size_t i = 0; i < config.train_cases; ++i) {
        out.push_back({templates[i % templates.size()], derive_seed(config.train.seed, {0x747261696eULL, i}),
                       config.train_decoys});
    }
    return out;
}

SimulatedCase simulate_case(const sim::Topology& topology, const CaseSpec& spec, const RunConfig& config) {
    sim::ScenarioOptions options;
    options.decoys = spec.decoys;
    options.injection_s = config.sim.injection_s;
    auto generated = sim::generate_scenario(topology, spec.template_name, spec.seed, options);
    sim::SimulationOptions sim_options;
    sim_options.sampling_rate = config.sim.sampling_rate;
    SimulatedCase out;
    out.bundle = sim::simulate_telemetry(topology, generated.scenario, config.sim.duration_s, config.sim.tick_s,
                                         spec.seed, sim_options);
    out.truth = std::move(generated.truth);
    return out;
}

graph::TrainResult train_model(const sim::Topology& topology, const RunConfig& config) {
    std::vector<graph::LabeledGraph> graphs;
    for (const auto& spec : training_suite(config)) {
        const auto c = simulate_case(topology, spec, config);
        const auto pre = prep::preprocess(c.bundle, topology.entities(), config.prep);
        const auto causal = run_causal(pre.tensor, topology, config);
        auto g = incident_graph(pre.tensor, topology, causal, config);
        auto labels = graph::labels_from_truth(g, c.truth);
        graphs.push_back({std::move(g), std::move(labels)});
    }
    graph::GatShape shape = config.gat;
    shape.input_dim = graphs.front().graph.feature_dim();
    auto model = graph::init_gat(shape, config.train.seed);
    model.feature_names = graphs.front().graph.feature_names;
    return graph::train_gat(std::move(model), graphs, config.train);
}

CaseOutcome run_case(const sim::Topology& topology, const sim::TelemetryBundle& bundle, const sim::GroundTruth& truth,
                     const graph::GatModel& model, const RunConfig& config, const std::string& run_id) {
    CaseOutcome out;
    out.truth = truth;
    const auto start = std::chrono::steady_clock::now();
    out.diagnosis = diagnose_bundle(bundle, topology, model, config, run_id);
    out.diagnose_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

EvalResult evaluate_outcomes(const std::vector<CaseOutcome>& outcomes, std::size_t fia_k) {
    EvalResult r;
    r.cases = outcomes.size();
    if (outcomes.empty()) return r;
    std::vector<std::string> classes;
    for (std::size_t k = 0; k < sim::kEntityKindCount; ++k) {
        for (const auto& f : sim::fault_catalog(static_cast<sim::EntityKind>(k))) classes.emplace_back(f.name);
    }
    std::vector<std::string> predicted_types, true_types;
    double p = 0.0, rec = 0.0, f1 = 0.0, cca = 0.0, eca = 0.0, top1 = 0.0, fia = 0.0;
    std::size_t fia_cases = 0;
    for (const auto& o : outcomes) {
        const auto& d = o.diagnosis;
        const auto flagged = d.prediction.flagged_ids();
        const auto prf = eval::localization_prf({flagged.begin(), flagged.end()}, {o.truth.faulty.begin(), o.truth.faulty.end()});
        p += prf.precision;
        rec += prf.recall;
        f1 += prf.f1;
        for (std::size_t i = 0; i < d.prediction.ids.size(); ++i) {
            const auto it = o.truth.fault_types.find(d.prediction.ids[i]);
            if (it == o.truth.fault_types.end()) continue;
            predicted_types.push_back(d.prediction.type_of(i));
            true_types.push_back(it->second);
        }
        eval::EdgeSet truth_edges, chain_edges, retained;
        for (const auto& l : o.truth.chain) truth_edges.insert({l.source, l.target});
        for (const auto& l : d.explained.payload.chain.links) chain_edges.insert({l.source, l.target});
        for (const auto& e : d.causal.edges.edges) retained.insert({e.source, e.target});
        cca += eval::causal_chain_accuracy(chain_edges, truth_edges);
        eca += eval::causal_chain_accuracy(retained, truth_edges);
        if (!d.causal.ranking.empty() && d.causal.ranking.front().id == o.truth.root) top1 += 1.0;

        // Only entities that were explained (flagged) are scored.
        std::map<std::string, std::vector<std::string>> top, annotated;
        for (const auto& entry : d.explained.payload.importance) {
            const auto it = o.truth.key_features.find(entry.entity);
            if (it == o.truth.key_features.end()) continue;
            top[entry.entity] = explain::top_metrics(entry, fia_k);
            annotated[entry.entity] = it->second;
        }
        if (const auto v = eval::feature_importance_accuracy(top, annotated)) {
            fia += *v;
            ++fia_cases;
        }
    }
    const double n = static_cast<double>(outcomes.size());
    r.localization = {p / n, rec / n, f1 / n};
    r.type = eval::type_f1(predicted_types, true_types, classes);
    r.chain_accuracy = cca / n;
    r.edge_accuracy = eca / n;
    r.top1 = top1 / n;
    if (fia_cases) r.feature_accuracy = fia / static_cast<double>(fia_cases);
    return r;
}

std::string format_eval(const std::vector<EvalRow>& rows) {
    std::string out = "# localization precision is TP / flagged (standard precision, not TP / all entities)\n";
    out += "# empty predicted and true sets score 1; type F1 pairs every truly faulty entity with its argmax type\n";
    for (const auto& row : rows) {
        const auto& r = row.result;
        out += fmt::format("\n[{}]\n", row.name);
        auto line = [&](std::string_view key, std::string value) { out += fmt::format("{:<30} {}\n", key, value); };
        auto num = [](double v) { return fmt::format("{:.6f}", v); };
        line("cases", std::to_string(r.cases));
        line("localization_precision", num(r.localization.precision));
        line("localization_recall", num(r.localization.recall));
        line("localization_f1", num(r.localization.f1));
        line("type_macro_f1", num(r.type.macro));
        line("type_micro_f1", num(r.type.micro));
        line("causal_chain_accuracy", num(r.chain_accuracy));
        line("causal_edge_accuracy", num(r.edge_accuracy));
        line("feature_importance_accuracy", r.feature_accuracy ? num(*r.feature_accuracy) : std::string("absent"));
        line("top1_root", num(r.top1));
    }
    return out;
}

namespace {

// Settings that change the trained model; explanation settings do not.
std::string training_key(const ConfigValues& values) {
    std::string key;
    for (const auto& [k, v] : values.values()) {
        if (k.rfind("explain.", 0) == 0 || k == "ablation.mask_explanation") continue;
        key += k + "=" + v + "\n";
    }
    return key;
}

} // namespace

EvaluateOutput run_evaluate(const ConfigValues& values, const std::vector<fs::path>& case_dirs,
                            const std::optional<fs::path>& model_path, bool ablations) {
    if (case_dirs.empty()) throw InputError("evaluation suite is empty");
    std::vector<SimulatedCase> cases;
    for (const auto& dir : case_dirs) {
        cases.push_back({sim::read_bundle(dir), sim::read_ground_truth(dir / sim::kGroundTruthFile)});
    }

    std::vector<std::pair<std::string, ConfigValues>> variants{{"full", values}};
    if (ablations) {
        for (const auto* name : {"cross_level", "type_attention", "modal_attention", "mask_explanation"}) {
            const std::string key = fmt::format("ablation.{}", name);
            ConfigValues v = values;
            if (v.get(key) == "off") continue;
            v.set(key, "off");
            std::string label = fmt::format("no-{}", name);
            std::replace(label.begin(), label.end(), '_', '-');
            variants.emplace_back(label, v);
        }
    }

    EvaluateOutput out;
    std::map<std::string, graph::GatModel> models;
    if (model_path) models[training_key(values)] = graph::read_gat_model(*model_path);
    for (const auto& [name, v] : variants) {
        const auto config = make_config(v);
        const auto topology = load_topology(config);
        const auto key = training_key(v);
        if (!models.count(key)) models[key] = train_model(topology, config).model;
        std::vector<CaseOutcome> outcomes;
        for (std::size_t i = 0; i < cases.size(); ++i) {
            outcomes.push_back(run_case(topology, cases[i].bundle, cases[i].truth, models[key], config,
                                        case_dirs[i].filename().string()));
        }
        if (name == "full") {
            std::vector<double> samples;
            for (const auto& o : outcomes) samples.push_back(o.diagnose_s);
            out.latency = eval::latency_from_samples(samples);
        }
        out.rows.push_back({name, evaluate_outcomes(outcomes, config.fia_k)});
    }
    return out;
}

} // namespace rca::pipeline
