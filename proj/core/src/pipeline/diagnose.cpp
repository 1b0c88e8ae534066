#include "rca/pipeline/diagnose.hpp"

#include "rca/causal/edges_io.hpp"
#include "rca/common/error.hpp"
#include "rca/common/rng.hpp"
#include "rca/common/text.hpp"
#include "rca/graph/hetgraph.hpp"
#include "rca/graph/model_io.hpp"
#include "rca/prep/fusion.hpp"
#include "rca/sim/telemetry_io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <chrono>

namespace rca::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

sim::Topology load_topology(const RunConfig& config) {
    if (config.sim.topology.empty()) return sim::build_topology(sim::standard_topology_spec(3, 6, 4));
    try {
        return sim::build_topology(sim::parse_topology_spec(text::read_file(config.sim.topology)));
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", config.sim.topology, e.what()));
    }
}

CausalResult run_causal(const prep::FeatureTensor& tensor, const sim::Topology& topology, const RunConfig& config) {
    CausalResult out;
    out.tensor = causal::discover_causality(tensor, topology, config.discovery);
    out.edges = causal::filter_causal(out.tensor, config.filter);
    out.ranking = causal::pagerank_rank(out.edges, tensor.entities, config.pagerank);
    return out;
}

graph::HetGraph incident_graph(const prep::FeatureTensor& tensor, const sim::Topology& topology,
                               const CausalResult& causal, const RunConfig& config) {
    const auto fused = prep::fuse_modalities(tensor, config.ablation.modal_attention);
    const auto inputs = graph::node_inputs(tensor, fused, topology, causal.edges, causal.ranking);
    return graph::build_hetgraph(topology, inputs, causal.edges);
}

void check_model(const graph::GatModel& model, const graph::HetGraph& graph) {
    if (model.feature_names != graph.feature_names) {
        throw InputError(fmt::format("model expects {} input features that do not match this run's {} features; "
                                     "retrain with the current preprocessing settings",
                                     model.feature_names.size(), graph.feature_names.size()));
    }
}

Explained explain_incident(const graph::GatModel& model, const graph::HetGraph& graph, const graph::Prediction& prediction,
                           const CausalResult& causal, const RunConfig& config, const std::string& run_id) {
    Explained out;
    out.payload.run_id = run_id;
    out.payload.prediction = prediction;
    out.payload.ranking = causal.ranking;
    const auto flagged = prediction.flagged_ids();
    if (config.ablation.mask_explanation) out.payload.importance = explain::importance_table(model, graph, flagged, config.mask);
    out.payload.chain = explain::build_causal_chain(causal.edges, causal.ranking, flagged);
    out.report = explain::render_report(out.payload);
    return out;
}

Diagnosis diagnose_bundle(const sim::TelemetryBundle& bundle, const sim::Topology& topology,
                          const graph::GatModel& model, const RunConfig& config, const std::string& run_id) {
    Diagnosis d;
    const auto pre = prep::preprocess(bundle, topology.entities(), config.prep);
    d.causal = run_causal(pre.tensor, topology, config);
    d.graph = incident_graph(pre.tensor, topology, d.causal, config);
    check_model(model, d.graph);
    d.prediction = graph::predict(model, d.graph);
    d.explained = explain_incident(model, d.graph, d.prediction, d.causal, config, run_id);
    return d;
}

std::string ranking_to_jsonl(const std::vector<causal::RankedEntity>& ranking) {
    std::string out;
    for (const auto& r : ranking) out += json{{"entity", r.id}, {"score", r.score}}.dump() + "\n";
    return out;
}

std::vector<causal::RankedEntity> ranking_from_jsonl(std::string_view content) {
    std::vector<causal::RankedEntity> out;
    std::size_t lineno = 0;
    for (const auto line : text::split_lines(content)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            const auto r = json::parse(line);
            out.push_back({r.at("entity").get<std::string>(), r.at("score").get<double>()});
        } catch (const json::exception& e) {
            throw InputError(fmt::format("{}:{}: {}", kRankingFile, lineno, e.what()));
        }
    }
    return out;
}

std::string prediction_to_jsonl(const graph::Prediction& p) {
    std::string out;
    for (std::size_t i = 0; i < p.ids.size(); ++i) {
        out += json{{"entity", p.ids[i]},
                    {"kind", sim::to_string(p.kinds[i])},
                    {"probability", p.probability[i]},
                    {"flagged", p.flagged(i)},
                    {"fault_type", p.type_of(i)},
                    {"distribution", p.types[i]}}
                   .dump() +
               "\n";
    }
    return out;
}

graph::Prediction prediction_from_jsonl(std::string_view content) {
    graph::Prediction p;
    std::size_t lineno = 0;
    for (const auto line : text::split_lines(content)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            const auto r = json::parse(line);
            const auto kind = sim::parse_entity_kind(r.at("kind").get<std::string>());
            if (!kind) throw InputError(fmt::format("{}:{}: field 'kind' is not an entity kind", kPredictionFile, lineno));
            auto dist = r.at("distribution").get<std::vector<double>>();
            if (dist.size() != sim::fault_catalog(*kind).size()) {
                throw InputError(fmt::format("{}:{}: field 'distribution' has the wrong size", kPredictionFile, lineno));
            }
            p.ids.push_back(r.at("entity").get<std::string>());
            p.kinds.push_back(*kind);
            p.probability.push_back(r.at("probability").get<double>());
            p.types.push_back(std::move(dist));
        } catch (const json::exception& e) {
            throw InputError(fmt::format("{}:{}: {}", kPredictionFile, lineno, e.what()));
        }
    }
    return p;
}

std::string build_manifest(const ConfigValues& values, const std::vector<fs::path>& inputs) {
    const auto config = values.format();
    std::string out = "rca-manifest 1\n";
    out += fmt::format("tool_version {}\n", kToolVersion);
    out += fmt::format("config_hash {:016x}\n", fnv1a(config));
    for (const auto& file : inputs) {
        out += fmt::format("input {} {:016x}\n", file.filename().string(), fnv1a(text::read_file(file.string())));
    }
    out += "\n";
    out += config;
    return out;
}

namespace {

class StageClock {
public:
    explicit StageClock(DiagnoseRun& run) : run_(run) {}

    template <class F>
    void stage(const std::string& name, bool skip, F&& body) {
        const auto start = std::chrono::steady_clock::now();
        body(skip);
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        run_.stages.push_back({name, s, skip});
        run_.total_s += s;
    }

private:
    DiagnoseRun& run_;
};

bool all_exist(const fs::path& dir, std::initializer_list<const char*> files) {
    for (const char* f : files) {
        if (!fs::exists(dir / f)) return false;
    }
    return true;
}

void write(const fs::path& dir, const char* name, std::string_view content) {
    text::write_file((dir / name).string(), content);
}

} // namespace

DiagnoseRun run_diagnose(const ConfigValues& values, const DiagnosePaths& paths, bool resume) {
    const RunConfig config = make_config(values);
    for (const char* f : {sim::kMetricsFile, sim::kLogsFile, sim::kSpansFile}) {
        if (!fs::exists(paths.input / f)) throw InputError(fmt::format("cannot open {}", (paths.input / f).string()));
    }
    if (!fs::exists(paths.model)) throw InputError(fmt::format("cannot open {}", paths.model.string()));
    fs::create_directories(paths.run);

    const auto manifest = build_manifest(values, {paths.input / sim::kMetricsFile, paths.input / sim::kLogsFile,
                                                  paths.input / sim::kSpansFile, paths.model});
    const auto manifest_path = paths.run / kManifestFile;
    if (resume && fs::exists(manifest_path) && text::read_file(manifest_path.string()) != manifest) {
        throw InputError(fmt::format("{} was written for another configuration or input; rerun without --resume",
                                     manifest_path.string()));
    }
    write(paths.run, kManifestFile, manifest);

    DiagnoseRun run;
    run.run_id = fmt::format("run-{:016x}", fnv1a(manifest));
    const auto topology = load_topology(config);
    const auto model = graph::read_gat_model(paths.model);
    StageClock clock(run);

    prep::FeatureTensor tensor;
    clock.stage("preprocess", resume && all_exist(paths.run, {"tensor.bin", "schema.txt"}), [&](bool skip) {
        if (skip) {
            tensor = prep::read_tensor(paths.run);
            return;
        }
        const auto bundle = sim::read_bundle(paths.input);
        auto pre = prep::preprocess(bundle, topology.entities(), config.prep);
        tensor = std::move(pre.tensor);
        prep::write_tensor(paths.run, tensor);
    });

    CausalResult causal;
    clock.stage("causal", resume && all_exist(paths.run, {kEdgesFile, kRankingFile}), [&](bool skip) {
        if (skip) {
            causal.edges = causal::read_edges_jsonl(paths.run / kEdgesFile);
            causal.ranking = ranking_from_jsonl(text::read_file((paths.run / kRankingFile).string()));
            return;
        }
        causal = run_causal(tensor, topology, config);
        write(paths.run, kEdgesFile, causal::edges_to_jsonl(causal.edges));
        write(paths.run, kRankingFile, ranking_to_jsonl(causal.ranking));
        write(paths.run, kStrengthsFile, causal::strengths_to_csv(causal.tensor));
    });

    graph::HetGraph graph;
    graph::Prediction prediction;
    clock.stage("graph", resume && all_exist(paths.run, {kGraphFile, kPredictionFile}), [&](bool skip) {
        if (skip) {
            graph = graph::graph_from_jsonl(text::read_file((paths.run / kGraphFile).string()));
            prediction = prediction_from_jsonl(text::read_file((paths.run / kPredictionFile).string()));
            return;
        }
        graph = incident_graph(tensor, topology, causal, config);
        check_model(model, graph);
        prediction = graph::predict(model, graph);
        write(paths.run, kGraphFile, graph::graph_to_jsonl(graph));
        write(paths.run, kPredictionFile, prediction_to_jsonl(prediction));
    });
    run.flagged = prediction.flagged_ids();

    clock.stage("explain", resume && all_exist(paths.run, {kReportText, kReportJsonl}), [&](bool skip) {
        if (skip) return;
        const auto explained = explain_incident(model, graph, prediction, causal, config, run.run_id);
        write(paths.run, kReportText, explained.report.text);
        write(paths.run, kReportJsonl, explained.report.jsonl);
        write(paths.run, kChainCsv, explain::chain_plot_csv(explained.payload));
        write(paths.run, kChainPlot, explain::chain_plot_vegalite(explained.payload));
    });

    std::string timings;
    for (const auto& s : run.stages) {
        timings += fmt::format("{} {:.6f}{}\n", s.stage, s.seconds, s.skipped ? " resumed" : "");
    }
    timings += fmt::format("total {:.6f}\n", run.total_s);
    write(paths.run, kTimingsFile, timings);
    return run;
}

} // namespace rca::pipeline
