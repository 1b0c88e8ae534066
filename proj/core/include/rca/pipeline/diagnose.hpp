#pragma once

#include "rca/explain/report.hpp"
#include "rca/graph/gat.hpp"
#include "rca/pipeline/config.hpp"
#include "rca/sim/topology.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rca::pipeline {

// Artifact names inside a run directory.
inline constexpr const char* kEdgesFile = "causal_edges.jsonl";
inline constexpr const char* kRankingFile = "ranking.jsonl";
inline constexpr const char* kStrengthsFile = "strengths.csv";
inline constexpr const char* kGraphFile = "graph.jsonl";
inline constexpr const char* kPredictionFile = "prediction.jsonl";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kReportJsonl = "report.jsonl";
inline constexpr const char* kChainCsv = "chain.csv";
inline constexpr const char* kChainPlot = "chain.vl.json";
inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kTimingsFile = "timings.txt";
inline constexpr const char* kToolVersion = "1.0.0";

sim::Topology load_topology(const RunConfig& config);

struct CausalResult {
    causal::CausalEdgeSet edges;
    std::vector<causal::RankedEntity> ranking;
    causal::CausalTensor tensor; // empty when loaded from disk
};

CausalResult run_causal(const prep::FeatureTensor& tensor, const sim::Topology& topology, const RunConfig& config);

graph::HetGraph incident_graph(const prep::FeatureTensor& tensor, const sim::Topology& topology,
                               const CausalResult& causal, const RunConfig& config);

struct Explained {
    explain::ReportPayload payload;
    explain::DiagnosticReport report;
};

// Importance for every flagged entity (unless mask explanation is ablated),
// the propagation chain and the rendered report.
Explained explain_incident(const graph::GatModel& model, const graph::HetGraph& graph, const graph::Prediction& prediction,
                           const CausalResult& causal, const RunConfig& config, const std::string& run_id);

// Throws InputError when the model was trained on another feature schema.
void check_model(const graph::GatModel& model, const graph::HetGraph& graph);

struct Diagnosis {
    CausalResult causal;
    graph::HetGraph graph;
    graph::Prediction prediction;
    Explained explained;
};

// Whole online pipeline in memory.
Diagnosis diagnose_bundle(const sim::TelemetryBundle& bundle, const sim::Topology& topology,
                          const graph::GatModel& model, const RunConfig& config, const std::string& run_id);

std::string ranking_to_jsonl(const std::vector<causal::RankedEntity>& ranking);
std::vector<causal::RankedEntity> ranking_from_jsonl(std::string_view text);
std::string prediction_to_jsonl(const graph::Prediction& prediction);
graph::Prediction prediction_from_jsonl(std::string_view text);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
    bool skipped = false;
};

struct DiagnoseRun {
    std::string run_id;
    std::vector<StageTiming> stages;
    double total_s = 0.0;
    std::vector<std::string> flagged;
};

struct DiagnosePaths {
    std::filesystem::path input; // telemetry directory
    std::filesystem::path run;   // artifact directory
    std::filesystem::path model;
};

// Stages: preprocess, causal, graph, explain. With `resume`, a stage whose
// artifacts already exist is loaded instead of recomputed; the manifest must
// match the current configuration and inputs.
DiagnoseRun run_diagnose(const ConfigValues& values, const DiagnosePaths& paths, bool resume);

// Manifest text: tool version, config hash, input file hashes, model hash
// and the canonical configuration.
std::string build_manifest(const ConfigValues& values, const std::vector<std::filesystem::path>& inputs);

} // namespace rca::pipeline
