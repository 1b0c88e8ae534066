#pragma once

#include "rca/eval/latency.hpp"
#include "rca/eval/metrics.hpp"
#include "rca/graph/train.hpp"
#include "rca/pipeline/config.hpp"
#include "rca/pipeline/diagnose.hpp"
#include "rca/sim/scenario.hpp"
#include "rca/sim/telemetry.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rca::pipeline {

struct CaseSpec {
    std::string template_name;
    std::uint64_t seed = 0;
    std::size_t decoys = 0;
};

// Single-root cascading incidents over every non-nominal template.
std::vector<CaseSpec> localization_suite(std::size_t cases, std::uint64_t first_seed = 1000);
// Host- and pod-rooted incidents (their chains cross levels) with decoys.
std::vector<CaseSpec> cross_level_suite(std::size_t cases, std::uint64_t first_seed = 9000, std::size_t decoys = 2);
// Training incidents: every template including nominal, seeds derived from
// the GAT seed so they never coincide with evaluation suites.
std::vector<CaseSpec> training_suite(const RunConfig& config);

struct SimulatedCase {
    sim::TelemetryBundle bundle;
    sim::GroundTruth truth;
};

SimulatedCase simulate_case(const sim::Topology& topology, const CaseSpec& spec, const RunConfig& config);

// Simulates the training suite and fits the GAT on the resulting graphs.
graph::TrainResult train_model(const sim::Topology& topology, const RunConfig& config);

struct CaseOutcome {
    sim::GroundTruth truth;
    Diagnosis diagnosis;
    double diagnose_s = 0.0;
};

CaseOutcome run_case(const sim::Topology& topology, const sim::TelemetryBundle& bundle, const sim::GroundTruth& truth,
                     const graph::GatModel& model, const RunConfig& config, const std::string& run_id);

struct EvalResult {
    std::size_t cases = 0;
    eval::Prf localization;      // mean over cases
    eval::TypeF1 type;           // pooled over truly faulty entities
    double chain_accuracy = 1.0; // mean CCA of the propagation chain
    double edge_accuracy = 1.0;  // mean CCA of the full retained edge set
    std::optional<double> feature_accuracy;
    double top1 = 0.0; // share of cases whose PageRank rank-1 is the true root
};

EvalResult evaluate_outcomes(const std::vector<CaseOutcome>& outcomes, std::size_t fia_k);

struct EvalRow {
    std::string name;
    EvalResult result;
};

// Aligned key/value table, deterministic (no timings).
std::string format_eval(const std::vector<EvalRow>& rows);

// The configured pipeline plus one row per ablation switch that is still on
// in `values`. Every row retrains the GAT under its own configuration
// (identical training inputs share one model).
struct EvaluateOutput {
    std::vector<EvalRow> rows;
    eval::LatencyStats latency; // diagnose stage of the full pipeline
};

EvaluateOutput run_evaluate(const ConfigValues& values, const std::vector<std::filesystem::path>& case_dirs,
                            const std::optional<std::filesystem::path>& model_path, bool ablations);

} // namespace rca::pipeline
