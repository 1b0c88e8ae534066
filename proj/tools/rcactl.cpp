// rcactl: simulate, train, diagnose, evaluate, report.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"
#include "rca/explain/report.hpp"
#include "rca/graph/model_io.hpp"
#include "rca/pipeline/config.hpp"
#include "rca/pipeline/diagnose.hpp"
#include "rca/pipeline/suite.hpp"
#include "rca/sim/telemetry_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace rca;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kInternal = 3;
constexpr double kLatencyTarget = 2.0;

// Options shared by every subcommand that runs part of the pipeline.
struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags; // dedicated flags, applied last

    pipeline::ConfigValues values() const {
        pipeline::ConfigValues v;
        if (!config.empty()) {
            if (!fs::exists(config)) throw InputError(fmt::format("cannot open {}", config));
            v.merge_ini(config);
        }
        for (const auto& s : sets) v.assign(s);
        for (const auto& [k, value] : flags) v.set(k, value);
        return v;
    }
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config, "INI configuration file");
    app->add_option("--set", c.sets, "override one setting, section.key=value (repeatable)");
}

// A string flag that writes into a config key when given.
void add_key(CLI::App* app, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [&c, key](const std::string& v) { c.flags[key] = v; }, help);
}

void add_switch(CLI::App* app, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_flag_callback(flag, [&c, key] { c.flags[key] = "off"; }, help);
}

int simulate(const Common& common, const fs::path& out) {
    const auto values = common.values();
    const auto config = pipeline::make_config(values);
    const auto topology = pipeline::load_topology(config);
    const pipeline::CaseSpec spec{config.sim.template_name, config.sim.seed, config.sim.decoys};
    const auto c = pipeline::simulate_case(topology, spec, config);
    fs::create_directories(out);
    sim::write_bundle(out, c.bundle);
    sim::write_ground_truth(out / sim::kGroundTruthFile, c.truth);
    sim::ScenarioOptions options;
    options.decoys = spec.decoys;
    options.injection_s = config.sim.injection_s;
    text::write_file((out / "scenario.txt").string(),
                     sim::format_scenario(sim::generate_scenario(topology, spec.template_name, spec.seed, options).scenario));
    text::write_file((out / "topology.txt").string(), sim::format_topology_spec(topology.spec()));
    text::write_file((out / "config.ini").string(), values.format());
    std::cout << fmt::format("{}: {} metric points, {} log lines, {} spans; root {} ({})\n", out.string(),
                             c.bundle.metrics.size(), c.bundle.logs.size(), c.bundle.spans.size(),
                             c.truth.root.empty() ? "none" : c.truth.root, spec.template_name);
    return 0;
}

int train(const Common& common, const fs::path& out, const std::string& history) {
    const auto config = pipeline::make_config(common.values());
    const auto topology = pipeline::load_topology(config);
    const auto result = pipeline::train_model(topology, config);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    graph::write_gat_model(out, result.model);
    if (!history.empty()) {
        std::string csv = "epoch,train_loss,validation_loss\n";
        for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
            csv += fmt::format("{},{},{}\n", i + 1, text::exact(result.loss_history[i]),
                               text::exact(result.validation_history[i]));
        }
        text::write_file(history, csv);
    }
    std::cout << fmt::format("trained on {} cases: {} epochs{}, best epoch {} (train {:.4f}, validation {:.4f}) -> {}\n",
                             config.train_cases, result.loss_history.size(), result.stopped_early ? " (early stop)" : "",
                             result.best_epoch + 1, result.loss_history[result.best_epoch],
                             result.validation_history[result.best_epoch], out.string());
    return 0;
}

int diagnose(const Common& common, const fs::path& input, fs::path run, const fs::path& model, bool resume) {
    if (run.empty()) run = input;
    const auto result = pipeline::run_diagnose(common.values(), {input, run, model}, resume);
    for (const auto& s : result.stages) {
        std::cout << fmt::format("stage {:<10} {:>8.3f} s{}\n", s.stage, s.seconds, s.skipped ? " (resumed)" : "");
    }
    std::cout << fmt::format("{}: {} flagged{}{}\n", result.run_id, result.flagged.size(),
                             result.flagged.empty() ? "" : ": ", text::join(result.flagged, ", "));
    std::cout << fmt::format("diagnose time {:.3f} s (target {:.1f} s: {})\n", result.total_s, kLatencyTarget,
                             result.total_s < kLatencyTarget ? "met" : "missed");
    std::cout << fmt::format("report: {}\n", (run / pipeline::kReportText).string());
    return 0;
}

std::vector<fs::path> suite_dirs(const std::vector<std::string>& cases, const std::string& suite) {
    std::vector<fs::path> out(cases.begin(), cases.end());
    if (!suite.empty()) {
        if (!fs::is_directory(suite)) throw InputError(fmt::format("cannot open {}", suite));
        std::vector<fs::path> found;
        for (const auto& entry : fs::directory_iterator(suite)) {
            if (entry.is_directory() && fs::exists(entry.path() / sim::kGroundTruthFile)) found.push_back(entry.path());
        }
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    for (const auto& d : out) {
        if (!fs::exists(d / sim::kGroundTruthFile)) {
            throw InputError(fmt::format("cannot open {}", (d / sim::kGroundTruthFile).string()));
        }
    }
    if (out.empty()) throw InputError("evaluation suite is empty");
    return out;
}

int evaluate(const Common& common, const std::vector<std::string>& cases, const std::string& suite,
             const std::string& model, const fs::path& out, bool ablations) {
    const auto dirs = suite_dirs(cases, suite);
    const auto values = common.values();
    const auto result = pipeline::run_evaluate(
        values, dirs, model.empty() ? std::nullopt : std::optional<fs::path>(model), ablations);
    const auto table = pipeline::format_eval(result.rows);
    fs::create_directories(out);
    text::write_file((out / "eval.txt").string(), table);
    const auto& l = result.latency;
    text::write_file((out / "latency.txt").string(),
                     fmt::format("cases {}\nmean_s {:.6f}\nvariance_s2 {:.9f}\nthroughput_per_min {:.3f}\n",
                                 l.samples_s.size(), l.mean_s, l.variance_s2, l.throughput_per_min));
    text::write_file((out / pipeline::kManifestFile).string(), pipeline::build_manifest(values, {}));
    std::cout << table;
    std::cout << fmt::format("\nlatency: mean {:.3f} s, variance {:.6f} s^2, throughput {:.1f} cases/min\n", l.mean_s,
                             l.variance_s2, l.throughput_per_min);
    return 0;
}

int report(const fs::path& run, const std::string& format) {
    const auto payload = explain::parse_report_payload(text::read_file((run / pipeline::kReportJsonl).string()));
    const auto rendered = explain::render_report(payload);
    if (format == "json") {
        std::cout << rendered.jsonl;
    } else if (format == "csv") {
        std::cout << explain::chain_plot_csv(payload);
    } else {
        std::cout << rendered.text;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Root-cause analysis toolkit: simulate incidents, train, diagnose, evaluate and report."};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(pipeline::kToolVersion));

    Common common;

    auto* sim_cmd = app.add_subcommand("simulate", "generate telemetry and ground truth for one incident");
    add_common(sim_cmd, common);
    fs::path sim_out;
    sim_cmd->add_option("-o,--out", sim_out, "output directory")->required();
    add_key(sim_cmd, common, "--template", "sim.template", "scenario template, e.g. host-memory-leak or nominal");
    add_key(sim_cmd, common, "--seed", "sim.seed", "scenario seed");
    add_key(sim_cmd, common, "--duration", "sim.duration_s", "simulated seconds");
    add_key(sim_cmd, common, "--decoys", "sim.decoys", "benign disturbances");
    add_key(sim_cmd, common, "--topology", "sim.topology", "topology file");

    auto* train_cmd = app.add_subcommand("train", "fit the graph model on simulated historical incidents");
    add_common(train_cmd, common);
    fs::path model_out;
    std::string history;
    train_cmd->add_option("-o,--out", model_out, "model file to write")->required();
    train_cmd->add_option("--history", history, "write the loss history as CSV");
    add_key(train_cmd, common, "--cases", "gat.train_cases", "number of training incidents");
    add_key(train_cmd, common, "--epochs", "gat.epochs", "maximum epochs");

    auto* diag_cmd = app.add_subcommand("diagnose", "run the online pipeline on one telemetry directory");
    add_common(diag_cmd, common);
    fs::path input, run_dir, model;
    bool resume = false;
    diag_cmd->add_option("-i,--input", input, "telemetry directory (metrics.jsonl, logs.jsonl, spans.jsonl)")->required();
    diag_cmd->add_option("-r,--run-dir", run_dir, "artifact directory (default: the input directory)");
    diag_cmd->add_option("-m,--model", model, "trained model file")->required();
    diag_cmd->add_flag("--resume", resume, "reuse artifacts of completed stages");
    add_key(diag_cmd, common, "--threshold", "causal.threshold", "causal edge threshold");
    add_key(diag_cmd, common, "--predictor", "causal.predictor", "latent-var or tcn");
    add_switch(diag_cmd, common, "--no-cross-level", "ablation.cross_level", "disable cross-level transmission");
    add_switch(diag_cmd, common, "--no-modal-attention", "ablation.modal_attention", "equal modality weights");
    add_switch(diag_cmd, common, "--no-mask-explanation", "ablation.mask_explanation", "skip feature importance");

    auto* eval_cmd = app.add_subcommand("evaluate", "score the pipeline and its ablations on labeled incidents");
    add_common(eval_cmd, common);
    std::vector<std::string> cases;
    std::string suite, eval_model;
    fs::path eval_out = "eval";
    bool no_ablations = false;
    eval_cmd->add_option("cases", cases, "incident directories with ground_truth.jsonl");
    eval_cmd->add_option("-s,--suite", suite, "directory whose subdirectories are incidents");
    eval_cmd->add_option("-m,--model", eval_model, "model for the full pipeline (default: train one)");
    eval_cmd->add_option("-o,--out", eval_out, "output directory for eval.txt and latency.txt");
    eval_cmd->add_flag("--no-ablations", no_ablations, "only score the configured pipeline");

    auto* report_cmd = app.add_subcommand("report", "re-render a run's report from report.jsonl");
    fs::path report_run;
    std::string format = "text";
    report_cmd->add_option("-r,--run-dir", report_run, "run directory")->required();
    report_cmd->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*sim_cmd) return simulate(common, sim_out);
        if (*train_cmd) return train(common, model_out, history);
        if (*diag_cmd) return diagnose(common, input, run_dir, model, resume);
        if (*eval_cmd) return evaluate(common, cases, suite, eval_model, eval_out, !no_ablations);
        if (*report_cmd) return report(report_run, format);
    } catch (const InputError& e) {
        std::cerr << "rcactl: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "rcactl: internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
