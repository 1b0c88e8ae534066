#pragma once

#include "rca/causal/discovery.hpp"
#include "rca/causal/filter.hpp"
#include "rca/causal/pagerank.hpp"
#include "rca/explain/importance.hpp"
#include "rca/graph/train.hpp"
#include "rca/prep/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rca::pipeline {

struct SimulateSettings {
    std::string topology; // topology file; empty: standard 3 hosts / 6 pods / 4 services
    std::string template_name = "host-memory-leak";
    std::uint64_t seed = 1;
    double duration_s = 1200.0;
    double tick_s = 1.0;
    double injection_s = 300.0;
    double sampling_rate = 1.0;
    std::size_t decoys = 0;
};

struct Ablation {
    bool cross_level = true;
    bool type_attention = true;
    bool modal_attention = true;
    bool mask_explanation = true;
};

struct RunConfig {
    std::uint64_t seed = 1;
    SimulateSettings sim;
    prep::PrepConfig prep;
    causal::DiscoveryOptions discovery;
    causal::FilterOptions filter;
    causal::PageRankOptions pagerank;
    graph::GatShape gat;
    graph::TrainOptions train;
    std::size_t train_cases = 60;
    std::size_t train_decoys = 2;
    explain::MaskOptions mask;
    std::size_t fia_k = 3;
    Ablation ablation;
};

// Flat "section.key" -> text table. Every known key is present with its
// default, so the canonical dump fully describes a run.
class ConfigValues {
public:
    ConfigValues(); // defaults

    // Throws InputError for keys outside the schema.
    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    // "section.key=value" assignment as given on the command line.
    void assign(std::string_view assignment);
    // INI file with [section] headers; unknown keys are an error.
    void merge_ini(const std::filesystem::path& file);

    // Canonical INI text (sorted sections and keys).
    std::string format() const;

private:
    std::map<std::string, std::string> values_;
};

struct ConfigKey {
    std::string_view key;
    std::string_view fallback;
    std::string_view help;
};
const std::vector<ConfigKey>& config_schema();

// Parses and range-checks every value; InputError names the offending key.
RunConfig make_config(const ConfigValues& values);

// Stage seeds derived from the run seed.
std::uint64_t stage_seed(const RunConfig& config, std::string_view stage);

} // namespace rca::pipeline
