#include "rca/pipeline/config.hpp"

#include "rca/common/error.hpp"
#include "rca/common/rng.hpp"
#include "rca/common/text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>

namespace rca::pipeline {

namespace {

const std::vector<ConfigKey> kSchema = {
    {"run.seed", "1", "base seed for perturbation, filtering and masking"},
    {"sim.topology", "", "topology file (empty: 3 hosts, 6 pods, 4 services)"},
    {"sim.template", "host-memory-leak", "scenario template"},
    {"sim.seed", "1", "scenario and telemetry seed"},
    {"sim.duration_s", "1200", "simulated seconds"},
    {"sim.tick_s", "1", "metric sampling interval"},
    {"sim.injection_s", "300", "fault injection time"},
    {"sim.sampling_rate", "1", "fraction of traces kept"},
    {"sim.decoys", "0", "non-propagating disturbances per scenario"},
    {"prep.window_s", "5", "analysis window length"},
    {"prep.denoise_window", "3", "moving-average width (odd)"},
    {"prep.log_top_k", "8", "TF-IDF template columns"},
    {"prep.drain_similarity", "0.5", "template similarity threshold"},
    {"prep.drain_depth", "4", "template tree depth"},
    {"causal.predictor", "latent-var", "latent-var or tcn"},
    {"causal.lag", "6", "autoregressive order"},
    {"causal.latent_dim", "0", "latent dimension (0: one per series)"},
    {"causal.ridge", "50", "ridge penalty"},
    {"causal.tcn_epochs", "300", "TCN training epochs"},
    {"causal.tcn_learning_rate", "0.05", "TCN step size"},
    {"causal.repeats", "10", "perturbation draws"},
    {"causal.segment_length", "0", "shuffle segment (0: windows / 4)"},
    {"causal.step_windows", "20", "windows per strength step"},
    {"causal.threshold", "0.3", "edge strength threshold"},
    {"causal.mi_bins", "8", "equal-frequency bins of the CMI test"},
    {"causal.mi_cutoff", "0.01", "excess CMI cutoff (nats)"},
    {"causal.mi_permutations", "20", "permutations of the CMI null"},
    {"causal.damping", "0.85", "PageRank damping"},
    {"gat.hidden", "16", "hidden units per head"},
    {"gat.heads", "2", "attention heads"},
    {"gat.layers", "2", "attention layers"},
    {"gat.epochs", "1000", "maximum training epochs"},
    {"gat.learning_rate", "0.1", "gradient-descent step"},
    {"gat.patience", "10", "early-stop patience"},
    {"gat.validation_fraction", "0.2", "held-out share of training cases"},
    {"gat.train_cases", "60", "simulated training incidents"},
    {"gat.train_decoys", "2", "disturbances per training incident"},
    {"gat.seed", "7", "initialization and split seed"},
    {"explain.trials", "32", "masking trials"},
    {"explain.context_fraction", "0.2", "share of other features masked per trial"},
    {"explain.top_k", "3", "features compared with the annotation"},
    {"ablation.cross_level", "on", "cross-level causal transmission"},
    {"ablation.type_attention", "on", "type-aware attention"},
    {"ablation.modal_attention", "on", "modal-attention fusion"},
    {"ablation.mask_explanation", "on", "mask-based feature importance"},
};

struct Reader {
    const ConfigValues& v;

    double real(const std::string& key, double lo, double hi) const {
        const double x = text::parse_double(v.get(key), key);
        if (!(x >= lo && x <= hi)) throw InputError(fmt::format("config {}: {} outside [{}, {}]", key, x, lo, hi));
        return x;
    }
    std::size_t count(const std::string& key, long long lo, long long hi) const {
        const long long x = text::parse_int(v.get(key), key);
        if (x < lo || x > hi) throw InputError(fmt::format("config {}: {} outside [{}, {}]", key, x, lo, hi));
        return static_cast<std::size_t>(x);
    }
    std::uint64_t seed(const std::string& key) const {
        const long long x = text::parse_int(v.get(key), key);
        if (x < 0) throw InputError(fmt::format("config {}: seeds are nonnegative", key));
        return static_cast<std::uint64_t>(x);
    }
    bool flag(const std::string& key) const {
        const auto& s = v.get(key);
        if (s == "on" || s == "true" || s == "1") return true;
        if (s == "off" || s == "false" || s == "0") return false;
        throw InputError(fmt::format("config {}: expected on/off, got '{}'", key, s));
    }
};

} // namespace

const std::vector<ConfigKey>& config_schema() { return kSchema; }

ConfigValues::ConfigValues() {
    for (const auto& k : kSchema) values_[std::string(k.key)] = std::string(k.fallback);
}

void ConfigValues::set(const std::string& key, const std::string& value) {
    const auto it = values_.find(key);
    if (it == values_.end()) throw InputError(fmt::format("unknown config key '{}'", key));
    it->second = value;
}

const std::string& ConfigValues::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument(fmt::format("config key '{}' not in schema", key));
    return it->second;
}

void ConfigValues::assign(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw InputError(fmt::format("expected section.key=value, got '{}'", assignment));
    set(std::string(text::trim(assignment.substr(0, eq))), std::string(text::trim(assignment.substr(eq + 1))));
}

void ConfigValues::merge_ini(const std::filesystem::path& file) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(file.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError(fmt::format("{}:{}: {}", file.string(), e.line(), e.message()));
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw InputError(fmt::format("{}: key '{}' outside a [section]", file.string(), section));
        for (const auto& [key, value] : body) {
            try {
                set(section + "." + key, value.get_value<std::string>());
            } catch (const InputError& e) {
                throw InputError(fmt::format("{}: {}", file.string(), e.what()));
            }
        }
    }
}

std::string ConfigValues::format() const {
    std::string out;
    std::string current;
    for (const auto& [key, value] : values_) {
        const auto dot = key.find('.');
        const auto section = key.substr(0, dot);
        if (section != current) {
            out += fmt::format("{}[{}]\n", out.empty() ? "" : "\n", section);
            current = section;
        }
        out += fmt::format("{} = {}\n", key.substr(dot + 1), value);
    }
    return out;
}

RunConfig make_config(const ConfigValues& values) {
    const Reader r{values};
    RunConfig c;
    c.seed = r.seed("run.seed");

    c.sim.topology = values.get("sim.topology");
    c.sim.template_name = values.get("sim.template");
    const auto templates = sim::scenario_templates();
    if (std::find(templates.begin(), templates.end(), c.sim.template_name) == templates.end()) {
        throw InputError(fmt::format("config sim.template: unknown template '{}'", c.sim.template_name));
    }
    c.sim.seed = r.seed("sim.seed");
    c.sim.duration_s = r.real("sim.duration_s", 1.0, 1e6);
    c.sim.tick_s = r.real("sim.tick_s", 1e-3, 60.0);
    c.sim.injection_s = r.real("sim.injection_s", 0.0, 1e6);
    c.sim.sampling_rate = r.real("sim.sampling_rate", 1e-6, 1.0);
    c.sim.decoys = r.count("sim.decoys", 0, 100);

    c.prep.window_s = r.real("prep.window_s", 1e-3, 3600.0);
    c.prep.denoise_window = static_cast<int>(r.count("prep.denoise_window", 1, 99));
    if (c.prep.denoise_window % 2 == 0) throw InputError("config prep.denoise_window: must be odd");
    c.prep.log_top_k = r.count("prep.log_top_k", 0, 64);
    c.prep.drain_similarity = r.real("prep.drain_similarity", 1e-9, 1.0);
    c.prep.drain_depth = r.count("prep.drain_depth", 2, 16);

    auto& p = c.discovery.predictor;
    try {
        p.kind = causal::parse_predictor_kind(values.get("causal.predictor"));
    } catch (const std::exception&) {
        throw InputError(fmt::format("config causal.predictor: unknown predictor '{}'", values.get("causal.predictor")));
    }
    p.lag = r.count("causal.lag", 1, 64);
    p.latent_dim = r.count("causal.latent_dim", 0, 1024);
    p.ridge = r.real("causal.ridge", 0.0, 1e9);
    p.epochs = r.count("causal.tcn_epochs", 1, 100000);
    p.learning_rate = r.real("causal.tcn_learning_rate", 1e-9, 10.0);
    p.seed = stage_seed(c, "predictor");
    auto& s = c.discovery.strength;
    s.repeats = r.count("causal.repeats", 1, 1000);
    s.segment_length = r.count("causal.segment_length", 0, 1000000);
    if (s.segment_length == 1) throw InputError("config causal.segment_length: must be 0 or at least 2");
    s.step_windows = r.count("causal.step_windows", 1, 100000);
    s.seed = stage_seed(c, "strength");
    c.filter.threshold = r.real("causal.threshold", 0.0, 0.999999);
    c.filter.bins = static_cast<int>(r.count("causal.mi_bins", 2, 64));
    c.filter.significance = r.real("causal.mi_cutoff", 0.0, 10.0);
    c.filter.permutations = r.count("causal.mi_permutations", 1, 10000);
    c.filter.seed = stage_seed(c, "filter");
    c.pagerank.damping = r.real("causal.damping", 1e-6, 0.999999);

    c.gat.hidden = r.count("gat.hidden", 1, 4096);
    c.gat.heads = r.count("gat.heads", 1, 64);
    c.gat.layers = r.count("gat.layers", 1, 16);
    c.train.epochs = r.count("gat.epochs", 1, 1000000);
    c.train.learning_rate = r.real("gat.learning_rate", 1e-9, 100.0);
    c.train.patience = r.count("gat.patience", 1, 1000000);
    c.train.validation_fraction = r.real("gat.validation_fraction", 0.0, 0.9);
    c.train.seed = r.seed("gat.seed");
    c.train_cases = r.count("gat.train_cases", 1, 100000);
    c.train_decoys = r.count("gat.train_decoys", 0, 100);

    c.mask.trials = r.count("explain.trials", 1, 100000);
    c.mask.context_fraction = r.real("explain.context_fraction", 0.0, 0.99);
    c.mask.seed = stage_seed(c, "mask");
    c.fia_k = r.count("explain.top_k", 1, 1000);

    c.ablation.cross_level = r.flag("ablation.cross_level");
    c.ablation.type_attention = r.flag("ablation.type_attention");
    c.ablation.modal_attention = r.flag("ablation.modal_attention");
    c.ablation.mask_explanation = r.flag("ablation.mask_explanation");
    c.discovery.cross_level = c.ablation.cross_level;
    c.gat.type_aware = c.ablation.type_attention;
    return c;
}

std::uint64_t stage_seed(const RunConfig& config, std::string_view stage) {
    return derive_seed(config.seed, {fnv1a(stage)});
}

} // namespace rca::pipeline
