#include "rca/prep/tensor.hpp"

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"
#include "rca/prep/log_features.hpp"
#include "rca/prep/series.hpp"
#include "rca/prep/trace_features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

namespace rca::prep {

namespace fs = std::filesystem;

std::optional<std::size_t> FeatureTensor::entity_index(std::string_view id) const {
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (entities[i] == id) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> FeatureTensor::feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i] == name) return i;
    }
    return std::nullopt;
}

std::string FeatureTensor::display_name(std::size_t entity, std::size_t feature) const {
    if (feature < metric_end) {
        const std::size_t slot = feature / kMetricFeatureCount;
        const auto& metric = metric_slots[entity][slot];
        if (metric.empty()) return features[feature];
        return fmt::format("{}.{}", metric, kMetricFeatureNames[feature % kMetricFeatureCount]);
    }
    return features[feature];
}

std::optional<std::size_t> window_of(double t, double origin, double window, std::size_t windows) {
    if (!(t >= origin)) return std::nullopt;
    const double idx = std::floor((t - origin) / window);
    if (idx >= static_cast<double>(windows)) return std::nullopt;
    return static_cast<std::size_t>(idx);
}

FeatureTensor align_tensor(const FeatureBlock& metric, const FeatureBlock& log, const FeatureBlock& trace,
                           double window_s, double origin_s) {
    if (metric.entities != log.entities || metric.entities != trace.entities) {
        throw InputError("inconsistent entity universes across modality blocks");
    }
    if (metric.windows != log.windows || metric.windows != trace.windows) {
        throw InputError("modality blocks disagree on the window count");
    }
    FeatureTensor out;
    out.windows = metric.windows;
    out.window_s = window_s;
    out.origin_s = origin_s;
    out.entities = metric.entities;
    out.features = metric.features;
    out.features.insert(out.features.end(), log.features.begin(), log.features.end());
    out.features.insert(out.features.end(), trace.features.begin(), trace.features.end());
    out.metric_end = metric.features.size();
    out.log_end = out.metric_end + log.features.size();
    const std::size_t f_all = out.features.size();
    out.values.assign(out.windows * out.entities.size() * f_all, 0.0);
    for (std::size_t t = 0; t < out.windows; ++t) {
        for (std::size_t e = 0; e < out.entities.size(); ++e) {
            for (std::size_t f = 0; f < metric.features.size(); ++f) out.at(t, e, f) = metric.at(t, e, f);
            for (std::size_t f = 0; f < log.features.size(); ++f) out.at(t, e, out.metric_end + f) = log.at(t, e, f);
            for (std::size_t f = 0; f < trace.features.size(); ++f) out.at(t, e, out.log_end + f) = trace.at(t, e, f);
        }
    }
    for (double& v : out.values) {
        if (!std::isfinite(v)) v = 0.0;
    }
    out.kinds.assign(out.entities.size(), sim::EntityKind::host);
    out.metric_slots.assign(out.entities.size(), std::vector<std::string>(kMetricSlots));
    return out;
}

namespace {

struct MetricGrid {
    double origin = 0.0;
    std::size_t samples = 0;
};

MetricGrid metric_grid(const std::vector<sim::MetricPoint>& metrics, double tick) {
    if (metrics.empty()) throw InputError("metrics: no records");
    double lo = metrics.front().timestamp_s;
    double hi = lo;
    for (const auto& m : metrics) {
        lo = std::min(lo, m.timestamp_s);
        hi = std::max(hi, m.timestamp_s);
    }
    MetricGrid g;
    g.origin = std::floor(lo / tick + 1e-9) * tick;
    g.samples = static_cast<std::size_t>(std::floor((hi - g.origin) / tick + 1e-9)) + 1;
    return g;
}

} // namespace

Preprocessed preprocess(const sim::TelemetryBundle& bundle, const std::vector<sim::Entity>& universe,
                        const PrepConfig& config) {
    const double tick = bundle.tick_s;
    const MetricGrid grid = metric_grid(bundle.metrics, tick);
    const auto spans = segment_windows(grid.samples, config.window_s, config.window_s, tick);
    const std::size_t windows = spans.size();
    const std::size_t width = spans.front().second - spans.front().first;

    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& e : universe) {
        index.emplace(e.id, ids.size());
        ids.push_back(e.id);
    }
    auto entity_of = [&](const std::string& id, const char* source) {
        const auto it = index.find(id);
        if (it == index.end()) {
            throw InputError(fmt::format("{}: entity '{}' is not part of the topology", source, id));
        }
        return it->second;
    };

    Preprocessed out;

    // Metric block: per (entity, metric) series on the tick grid.
    std::vector<std::map<std::string, std::vector<double>>> series(ids.size());
    std::vector<std::map<std::string, std::vector<int>>> hits(ids.size());
    out.metrics.ingested = bundle.metrics.size();
    const std::size_t used = windows * width;
    for (const auto& m : bundle.metrics) {
        const std::size_t e = entity_of(m.entity, "metrics");
        const double pos = std::round((m.timestamp_s - grid.origin) / tick);
        if (pos < 0.0 || pos >= static_cast<double>(used) || !std::isfinite(m.value)) {
            ++out.metrics.dropped;
            continue;
        }
        auto& s = series[e][m.metric];
        auto& h = hits[e][m.metric];
        if (s.empty()) {
            s.assign(used, 0.0);
            h.assign(used, 0);
        }
        const auto k = static_cast<std::size_t>(pos);
        s[k] += m.value;
        ++h[k];
        ++out.metrics.kept;
    }

    std::vector<std::string> metric_names;
    for (std::size_t slot = 0; slot < kMetricSlots; ++slot) {
        for (auto f : kMetricFeatureNames) metric_names.push_back(fmt::format("m{}.{}", slot, f));
    }
    FeatureBlock metric(windows, ids, metric_names);
    std::vector<std::vector<std::string>> slots(ids.size(), std::vector<std::string>(kMetricSlots));
    for (std::size_t e = 0; e < ids.size(); ++e) {
        if (series[e].size() > kMetricSlots) {
            throw InputError(fmt::format("metrics: entity '{}' has {} metrics, at most {} supported", ids[e],
                                         series[e].size(), kMetricSlots));
        }
        std::size_t slot = 0;
        for (auto& [name, values] : series[e]) {
            slots[e][slot] = name;
            auto& h = hits[e][name];
            // Average duplicates, then fill gaps from the nearest earlier sample.
            std::optional<double> last;
            for (std::size_t k = 0; k < used; ++k) {
                if (h[k] > 0) {
                    values[k] /= h[k];
                    last = values[k];
                } else if (last) {
                    values[k] = *last;
                }
            }
            const auto first = std::find_if(h.begin(), h.end(), [](int c) { return c > 0; }) - h.begin();
            for (std::ptrdiff_t k = 0; k < first; ++k) values[static_cast<std::size_t>(k)] = values[static_cast<std::size_t>(first)];

            const auto smooth = denoise(values, config.denoise_window);
            const auto z = normalize_zscore(smooth);
            std::optional<double> prev_level;
            for (std::size_t t = 0; t < windows; ++t) {
                const auto [b, en] = spans[t];
                const std::span<const double> zw(z.data() + b, en - b);
                auto feats = derive_metric_features(zw, tick);
                // Change rate is taken on the original scale; z-scored means
                // hover around zero and make the ratio meaningless.
                const double level = mean(std::span<const double>(smooth.data() + b, en - b));
                feats[kMetricFeatureCount - 1] =
                    prev_level ? (level - *prev_level) / std::max(std::abs(*prev_level), kChangeRateEpsilon) : 0.0;
                prev_level = level;
                for (std::size_t f = 0; f < kMetricFeatureCount; ++f) metric.at(t, e, slot * kMetricFeatureCount + f) = feats[f];
            }
            ++slot;
        }
    }
    const double origin = grid.origin;
    const double window_s = static_cast<double>(width) * tick;

    // Log block.
    std::vector<std::vector<std::string>> messages;
    std::vector<LogCell> cells;
    messages.reserve(bundle.logs.size());
    cells.reserve(bundle.logs.size());
    out.logs.ingested = bundle.logs.size();
    for (const auto& l : bundle.logs) {
        LogCell c;
        c.entity = entity_of(l.entity, "logs");
        c.level = l.level;
        c.window = window_of(static_cast<double>(l.timestamp_ms) / 1000.0, origin, window_s, windows);
        if (c.window) ++out.logs.kept;
        else ++out.logs.dropped;
        cells.push_back(c);
        messages.push_back(text::split_ws(l.message));
    }
    out.log_table = mine_log_templates(messages, config.drain_similarity, config.drain_depth);
    const auto logs = encode_log_features(out.log_table, cells, windows, ids, config.log_top_k);

    // Trace block.
    for (const auto& s : bundle.spans) entity_of(s.service, "spans");
    auto traces = build_trace_features(bundle.spans, origin, window_s, windows, ids, bundle.sampling_rate,
                                       config.interpolation_sampling_threshold);
    out.spans = traces.stats;
    out.orphan_spans = traces.orphans;
    out.interpolated_cells = static_cast<std::size_t>(std::count(traces.interpolated.begin(), traces.interpolated.end(), 1));

    out.tensor = align_tensor(metric, logs.block, traces.block, window_s, origin);
    for (std::size_t e = 0; e < universe.size(); ++e) out.tensor.kinds[e] = universe[e].kind;
    out.tensor.metric_slots = std::move(slots);
    for (std::size_t id : logs.top_templates) out.tensor.log_templates.push_back(out.log_table.templates[id].pattern());
    return out;
}

namespace {

constexpr char kMagic[4] = {'R', 'C', 'A', 'T'};
constexpr std::uint32_t kTensorVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
    if (pos + 8 > in.size()) throw InputError("tensor.bin: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 8;
    return v;
}

} // namespace

void write_tensor(const fs::path& dir, const FeatureTensor& t) {
    fs::create_directories(dir);
    std::string bin(kMagic, 4);
    put_u64(bin, kTensorVersion);
    put_u64(bin, t.windows);
    put_u64(bin, t.entities.size());
    put_u64(bin, t.features.size());
    for (double v : t.values) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        put_u64(bin, bits);
    }
    text::write_file((dir / "tensor.bin").string(), bin);

    std::string schema;
    schema += fmt::format("version {}\nwindows {}\nwindow_s {}\norigin_s {}\n", kTensorVersion, t.windows,
                          text::exact(t.window_s), text::exact(t.origin_s));
    schema += fmt::format("blocks metric 0 {} log {} {} trace {} {}\n", t.metric_end, t.metric_end, t.log_end,
                          t.log_end, t.features.size());
    for (std::size_t e = 0; e < t.entities.size(); ++e) {
        schema += fmt::format("entity {} {}", t.entities[e], sim::to_string(t.kinds[e]));
        for (const auto& m : t.metric_slots[e]) schema += " " + (m.empty() ? std::string("-") : m);
        schema += '\n';
    }
    for (const auto& f : t.features) schema += "feature " + f + "\n";
    for (const auto& p : t.log_templates) schema += "template " + p + "\n";
    text::write_file((dir / "schema.txt").string(), schema);
}

FeatureTensor read_tensor(const fs::path& dir) {
    FeatureTensor t;
    const auto schema_path = (dir / "schema.txt").string();
    std::size_t lineno = 0;
    const auto schema = text::read_file(schema_path);
    for (const auto raw : text::split_lines(schema)) {
        ++lineno;
        const auto tok = text::split_ws(raw);
        if (tok.empty()) continue;
        const auto ctx = fmt::format("{}:{}", schema_path, lineno);
        auto need = [&](std::size_t n) {
            if (tok.size() < n) throw InputError(ctx + ": too few fields for '" + tok[0] + "'");
        };
        if (tok[0] == "windows") {
            need(2);
            t.windows = static_cast<std::size_t>(text::parse_int(tok[1], ctx));
        } else if (tok[0] == "window_s") {
            need(2);
            t.window_s = text::parse_double(tok[1], ctx);
        } else if (tok[0] == "origin_s") {
            need(2);
            t.origin_s = text::parse_double(tok[1], ctx);
        } else if (tok[0] == "blocks") {
            need(10);
            t.metric_end = static_cast<std::size_t>(text::parse_int(tok[3], ctx));
            t.log_end = static_cast<std::size_t>(text::parse_int(tok[6], ctx));
        } else if (tok[0] == "entity") {
            need(3);
            const auto kind = sim::parse_entity_kind(tok[2]);
            if (!kind) throw InputError(ctx + ": unknown entity kind '" + tok[2] + "'");
            t.entities.push_back(tok[1]);
            t.kinds.push_back(*kind);
            std::vector<std::string> slots(kMetricSlots);
            for (std::size_t s = 0; s < kMetricSlots && s + 3 < tok.size(); ++s) slots[s] = tok[s + 3] == "-" ? "" : tok[s + 3];
            t.metric_slots.push_back(std::move(slots));
        } else if (tok[0] == "feature") {
            need(2);
            t.features.push_back(tok[1]);
        } else if (tok[0] == "template") {
            const auto pos = raw.find("template") + 9;
            t.log_templates.emplace_back(pos <= raw.size() ? raw.substr(pos) : std::string_view{});
        }
    }

    const auto bin = text::read_file((dir / "tensor.bin").string());
    if (bin.size() < 4 || std::memcmp(bin.data(), kMagic, 4) != 0) throw InputError("tensor.bin: bad magic");
    std::size_t pos = 4;
    if (get_u64(bin, pos) != kTensorVersion) throw InputError("tensor.bin: unsupported version");
    const auto windows = get_u64(bin, pos);
    const auto entities = get_u64(bin, pos);
    const auto features = get_u64(bin, pos);
    if (windows != t.windows || entities != t.entities.size() || features != t.features.size()) {
        throw InputError("tensor.bin: shape disagrees with schema.txt");
    }
    t.values.resize(windows * entities * features);
    for (double& v : t.values) {
        const auto bits = get_u64(bin, pos);
        std::memcpy(&v, &bits, sizeof v);
    }
    return t;
}

} // namespace rca::prep
