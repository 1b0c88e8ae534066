#include "rca/sim/telemetry_io.hpp"

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rca::sim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void append(std::string& out, const json& record) {
    out += record.dump();
    out += '\n';
}

// Iterates over the non-blank lines of a JSONL file.
template <typename Fn>
void for_each_record(const fs::path& file, Fn&& fn) {
    std::ifstream in(file);
    if (!in) throw InputError(fmt::format("{}: cannot open file", file.string()));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error&) {
            throw InputError(fmt::format("{}:{}: malformed JSON", file.string(), lineno));
        }
        if (!record.is_object()) throw InputError(fmt::format("{}:{}: record is not an object", file.string(), lineno));
        fn(record, [&](std::string_view field, std::string_view problem) {
            return InputError(fmt::format("{}:{}: field '{}' {}", file.string(), lineno, field, problem));
        });
    }
}

template <typename Err>
const json& field(const json& record, const char* name, Err&& err) {
    const auto it = record.find(name);
    if (it == record.end()) throw err(name, "missing");
    return *it;
}

template <typename Err>
double number(const json& record, const char* name, Err&& err) {
    const auto& v = field(record, name, err);
    if (!v.is_number()) throw err(name, "is not a number");
    return v.template get<double>();
}

template <typename Err>
std::int64_t integer(const json& record, const char* name, Err&& err) {
    const auto& v = field(record, name, err);
    if (v.is_number_integer()) return v.template get<std::int64_t>();
    if (v.is_number_float()) return static_cast<std::int64_t>(std::llround(v.template get<double>()));
    throw err(name, "is not an integer");
}

template <typename Err>
std::string string(const json& record, const char* name, Err&& err) {
    const auto& v = field(record, name, err);
    if (!v.is_string()) throw err(name, "is not a string");
    return v.template get<std::string>();
}

} // namespace

std::string metrics_to_jsonl(const TelemetryBundle& bundle) {
    std::string out;
    out.reserve(bundle.metrics.size() * 72);
    for (const auto& m : bundle.metrics) {
        append(out, json{{"timestamp", m.timestamp_s}, {"entity", m.entity}, {"metric", m.metric}, {"value", m.value}});
    }
    return out;
}

std::string logs_to_jsonl(const TelemetryBundle& bundle) {
    std::string out;
    for (const auto& l : bundle.logs) {
        append(out, json{{"timestamp_ms", l.timestamp_ms},
                         {"entity", l.entity},
                         {"level", std::string(to_string(l.level))},
                         {"message", l.message}});
    }
    return out;
}

std::string spans_to_jsonl(const TelemetryBundle& bundle) {
    std::string out;
    for (const auto& s : bundle.spans) {
        append(out, json{{"trace_id", s.trace_id},
                         {"span_id", s.span_id},
                         {"parent_span_id", s.parent_span_id ? json(*s.parent_span_id) : json(nullptr)},
                         {"service", s.service},
                         {"start_ms", s.start_ms},
                         {"duration_ms", s.duration_ms},
                         {"status", s.status}});
    }
    return out;
}

std::string ground_truth_to_jsonl(const GroundTruth& truth) {
    std::string out;
    if (!truth.root.empty()) append(out, json{{"kind", "root"}, {"entity", truth.root}});
    for (const auto& e : truth.faulty) {
        const auto it = truth.fault_types.find(e);
        append(out, json{{"kind", "entity"}, {"entity", e}, {"fault_type", it == truth.fault_types.end() ? "" : it->second}});
    }
    for (const auto& [e, features] : truth.key_features) {
        for (const auto& f : features) append(out, json{{"kind", "feature"}, {"entity", e}, {"feature", f}});
    }
    for (const auto& link : truth.chain) {
        append(out, json{{"kind", "chain"}, {"time", link.time_s}, {"source", link.source}, {"target", link.target}});
    }
    return out;
}

void write_bundle(const fs::path& dir, const TelemetryBundle& bundle) {
    fs::create_directories(dir);
    text::write_file((dir / kMetricsFile).string(), metrics_to_jsonl(bundle));
    text::write_file((dir / kLogsFile).string(), logs_to_jsonl(bundle));
    text::write_file((dir / kSpansFile).string(), spans_to_jsonl(bundle));
    text::write_file((dir / kRunInfoFile).string(),
                     fmt::format("duration_s = {}\ntick_s = {}\nsampling_rate = {}\n", text::exact(bundle.duration_s),
                                 text::exact(bundle.tick_s), text::exact(bundle.sampling_rate)));
}

TelemetryBundle read_bundle(const fs::path& dir) {
    TelemetryBundle b;
    for_each_record(dir / kMetricsFile, [&](const json& r, auto err) {
        b.metrics.push_back({number(r, "timestamp", err), string(r, "entity", err), string(r, "metric", err),
                             number(r, "value", err)});
    });
    for_each_record(dir / kLogsFile, [&](const json& r, auto err) {
        const auto level = parse_log_level(string(r, "level", err));
        if (!level) throw err("level", "is not one of INFO/WARN/ERROR");
        b.logs.push_back({integer(r, "timestamp_ms", err), string(r, "entity", err), *level, string(r, "message", err)});
    });
    for_each_record(dir / kSpansFile, [&](const json& r, auto err) {
        Span s;
        s.trace_id = string(r, "trace_id", err);
        s.span_id = string(r, "span_id", err);
        const auto& parent = field(r, "parent_span_id", err);
        if (parent.is_string()) s.parent_span_id = parent.template get<std::string>();
        else if (!parent.is_null()) throw err("parent_span_id", "is neither a string nor null");
        s.service = string(r, "service", err);
        s.start_ms = integer(r, "start_ms", err);
        s.duration_ms = number(r, "duration_ms", err);
        s.status = static_cast<int>(integer(r, "status", err));
        b.spans.push_back(std::move(s));
    });

    const auto info = dir / kRunInfoFile;
    if (fs::exists(info)) {
        const auto content = text::read_file(info.string());
        for (const auto& raw : text::split_lines(content)) {
            const auto line = text::trim(raw);
            const auto eq = line.find('=');
            if (line.empty() || eq == std::string_view::npos) continue;
            const auto key = text::trim(line.substr(0, eq));
            const double value = text::parse_double(text::trim(line.substr(eq + 1)), info.string());
            if (key == "duration_s") b.duration_s = value;
            else if (key == "tick_s") b.tick_s = value;
            else if (key == "sampling_rate") b.sampling_rate = value;
        }
    } else {
        double last = 0.0;
        std::vector<double> stamps;
        for (const auto& m : b.metrics) last = std::max(last, m.timestamp_s);
        for (std::size_t i = 1; i < b.metrics.size() && i < 4096; ++i) {
            const double d = b.metrics[i].timestamp_s - b.metrics[i - 1].timestamp_s;
            if (d > 0.0) stamps.push_back(d);
        }
        b.tick_s = stamps.empty() ? 1.0 : *std::min_element(stamps.begin(), stamps.end());
        b.duration_s = last + b.tick_s;
    }
    return b;
}

void write_ground_truth(const fs::path& file, const GroundTruth& truth) {
    text::write_file(file.string(), ground_truth_to_jsonl(truth));
}

GroundTruth read_ground_truth(const fs::path& file) {
    GroundTruth gt;
    for_each_record(file, [&](const json& r, auto err) {
        const auto kind = string(r, "kind", err);
        if (kind == "root") {
            gt.root = string(r, "entity", err);
        } else if (kind == "entity") {
            const auto e = string(r, "entity", err);
            gt.faulty.push_back(e);
            gt.fault_types[e] = string(r, "fault_type", err);
        } else if (kind == "feature") {
            gt.key_features[string(r, "entity", err)].push_back(string(r, "feature", err));
        } else if (kind == "chain") {
            gt.chain.push_back({number(r, "time", err), string(r, "source", err), string(r, "target", err)});
        } else {
            throw err("kind", "has an unknown value");
        }
    });
    return gt;
}

} // namespace rca::sim
