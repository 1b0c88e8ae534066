#include "rca/sim/telemetry.hpp"

#include "rca/common/error.hpp"
#include "rca/common/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace rca::sim {

std::string_view to_string(LogLevel level) {
    switch (level) {
    case LogLevel::info: return "INFO";
    case LogLevel::warn: return "WARN";
    case LogLevel::error: return "ERROR";
    }
    return "?";
}

std::optional<LogLevel> parse_log_level(std::string_view text) {
    if (text == "INFO") return LogLevel::info;
    if (text == "WARN") return LogLevel::warn;
    if (text == "ERROR") return LogLevel::error;
    return std::nullopt;
}

namespace {

constexpr double kIntensityTimescale = 50.0; // seconds
constexpr double kIntensityFloor = 0.35;
constexpr double kLeakPerSecond = 0.05;      // mem_usage points per unit intensity
constexpr double kLeakCap = 97.0;
constexpr double kErrorLogRate = 0.4;        // per second per unit intensity

struct LogTemplate {
    std::string_view pattern;
    LogLevel level;
    double rate; // per second
};

constexpr std::array<LogTemplate, 3> kHostLogs{{
    {"heartbeat ok seq={n}", LogLevel::info, 0.2},
    {"collector flushed {n} samples", LogLevel::info, 0.1},
    {"ntp drift {n} ms", LogLevel::warn, 0.004},
}};
constexpr std::array<LogTemplate, 3> kPodLogs{{
    {"readiness probe succeeded in {n} ms", LogLevel::info, 0.2},
    {"gc completed pause={n}ms", LogLevel::info, 0.1},
    {"slow gc pause={n}ms", LogLevel::warn, 0.004},
}};
constexpr std::array<LogTemplate, 3> kServiceLogs{{
    {"request served path=/api/v1/{w} status=200 latency={n}ms", LogLevel::info, 0.3},
    {"connection pool size={n}", LogLevel::info, 0.05},
    {"retrying request id={hex} attempt {k}", LogLevel::warn, 0.004},
}};

std::span<const LogTemplate> baseline_logs(EntityKind kind) {
    switch (kind) {
    case EntityKind::host: return kHostLogs;
    case EntityKind::pod: return kPodLogs;
    case EntityKind::service: return kServiceLogs;
    }
    return {};
}

constexpr std::array<std::string_view, 6> kPathWords{"orders", "users", "cart", "search", "items", "auth"};

std::string fill(std::string_view pattern, Rng& rng, std::string_view peer) {
    std::string out;
    std::size_t i = 0;
    while (i < pattern.size()) {
        if (pattern[i] == '{') {
            const auto close = pattern.find('}', i);
            const auto key = pattern.substr(i + 1, close - i - 1);
            if (key == "n") out += fmt::format("{}", 1 + rng.index(999));
            else if (key == "k") out += fmt::format("{}", rng.index(16));
            else if (key == "dev") out += fmt::format("sd{}", static_cast<char>('a' + rng.index(4)));
            else if (key == "hex") out += fmt::format("{:08x}", rng.next() & 0xffffffffULL);
            else if (key == "w") out += kPathWords[rng.index(kPathWords.size())];
            else if (key == "svc") out += peer;
            i = close + 1;
        } else {
            out += pattern[i++];
        }
    }
    return out;
}

// Fault activity on one entity: a catalog profile and its intensity per tick.
struct Activity {
    const FaultProfile* profile = nullptr;
    std::vector<double> intensity;
    // What downstream entities react to: the intensity itself, or for
    // cumulative faults the accumulated level (memory pressure, not leak rate).
    std::vector<double> drive;
};

constexpr double kPressureScale = 20.0; // accumulated metric points per unit drive

std::vector<double> accumulated(const std::vector<double>& intensity, double tick_s, double cap) {
    std::vector<double> out(intensity.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < intensity.size(); ++k) {
        acc = std::min(cap, acc + kLeakPerSecond * intensity[k] * tick_s);
        out[k] = acc;
    }
    return out;
}

double metric_baseline(EntityKind kind, std::string_view metric) {
    for (const auto& m : metric_profiles(kind)) {
        if (m.name == metric) return m.baseline;
    }
    return 0.0;
}

std::vector<double> driver_process(std::size_t ticks, double tick_s, double start_s, double magnitude,
                                   std::uint64_t seed) {
    Rng rng(seed);
    const double phi = std::exp(-tick_s / kIntensityTimescale);
    const double innovation = std::sqrt(1.0 - phi * phi);
    std::vector<double> out(ticks, 0.0);
    double x = rng.normal();
    for (std::size_t k = 0; k < ticks; ++k) {
        const double t = static_cast<double>(k) * tick_s;
        if (t < start_s) continue;
        out[k] = magnitude * std::max(kIntensityFloor, 1.0 + 0.5 * x);
        x = phi * x + innovation * rng.normal();
    }
    return out;
}

class Generator {
public:
    Generator(const Topology& topo, const FaultScenario& sc, double duration, double tick, std::uint64_t seed,
              const SimulationOptions& opts)
        : topo_(topo), sc_(sc), tick_(tick), seed_(seed), opts_(opts),
          ticks_(static_cast<std::size_t>(std::floor(duration / tick + 1e-9))), noise_(derive_seed(seed, {1})),
          logs_rng_(derive_seed(seed, {2})), spans_rng_(derive_seed(seed, {3})) {
        build_activities();
        for (const auto& [caller, callee] : topo_.spec().calls) callees_[caller].push_back(callee);
        for (auto& [svc, list] : callees_) std::sort(list.begin(), list.end());
    }

    void metrics(std::vector<MetricPoint>& out) {
        out.reserve(ticks_ * topo_.size() * 5);
        for (std::size_t k = 0; k < ticks_; ++k) {
            const double t = static_cast<double>(k) * tick_;
            for (const auto& e : topo_.entities()) {
                const Activity* act = activity(e.id);
                for (const auto& m : metric_profiles(e.kind)) {
                    double value = m.baseline + opts_.noise_scale * m.noise_sd * noise_.truncated_normal(3.0);
                    if (act != nullptr && act->intensity[k] > 0.0) {
                        const double level = act->intensity[k];
                        for (const auto& eff : act->profile->effects) {
                            if (eff.metric == m.name) value += eff.gain * level;
                        }
                    }
                    if (act != nullptr && act->profile->cumulative_metric == m.name) {
                        value += act->drive[k] * kPressureScale;
                    }
                    value = std::clamp(value, m.lower, m.upper);
                    out.push_back({t, e.id, std::string(m.name), value});
                }
            }
        }
    }

    void logs(std::vector<LogLine>& out) {
        auto& rng = logs_rng_;
        for (std::size_t k = 0; k < ticks_; ++k) {
            const double t = static_cast<double>(k) * tick_;
            for (const auto& e : topo_.entities()) {
                const std::string peer = peer_of(e.id);
                auto emit = [&](std::string_view pattern, LogLevel level) {
                    const auto ms = static_cast<std::int64_t>(std::floor((t + rng.uniform() * tick_) * 1000.0));
                    out.push_back({ms, e.id, level, fill(pattern, rng, peer)});
                };
                for (const auto& tmpl : baseline_logs(e.kind)) {
                    const auto n = rng.poisson(tmpl.rate * tick_);
                    for (std::uint64_t i = 0; i < n; ++i) emit(tmpl.pattern, tmpl.level);
                }
                const Activity* act = activity(e.id);
                if (act != nullptr && act->intensity[k] > 0.0) {
                    const double rate = kErrorLogRate * std::min(act->intensity[k], 2.0);
                    const auto n = rng.poisson(rate * tick_);
                    for (std::uint64_t i = 0; i < n; ++i) emit(act->profile->error_template, LogLevel::error);
                }
            }
        }
        std::stable_sort(out.begin(), out.end(),
                         [](const LogLine& a, const LogLine& b) { return a.timestamp_ms < b.timestamp_ms; });
    }

    void spans(std::vector<Span>& out) {
        std::vector<std::string> entries;
        for (const auto& s : topo_.ids(EntityKind::service)) {
            if (topo_.callers(s).empty()) entries.push_back(s);
        }
        if (entries.empty()) entries = topo_.ids(EntityKind::service);
        auto& rng = spans_rng_;
        std::size_t trace_counter = 0;
        for (std::size_t k = 0; k < ticks_; ++k) {
            const double t = static_cast<double>(k) * tick_;
            for (const auto& entry : entries) {
                const auto n = rng.poisson(opts_.trace_rate * tick_);
                for (std::uint64_t i = 0; i < n; ++i) {
                    const auto start = static_cast<std::int64_t>(std::floor((t + rng.uniform() * tick_) * 1000.0));
                    const bool sampled = rng.uniform() < opts_.sampling_rate;
                    TraceState trace{fmt::format("tr{:08d}", trace_counter++), 0, sampled};
                    emit_span(trace, entry, start, std::nullopt, k, 0, out);
                }
            }
        }
    }

private:
    struct TraceState {
        std::string id;
        std::size_t next_span;
        bool sampled;
    };

    struct SpanResult {
        double duration;
        int status;
    };

    SpanResult emit_span(TraceState& trace, const std::string& service, std::int64_t start,
                         const std::optional<std::string>& parent, std::size_t tick, int depth,
                         std::vector<Span>& out) {
        auto& rng = spans_rng_;
        const std::string span_id = fmt::format("{}-{}", trace.id, trace.next_span++);
        std::size_t slot = out.size();
        if (trace.sampled) out.push_back({trace.id, span_id, parent, service, start, 0.0, 200});

        const auto svc_index = topo_.index(service);
        double own = (10.0 + 5.0 * static_cast<double>(svc_index % 3)) * std::exp(0.2 * rng.truncated_normal(3.0));
        int status = 200;
        bool call_children = true;
        if (const Activity* act = activity(service); act != nullptr && act->intensity[tick] > 0.0) {
            const double level = act->intensity[tick];
            const std::string_view fault = act->profile->name;
            const double u = rng.uniform();
            if (fault == "interface-timeout") {
                const double p = level >= 0.3 ? 0.97 : 0.97 * level / 0.3;
                if (u < p) {
                    own += opts_.timeout_ms + 100.0 * level * rng.exponential(1.0);
                    status = 504;
                } else {
                    own += 100.0 * level;
                }
            } else if (fault == "call-failure") {
                if (u < std::min(0.8, 0.6 * level)) status = 500;
            } else if (fault == "error-rate-surge") {
                own += 25.0 * level;
                if (u < std::min(0.6, 0.4 * level)) status = 500;
            } else if (fault == "throughput-collapse") {
                own += 50.0 * level;
                if (u < std::min(0.7, 0.5 * level)) {
                    status = 503;
                    call_children = false;
                }
            }
        }
        double children_total = 0.0;
        if (call_children && depth < 16) {
            auto cursor = start + static_cast<std::int64_t>(std::floor(own * 0.3));
            const auto it = callees_.find(service);
            if (it != callees_.end()) {
                for (const auto& callee : it->second) {
                    const auto child = emit_span(trace, callee, cursor, span_id, tick, depth + 1, out);
                    children_total += child.duration;
                    cursor += static_cast<std::int64_t>(std::floor(child.duration));
                    if (child.status != 200 && status == 200 && rng.uniform() < 0.5) status = 500;
                }
            }
        }
        const double duration = own + children_total;
        if (trace.sampled) {
            out[slot].duration_ms = duration;
            out[slot].status = status;
        }
        return {duration, status};
    }

    std::string peer_of(const std::string& id) const {
        const auto it = callees_.find(id);
        if (it != callees_.end() && !it->second.empty()) return it->second.front();
        return "backend";
    }

    const Activity* activity(const std::string& id) const {
        const auto it = activities_.find(id);
        return it == activities_.end() ? nullptr : &it->second;
    }

    void build_activities() {
        if (!sc_.nominal()) {
            const auto& root_kind = topo_.entity(sc_.root).kind;
            Activity root;
            root.profile = &fault_profile(root_kind, sc_.fault_type);
            root.intensity = driver_process(ticks_, tick_, sc_.injection_s, sc_.magnitude,
                                            derive_seed(seed_, {10, fnv1a(sc_.root)}));
            root.drive = root.intensity;
            if (!root.profile->cumulative_metric.empty()) {
                const double baseline = metric_baseline(root_kind, root.profile->cumulative_metric);
                root.drive = accumulated(root.intensity, tick_, kLeakCap - baseline);
                for (double& v : root.drive) v /= kPressureScale;
            }
            activities_.emplace(sc_.root, std::move(root));
            for (const auto& rule : sc_.rules) {
                const auto& src = activities_.at(rule.source).drive;
                Activity act;
                act.profile = &fault_profile(topo_.entity(rule.target).kind, rule.effect);
                act.intensity.assign(ticks_, 0.0);
                const auto lag = static_cast<std::size_t>(std::llround(rule.lag_s / tick_));
                for (std::size_t k = lag; k < ticks_; ++k) act.intensity[k] = rule.gain * src[k - lag];
                act.drive = act.intensity;
                activities_.emplace(rule.target, std::move(act));
            }
        }
        for (const auto& d : sc_.disturbances) {
            Activity act;
            act.profile = &fault_profile(topo_.entity(d.entity).kind, d.fault_type);
            act.intensity = driver_process(ticks_, tick_, d.start_s, d.magnitude,
                                           derive_seed(seed_, {11, fnv1a(d.entity)}));
            act.drive = act.intensity;
            if (!act.profile->cumulative_metric.empty()) {
                const double baseline = metric_baseline(topo_.entity(d.entity).kind, act.profile->cumulative_metric);
                act.drive = accumulated(act.intensity, tick_, kLeakCap - baseline);
                for (double& v : act.drive) v /= kPressureScale;
            }
            activities_.emplace(d.entity, std::move(act));
        }
    }

    const Topology& topo_;
    const FaultScenario& sc_;
    double tick_;
    std::uint64_t seed_;
    SimulationOptions opts_;
    std::size_t ticks_;
    Rng noise_;
    Rng logs_rng_;
    Rng spans_rng_;
    std::map<std::string, Activity> activities_;
    std::map<std::string, std::vector<std::string>> callees_;
};

} // namespace

TelemetryBundle simulate_telemetry(const Topology& topology, const FaultScenario& scenario, double duration_s,
                                   double tick_s, std::uint64_t seed, const SimulationOptions& options) {
    if (!(tick_s > 0.0)) {
        throw std::invalid_argument("tick must be positive");
    }
    double horizon = 0.0;
    for (const auto& [id, onset] : scenario.onsets()) horizon = std::max(horizon, onset);
    for (const auto& d : scenario.disturbances) horizon = std::max(horizon, d.start_s);
    if (!scenario.nominal() && !(duration_s > horizon)) {
        throw std::invalid_argument(fmt::format("duration {}s too short: last fault onset at {}s", duration_s, horizon));
    }
    if (!(duration_s >= tick_s)) {
        throw std::invalid_argument("duration too short for a single tick");
    }
    for (const auto& rule : scenario.rules) {
        if (!(rule.lag_s > 0.0)) throw std::invalid_argument("propagation lag must be positive");
    }
    TelemetryBundle bundle;
    bundle.duration_s = duration_s;
    bundle.tick_s = tick_s;
    bundle.sampling_rate = options.sampling_rate;
    Generator gen(topology, scenario, duration_s, tick_s, seed, options);
    gen.metrics(bundle.metrics);
    gen.logs(bundle.logs);
    gen.spans(bundle.spans);
    return bundle;
}

void validate_bundle(const TelemetryBundle& b) {
    const double limit = b.duration_s;
    for (const auto& m : b.metrics) {
        if (!(m.timestamp_s >= 0.0 && m.timestamp_s <= limit)) {
            throw InputError(fmt::format("metric timestamp {} outside run", m.timestamp_s));
        }
        if (!std::isfinite(m.value)) throw InputError("non-finite metric value for " + m.entity + "/" + m.metric);
    }
    for (const auto& l : b.logs) {
        if (l.timestamp_ms < 0 || static_cast<double>(l.timestamp_ms) > limit * 1000.0) {
            throw InputError(fmt::format("log timestamp {} outside run", l.timestamp_ms));
        }
    }
    std::unordered_map<std::string, std::unordered_set<std::string>> ids;
    for (const auto& s : b.spans) ids[s.trace_id].insert(s.span_id);
    for (const auto& s : b.spans) {
        if (s.start_ms < 0 || static_cast<double>(s.start_ms) > limit * 1000.0) {
            throw InputError(fmt::format("span {} starts outside run", s.span_id));
        }
        if (s.parent_span_id && ids[s.trace_id].count(*s.parent_span_id) == 0) {
            throw InputError("span " + s.span_id + " has unresolved parent " + *s.parent_span_id);
        }
    }
}

} // namespace rca::sim
