#include "rca/prep/trace_features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace rca::prep {

namespace {

struct SpanStat {
    double duration;
    bool error;
    std::size_t depth;
    std::size_t children;
};

void summarize(const std::vector<const SpanStat*>& spans, FeatureBlock& block, std::size_t t, std::size_t e) {
    std::vector<double> durations;
    durations.reserve(spans.size());
    double errors = 0.0;
    double depth = 0.0;
    double children = 0.0;
    for (const auto* s : spans) {
        durations.push_back(s->duration);
        errors += s->error ? 1.0 : 0.0;
        depth = std::max(depth, static_cast<double>(s->depth));
        children += static_cast<double>(s->children);
    }
    const auto n = static_cast<double>(spans.size());
    std::sort(durations.begin(), durations.end());
    double total = 0.0;
    for (double d : durations) total += d;
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * n));
    block.at(t, e, 0) = total / n;
    block.at(t, e, 1) = durations[std::max<std::size_t>(rank, 1) - 1];
    block.at(t, e, 2) = errors / n;
    block.at(t, e, 3) = depth;
    block.at(t, e, 4) = children / n;
}

} // namespace

TraceEncoding build_trace_features(const std::vector<sim::Span>& spans, double origin_s, double window_s,
                                   std::size_t windows, const std::vector<std::string>& entities,
                                   double sampling_rate, double interpolation_threshold) {
    TraceEncoding enc;
    enc.block = FeatureBlock(windows, entities,
                             {"trace_latency_mean", "trace_latency_p95", "trace_error_ratio", "trace_depth_max",
                              "trace_children_mean"});
    enc.interpolated.assign(windows * entities.size(), 0);
    enc.stats.ingested = spans.size();

    std::unordered_map<std::string, std::size_t> entity_index;
    for (std::size_t i = 0; i < entities.size(); ++i) entity_index.emplace(entities[i], i);

    // (trace, span) -> position; parent position per span.
    std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> by_trace;
    for (std::size_t i = 0; i < spans.size(); ++i) by_trace[spans[i].trace_id].emplace(spans[i].span_id, i);
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> parent(spans.size(), kNone);
    std::vector<std::uint8_t> orphan(spans.size(), 0);
    std::vector<std::size_t> children(spans.size(), 0);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (!spans[i].parent_span_id) continue;
        const auto& ids = by_trace[spans[i].trace_id];
        const auto it = ids.find(*spans[i].parent_span_id);
        if (it == ids.end()) {
            orphan[i] = 1;
            ++enc.orphans;
        } else {
            parent[i] = it->second;
            ++children[it->second];
        }
    }
    std::vector<std::size_t> depth(spans.size(), 0);
    auto depth_of = [&](std::size_t i) {
        std::vector<std::size_t> path;
        while (depth[i] == 0 && parent[i] != kNone && path.size() <= spans.size()) {
            path.push_back(i);
            i = parent[i];
        }
        if (depth[i] == 0) depth[i] = 1;
        std::size_t d = depth[i];
        for (auto it = path.rbegin(); it != path.rend(); ++it) depth[*it] = ++d;
        return d;
    };

    std::vector<SpanStat> stats(spans.size());
    // cells[t * E + e] -> spans in that cell
    std::vector<std::vector<const SpanStat*>> cells(windows * entities.size());
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (orphan[i]) {
            ++enc.stats.dropped;
            continue;
        }
        const auto e = entity_index.find(spans[i].service);
        const auto t = window_of(static_cast<double>(spans[i].start_ms) / 1000.0, origin_s, window_s, windows);
        if (e == entity_index.end() || !t) {
            ++enc.stats.dropped;
            continue;
        }
        ++enc.stats.kept;
        stats[i] = {spans[i].duration_ms, spans[i].status >= 400, depth_of(i), children[i]};
        cells[*t * entities.size() + e->second].push_back(&stats[i]);
    }

    const bool interpolate = sampling_rate < interpolation_threshold;
    for (std::size_t t = 0; t < windows; ++t) {
        for (std::size_t e = 0; e < entities.size(); ++e) {
            const auto& cell = cells[t * entities.size() + e];
            if (!cell.empty()) {
                summarize(cell, enc.block, t, e);
                continue;
            }
            if (!interpolate) continue;
            std::vector<const SpanStat*> pooled;
            if (t > 0) {
                const auto& prev = cells[(t - 1) * entities.size() + e];
                pooled.insert(pooled.end(), prev.begin(), prev.end());
            }
            if (t + 1 < windows) {
                const auto& next = cells[(t + 1) * entities.size() + e];
                pooled.insert(pooled.end(), next.begin(), next.end());
            }
            if (pooled.empty()) continue;
            summarize(pooled, enc.block, t, e);
            enc.interpolated[t * entities.size() + e] = 1;
        }
    }
    return enc;
}

} // namespace rca::prep
