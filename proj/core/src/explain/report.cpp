#include "rca/explain/report.hpp"

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"
#include "rca/sim/catalog.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <map>

namespace rca::explain {

using nlohmann::json;

namespace {

constexpr std::size_t kShownFeatures = 5;
constexpr std::size_t kShownRanks = 5;

std::string num(double v) { return fmt::format("{:.3f}", v); }

std::string section(std::string_view title) { return fmt::format("\n== {} ==\n", title); }

std::map<std::string, sim::EntityKind> kinds_of(const graph::Prediction& p) {
    std::map<std::string, sim::EntityKind> out;
    for (std::size_t i = 0; i < p.ids.size(); ++i) out[p.ids[i]] = p.kinds[i];
    return out;
}

const ImportanceEntry* importance_for(const ReportPayload& payload, std::string_view entity) {
    for (const auto& e : payload.importance) {
        if (e.entity == entity) return &e;
    }
    return nullptr;
}

std::string level_name(const std::map<std::string, sim::EntityKind>& kinds, const std::string& id) {
    const auto it = kinds.find(id);
    return it == kinds.end() ? std::string("unknown") : std::string(sim::to_string(it->second));
}

} // namespace

DiagnosticReport render_report(const ReportPayload& payload) {
    const auto& p = payload.prediction;
    std::vector<std::size_t> flagged;
    for (std::size_t i = 0; i < p.ids.size(); ++i) {
        if (p.flagged(i)) flagged.push_back(i);
    }
    std::map<std::string, std::size_t> position;
    for (std::size_t r = 0; r < payload.ranking.size(); ++r) position[payload.ranking[r].id] = r;
    auto rank_of = [&](std::size_t i) {
        const auto it = position.find(p.ids[i]);
        return it == position.end() ? payload.ranking.size() : it->second;
    };
    std::vector<std::size_t> by_rank = flagged;
    std::stable_sort(by_rank.begin(), by_rank.end(), [&](std::size_t a, std::size_t b) { return rank_of(a) < rank_of(b); });

    std::string t = "Root cause analysis report\n";
    t += fmt::format("run: {}\n", payload.run_id);

    t += section(kReportSections[0]);
    if (flagged.empty()) {
        t += "no fault detected\n";
    } else {
        t += fmt::format("{} of {} entities flagged as faulty (p > 0.5)\n", flagged.size(), p.ids.size());
        for (std::size_t i : by_rank) {
            t += fmt::format("  {:<6} {:<8} {:<22} p={}\n", p.ids[i], sim::to_string(p.kinds[i]), p.type_of(i),
                             num(p.probability[i]));
        }
    }

    t += section(kReportSections[1]);
    if (!flagged.empty()) {
        const std::size_t r = by_rank.front();
        const double score = rank_of(r) < payload.ranking.size() ? payload.ranking[rank_of(r)].score : 0.0;
        t += fmt::format("root cause: {} ({}, {}, p={}, rank score {})\n", p.ids[r], sim::to_string(p.kinds[r]),
                         p.type_of(r), num(p.probability[r]), num(score));
        if (const auto* imp = importance_for(payload, p.ids[r])) {
            std::vector<std::string> parts;
            for (std::size_t k = 0; k < std::min(kShownFeatures, imp->scores.size()); ++k) {
                parts.push_back(fmt::format("{} {}", imp->scores[k].feature, num(imp->scores[k].score)));
            }
            t += fmt::format("key features: {}\n", text::join(parts, ", "));
        }
        std::vector<std::string> parts;
        for (std::size_t k = 0; k < std::min(kShownRanks, payload.ranking.size()); ++k) {
            parts.push_back(fmt::format("{} {}", payload.ranking[k].id, num(payload.ranking[k].score)));
        }
        t += fmt::format("ranking: {}\n", text::join(parts, ", "));
    }

    t += section(kReportSections[2]);
    if (!flagged.empty()) {
        const auto& c = payload.chain;
        if (c.links.empty()) {
            t += "warning: no causal edge above threshold leaves the top-ranked entity\n";
        } else {
            t += fmt::format("origin: {}\n", c.root);
            for (const auto& l : c.links) {
                t += fmt::format("  t={}s  {} -> {}  strength {}\n", num(l.time_s), l.source, l.target, num(l.strength));
            }
        }
        if (!c.unreachable.empty()) t += fmt::format("not on the path: {}\n", text::join(c.unreachable, ", "));
    }

    t += section(kReportSections[3]);
    for (std::size_t i : by_rank) {
        const auto type = p.type_of(i);
        t += fmt::format("  {} ({}): {}\n", p.ids[i], type, sim::fault_profile(p.kinds[i], type).repair);
    }

    std::string j = json{{"record", "meta"}, {"run_id", payload.run_id}, {"threshold", 0.5}}.dump() + "\n";
    for (std::size_t i = 0; i < p.ids.size(); ++i) {
        j += json{{"record", "node"},
                  {"entity", p.ids[i]},
                  {"kind", sim::to_string(p.kinds[i])},
                  {"probability", p.probability[i]},
                  {"flagged", p.flagged(i)},
                  {"fault_type", p.type_of(i)},
                  {"distribution", p.types[i]}}
                 .dump() +
             "\n";
    }
    for (const auto& r : payload.ranking) {
        j += json{{"record", "rank"}, {"entity", r.id}, {"score", r.score}}.dump() + "\n";
    }
    for (const auto& e : payload.importance) {
        for (const auto& s : e.scores) {
            j += json{{"record", "importance"}, {"entity", e.entity}, {"feature", s.feature}, {"score", s.score}}.dump() +
                 "\n";
        }
    }
    j += json{{"record", "chain"},
              {"root", payload.chain.root},
              {"warning", payload.chain.warning},
              {"unreachable", payload.chain.unreachable}}
             .dump() +
         "\n";
    for (const auto& l : payload.chain.links) {
        j += json{{"record", "link"},
                  {"time_s", l.time_s},
                  {"source", l.source},
                  {"target", l.target},
                  {"strength", l.strength}}
                 .dump() +
             "\n";
    }
    for (std::size_t i : by_rank) {
        const auto type = p.type_of(i);
        j += json{{"record", "repair"},
                  {"entity", p.ids[i]},
                  {"fault_type", type},
                  {"suggestion", sim::fault_profile(p.kinds[i], type).repair}}
                 .dump() +
             "\n";
    }
    return {std::move(t), std::move(j)};
}

ReportPayload parse_report_payload(std::string_view jsonl) {
    ReportPayload out;
    std::size_t lineno = 0;
    for (const auto line : text::split_lines(jsonl)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            const auto r = json::parse(line);
            const auto kind = r.at("record").get<std::string>();
            if (kind == "meta") {
                out.run_id = r.at("run_id").get<std::string>();
            } else if (kind == "node") {
                const auto k = sim::parse_entity_kind(r.at("kind").get<std::string>());
                if (!k) throw InputError(fmt::format("report line {}: unknown kind", lineno));
                auto dist = r.at("distribution").get<std::vector<double>>();
                if (dist.size() != sim::fault_catalog(*k).size()) {
                    throw InputError(fmt::format("report line {}: distribution size does not match the catalog", lineno));
                }
                out.prediction.ids.push_back(r.at("entity").get<std::string>());
                out.prediction.kinds.push_back(*k);
                out.prediction.probability.push_back(r.at("probability").get<double>());
                out.prediction.types.push_back(std::move(dist));
            } else if (kind == "rank") {
                out.ranking.push_back({r.at("entity").get<std::string>(), r.at("score").get<double>()});
            } else if (kind == "importance") {
                const auto entity = r.at("entity").get<std::string>();
                if (out.importance.empty() || out.importance.back().entity != entity) {
                    out.importance.push_back({entity, {}});
                }
                out.importance.back().scores.push_back({r.at("feature").get<std::string>(), r.at("score").get<double>()});
            } else if (kind == "chain") {
                out.chain.root = r.at("root").get<std::string>();
                out.chain.warning = r.at("warning").get<bool>();
                out.chain.unreachable = r.at("unreachable").get<std::vector<std::string>>();
            } else if (kind == "link") {
                out.chain.links.push_back({r.at("time_s").get<double>(), r.at("source").get<std::string>(),
                                           r.at("target").get<std::string>(), r.at("strength").get<double>()});
            } else if (kind != "repair") {
                throw InputError(fmt::format("report line {}: unknown record '{}'", lineno, kind));
            }
        } catch (const json::exception& ex) {
            throw InputError(fmt::format("report line {}: {}", lineno, ex.what()));
        }
    }
    return out;
}

std::string chain_plot_csv(const ReportPayload& payload) {
    const auto kinds = kinds_of(payload.prediction);
    std::string out = "time_s,source,target,level,target_level,strength\n";
    for (const auto& l : payload.chain.links) {
        out += fmt::format("{},{},{},{},{},{}\n", text::exact(l.time_s), l.source, l.target, level_name(kinds, l.source),
                           level_name(kinds, l.target), text::exact(l.strength));
    }
    return out;
}

std::string chain_plot_vegalite(const ReportPayload& payload) {
    const auto kinds = kinds_of(payload.prediction);
    json values = json::array();
    for (const auto& l : payload.chain.links) {
        values.push_back({{"time_s", l.time_s},
                          {"source", l.source},
                          {"target", l.target},
                          {"level", level_name(kinds, l.source)},
                          {"target_level", level_name(kinds, l.target)},
                          {"strength", l.strength}});
    }
    const json levels = json::array({"host", "pod", "service"});
    const json x = {{"field", "time_s"}, {"type", "quantitative"}, {"title", "time (s)"}};
    const json spec = {
        {"$schema", "https://vega.github.io/schema/vega-lite/v5.json"},
        {"title", fmt::format("Propagation path from {}", payload.chain.root)},
        {"data", {{"values", values}}},
        {"layer",
         json::array(
             {{{"mark", "rule"},
               {"encoding",
                {{"x", x},
                 {"y", {{"field", "level"}, {"type", "ordinal"}, {"sort", levels}, {"title", "level"}}},
                 {"y2", {{"field", "target_level"}}},
                 {"strokeWidth", {{"field", "strength"}, {"type", "quantitative"}}}}}},
              {{"mark", {{"type", "text"}, {"dx", 6}, {"align", "left"}}},
               {"encoding",
                {{"x", x},
                 {"y", {{"field", "target_level"}, {"type", "ordinal"}, {"sort", levels}}},
                 {"text", {{"field", "target"}}}}}}})}};
    return spec.dump(2) + "\n";
}

} // namespace rca::explain
