#include "rca/causal/edges_io.hpp"

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>

namespace rca::causal {

using nlohmann::json;

std::string edges_to_jsonl(const CausalEdgeSet& set) {
    std::string out;
    for (const auto& e : set.edges) {
        json r{{"source", e.source},
               {"target", e.target},
               {"t", e.onset_step},
               {"time_s", e.onset_s},
               {"strength", e.strength},
               {"cross", e.cross},
               {"cmi_excess", std::isnan(e.cmi_excess) ? json(nullptr) : json(e.cmi_excess)},
               {"profile", e.profile}};
        out += r.dump();
        out += '\n';
    }
    return out;
}

CausalEdgeSet read_edges_jsonl(const std::filesystem::path& file) {
    CausalEdgeSet set;
    const auto content = text::read_file(file.string());
    std::size_t lineno = 0;
    for (const auto line : text::split_lines(content)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const auto where = fmt::format("{}:{}", file.string(), lineno);
        try {
            const auto r = json::parse(line);
            CausalEdge e;
            e.source = r.at("source").get<std::string>();
            e.target = r.at("target").get<std::string>();
            e.onset_step = r.at("t").get<std::size_t>();
            e.onset_s = r.value("time_s", 0.0);
            e.strength = r.at("strength").get<double>();
            e.cross = r.value("cross", false);
            if (r.contains("cmi_excess") && r["cmi_excess"].is_number()) e.cmi_excess = r["cmi_excess"].get<double>();
            if (r.contains("profile")) e.profile = r["profile"].get<std::vector<double>>();
            set.edges.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw InputError(fmt::format("{}: {}", where, ex.what()));
        }
    }
    return set;
}

std::string strengths_to_csv(const CausalTensor& tensor) {
    std::string out = "source,target,step,time_s,strength\n";
    for (const auto& cube : tensor.cubes) {
        for (std::size_t i = 0; i < cube.sources.size(); ++i) {
            for (std::size_t j = 0; j < cube.targets.size(); ++j) {
                if (cube.sources[i] == cube.targets[j]) continue;
                for (std::size_t s = 0; s < cube.steps; ++s) {
                    out += fmt::format("{},{},{},{},{}\n", cube.sources[i], cube.targets[j], s,
                                       text::exact(tensor.step_time(s)), text::exact(cube.at(i, j, s)));
                }
            }
        }
    }
    return out;
}

} // namespace rca::causal
