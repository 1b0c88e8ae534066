#pragma once

#include "rca/causal/types.hpp"

#include <filesystem>
#include <string>

namespace rca::causal {

// One JSON object per edge: source, target, t (onset step), time_s,
// strength, cross, cmi_excess (null when untested), profile.
std::string edges_to_jsonl(const CausalEdgeSet& edges);
CausalEdgeSet read_edges_jsonl(const std::filesystem::path& file);

// Heatmap input: source,target,step,time_s,strength for every cube entry.
std::string strengths_to_csv(const CausalTensor& tensor);

} // namespace rca::causal
