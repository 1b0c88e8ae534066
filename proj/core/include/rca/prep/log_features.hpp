#pragma once

#include "rca/prep/drain.hpp"
#include "rca/prep/tensor.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace rca::prep {

// Placement of one ingested log line on the (window, entity) grid.
struct LogCell {
    std::optional<std::size_t> window; // empty when outside the grid
    std::size_t entity = 0;
    sim::LogLevel level = sim::LogLevel::info;
};

struct LogEncoding {
    FeatureBlock block;
    std::vector<std::size_t> top_templates; // template ids behind the TF-IDF columns
    std::vector<double> idf;                // per template id
};

// Per (window, entity): TF-IDF weights of the top-K templates, then total,
// ERROR and WARN counts. tf = template count / cell total,
// idf = ln(windows / windows containing the template). The K columns are the
// templates with the largest summed TF-IDF mass over the grid.
LogEncoding encode_log_features(const LogTemplateTable& table, const std::vector<LogCell>& cells,
                                std::size_t windows, const std::vector<std::string>& entities, std::size_t top_k);

} // namespace rca::prep
