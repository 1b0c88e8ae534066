#pragma once

#include "rca/graph/gat.hpp"

#include <filesystem>
#include <string>

namespace rca::graph {

// Text format: a "rca-gat <version>" line, header lines (dims, catalog
// sizes, feature schema, parameter count), then one parameter per line.
std::string format_gat_model(const GatModel& model);
GatModel parse_gat_model(std::string_view text);

void write_gat_model(const std::filesystem::path& file, const GatModel& model);
GatModel read_gat_model(const std::filesystem::path& file);

} // namespace rca::graph
