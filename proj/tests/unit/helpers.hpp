#pragma once

#include "rca/sim/topology.hpp"

#include <filesystem>
#include <string>

namespace rca::testing {

inline sim::Topology minimal_topology() {
    return sim::build_topology(sim::parse_topology_spec("host h1\npod p1 h1\nservice s1 p1\n"));
}

inline sim::Topology standard_topology() { return sim::build_topology(sim::standard_topology_spec(3, 6, 4)); }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("rca-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace rca::testing
