#pragma once

#include "rca/sim/catalog.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace rca::sim {

struct Entity {
    std::string id;
    EntityKind kind;
};

// Declarative topology description, as parsed from a topology file:
//
//   host h1
//   pod p1 h1
//   service s1 p1 p2
//   call s1 s2
//   relation p1 s2 0.4     (optional override of the association degree)
struct TopologySpec {
    std::vector<std::string> hosts;
    std::vector<std::pair<std::string, std::string>> pods; // (pod, host)
    std::vector<std::pair<std::string, std::vector<std::string>>> services; // (service, members)
    std::vector<std::pair<std::string, std::string>> calls; // (caller, callee)
    std::vector<std::tuple<std::string, std::string, double>> relations;
};

TopologySpec parse_topology_spec(std::string_view text);
std::string format_topology_spec(const TopologySpec& spec);

// Layout used by the bundled suites: pods round-robin over hosts, services
// take consecutive pods, and calls form a tree rooted at the first service.
TopologySpec standard_topology_spec(std::size_t hosts, std::size_t pods, std::size_t services);

struct StructuralEdge {
    std::string source;
    std::string target;
    EdgeKind kind;
};

class Topology {
public:
    const std::vector<Entity>& entities() const noexcept { return entities_; }
    std::size_t size() const noexcept { return entities_.size(); }
    std::optional<std::size_t> find(std::string_view id) const;
    std::size_t index(std::string_view id) const; // throws on unknown id
    const Entity& entity(std::string_view id) const { return entities_[index(id)]; }
    std::vector<std::string> ids(EntityKind kind) const;

    // Edges: host->pod (deploy), pod->service (member), caller->callee (call).
    const std::vector<StructuralEdge>& edges() const noexcept { return edges_; }

    const std::string& host_of(std::string_view pod) const;
    std::vector<std::string> pods_on(std::string_view host) const;
    std::vector<std::string> services_of(std::string_view pod) const;
    std::vector<std::string> members(std::string_view service) const;
    std::vector<std::string> callers(std::string_view service) const;
    std::vector<std::string> callees(std::string_view service) const;

    // Association degree R in [0,1]; symmetric.
    double relation(std::string_view a, std::string_view b) const;
    // |ids(from)| x |ids(to)| block of R.
    Eigen::MatrixXd relation_matrix(EntityKind from, EntityKind to) const;

    const TopologySpec& spec() const noexcept { return spec_; }

private:
    friend Topology build_topology(const TopologySpec& spec);

    TopologySpec spec_;
    std::vector<Entity> entities_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<StructuralEdge> edges_;
    Eigen::MatrixXd relation_;
};

inline constexpr double kDeployRelation = 1.0;
inline constexpr double kMemberRelation = 1.0;
inline constexpr double kCallRelation = 0.7;

Topology build_topology(const TopologySpec& spec);

} // namespace rca::sim
