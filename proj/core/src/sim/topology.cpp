#include "rca/sim/topology.hpp"

#include "rca/common/error.hpp"
#include "rca/common/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <set>

namespace rca::sim {

TopologySpec parse_topology_spec(std::string_view text) {
    TopologySpec spec;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const auto tokens = text::split_ws(line);
        if (tokens.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto& keyword = tokens[0];
        auto fail = [&](const std::string& why) {
            throw InputError(fmt::format("topology line {}: {}", line_no, why));
        };
        if (keyword == "host") {
            if (tokens.size() != 2) fail("expected 'host <id>'");
            spec.hosts.push_back(tokens[1]);
        } else if (keyword == "pod") {
            if (tokens.size() != 3) fail("expected 'pod <id> <host>'");
            spec.pods.emplace_back(tokens[1], tokens[2]);
        } else if (keyword == "service") {
            if (tokens.size() < 2) fail("expected 'service <id> <pod>...'");
            spec.services.emplace_back(tokens[1],
                                       std::vector<std::string>(tokens.begin() + 2, tokens.end()));
        } else if (keyword == "call") {
            if (tokens.size() != 3) fail("expected 'call <caller> <callee>'");
            spec.calls.emplace_back(tokens[1], tokens[2]);
        } else if (keyword == "relation") {
            if (tokens.size() != 4) fail("expected 'relation <a> <b> <degree>'");
            double value = 0.0;
            const auto& v = tokens[3];
            const auto res = std::from_chars(v.data(), v.data() + v.size(), value);
            if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) fail("bad degree '" + v + "'");
            spec.relations.emplace_back(tokens[1], tokens[2], value);
        } else {
            fail("unknown keyword '" + keyword + "'");
        }
        if (end == text.size()) break;
    }
    return spec;
}

std::string format_topology_spec(const TopologySpec& spec) {
    std::string out;
    for (const auto& h : spec.hosts) out += fmt::format("host {}\n", h);
    for (const auto& [pod, host] : spec.pods) out += fmt::format("pod {} {}\n", pod, host);
    for (const auto& [svc, members] : spec.services) {
        out += fmt::format("service {} {}\n", svc, text::join(members, " "));
    }
    for (const auto& [caller, callee] : spec.calls) out += fmt::format("call {} {}\n", caller, callee);
    for (const auto& [a, b, v] : spec.relations) out += fmt::format("relation {} {} {}\n", a, b, text::exact(v));
    return out;
}

TopologySpec standard_topology_spec(std::size_t hosts, std::size_t pods, std::size_t services) {
    if (hosts == 0 || services == 0 || pods < services) {
        throw std::invalid_argument("standard topology needs hosts>=1 and pods>=services>=1");
    }
    TopologySpec spec;
    for (std::size_t h = 0; h < hosts; ++h) spec.hosts.push_back(fmt::format("h{}", h + 1));
    for (std::size_t p = 0; p < pods; ++p) {
        spec.pods.emplace_back(fmt::format("p{}", p + 1), spec.hosts[p % hosts]);
    }
    // Spread pods as evenly as possible; earlier services get the extra pods.
    std::size_t next = 0;
    for (std::size_t s = 0; s < services; ++s) {
        const std::size_t count = pods / services + (s < pods % services ? 1 : 0);
        std::vector<std::string> members;
        for (std::size_t k = 0; k < count; ++k) members.push_back(spec.pods[next++].first);
        spec.services.emplace_back(fmt::format("s{}", s + 1), std::move(members));
    }
    // Binary call tree: s1 -> s2, s1 -> s3, s3 -> s4, s3 -> s5, ...
    for (std::size_t s = 1; s < services; ++s) {
        const std::size_t parent = s <= 2 ? 0 : 2 * ((s - 1) / 2);
        spec.calls.emplace_back(spec.services[parent].first, spec.services[s].first);
    }
    return spec;
}

std::optional<std::size_t> Topology::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Topology::index(std::string_view id) const {
    const auto found = find(id);
    if (!found) {
        throw std::invalid_argument("unknown entity '" + std::string(id) + "'");
    }
    return *found;
}

std::vector<std::string> Topology::ids(EntityKind kind) const {
    std::vector<std::string> out;
    for (const auto& e : entities_) {
        if (e.kind == kind) out.push_back(e.id);
    }
    return out;
}

const std::string& Topology::host_of(std::string_view pod) const {
    for (const auto& [p, h] : spec_.pods) {
        if (p == pod) return h;
    }
    throw std::invalid_argument("unknown pod '" + std::string(pod) + "'");
}

std::vector<std::string> Topology::pods_on(std::string_view host) const {
    std::vector<std::string> out;
    for (const auto& [p, h] : spec_.pods) {
        if (h == host) out.push_back(p);
    }
    return out;
}

std::vector<std::string> Topology::services_of(std::string_view pod) const {
    std::vector<std::string> out;
    for (const auto& [svc, members] : spec_.services) {
        if (std::find(members.begin(), members.end(), pod) != members.end()) out.push_back(svc);
    }
    return out;
}

std::vector<std::string> Topology::members(std::string_view service) const {
    for (const auto& [svc, members] : spec_.services) {
        if (svc == service) return members;
    }
    throw std::invalid_argument("unknown service '" + std::string(service) + "'");
}

std::vector<std::string> Topology::callers(std::string_view service) const {
    std::vector<std::string> out;
    for (const auto& [caller, callee] : spec_.calls) {
        if (callee == service) out.push_back(caller);
    }
    return out;
}

std::vector<std::string> Topology::callees(std::string_view service) const {
    std::vector<std::string> out;
    for (const auto& [caller, callee] : spec_.calls) {
        if (caller == service) out.push_back(callee);
    }
    return out;
}

double Topology::relation(std::string_view a, std::string_view b) const {
    return relation_(static_cast<Eigen::Index>(index(a)), static_cast<Eigen::Index>(index(b)));
}

Eigen::MatrixXd Topology::relation_matrix(EntityKind from, EntityKind to) const {
    const auto rows = ids(from);
    const auto cols = ids(to);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = relation(rows[i], cols[j]);
        }
    }
    return out;
}

Topology build_topology(const TopologySpec& spec) {
    Topology topo;
    topo.spec_ = spec;
    auto add = [&](const std::string& id, EntityKind kind) {
        if (id.empty()) throw InputError("empty entity id");
        if (topo.index_.count(id) != 0) throw InputError("duplicate id '" + id + "'");
        topo.index_.emplace(id, topo.entities_.size());
        topo.entities_.push_back({id, kind});
    };
    for (const auto& h : spec.hosts) add(h, EntityKind::host);
    for (const auto& [pod, host] : spec.pods) {
        const auto it = topo.index_.find(host);
        if (it == topo.index_.end() || topo.entities_[it->second].kind != EntityKind::host) {
            throw InputError("unknown host reference '" + host + "' for pod '" + pod + "'");
        }
        add(pod, EntityKind::pod);
    }
    for (const auto& [svc, members] : spec.services) {
        if (members.empty()) throw InputError("empty service '" + svc + "'");
        std::set<std::string> seen;
        for (const auto& m : members) {
            const auto it = topo.index_.find(m);
            if (it == topo.index_.end() || topo.entities_[it->second].kind != EntityKind::pod) {
                throw InputError("unknown pod reference '" + m + "' in service '" + svc + "'");
            }
            if (!seen.insert(m).second) throw InputError("duplicate member '" + m + "' in service '" + svc + "'");
        }
        add(svc, EntityKind::service);
    }
    std::set<std::pair<std::string, std::string>> call_set;
    for (const auto& [caller, callee] : spec.calls) {
        for (const auto* id : {&caller, &callee}) {
            const auto it = topo.index_.find(*id);
            if (it == topo.index_.end() || topo.entities_[it->second].kind != EntityKind::service) {
                throw InputError("unknown service reference '" + *id + "' in call");
            }
        }
        if (caller == callee) throw InputError("self call on '" + caller + "'");
        if (!call_set.insert({caller, callee}).second) {
            throw InputError("duplicate call " + caller + " -> " + callee);
        }
    }

    for (const auto& [pod, host] : spec.pods) topo.edges_.push_back({host, pod, EdgeKind::deploy});
    for (const auto& [svc, members] : spec.services) {
        for (const auto& m : members) topo.edges_.push_back({m, svc, EdgeKind::member});
    }
    for (const auto& [caller, callee] : spec.calls) topo.edges_.push_back({caller, callee, EdgeKind::call});

    const auto n = static_cast<Eigen::Index>(topo.entities_.size());
    topo.relation_ = Eigen::MatrixXd::Zero(n, n);
    auto set_rel = [&](const std::string& a, const std::string& b, double v) {
        const auto i = static_cast<Eigen::Index>(topo.index_.at(a));
        const auto j = static_cast<Eigen::Index>(topo.index_.at(b));
        topo.relation_(i, j) = v;
        topo.relation_(j, i) = v;
    };
    for (const auto& e : topo.edges_) {
        const double v = e.kind == EdgeKind::deploy ? kDeployRelation
                         : e.kind == EdgeKind::member ? kMemberRelation
                                                      : kCallRelation;
        // A pair linked by both a structural and a call relation keeps the stronger degree.
        const auto i = static_cast<Eigen::Index>(topo.index_.at(e.source));
        const auto j = static_cast<Eigen::Index>(topo.index_.at(e.target));
        set_rel(e.source, e.target, std::max(v, topo.relation_(i, j)));
    }
    for (const auto& [a, b, v] : spec.relations) {
        if (topo.index_.count(a) == 0 || topo.index_.count(b) == 0) {
            throw InputError("relation references unknown entity " + a + "/" + b);
        }
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("relation degree outside [0,1]");
        set_rel(a, b, v);
    }
    return topo;
}

} // namespace rca::sim
