#include "rca/sim/scenario.hpp"

#include "rca/common/error.hpp"
#include "rca/common/rng.hpp"
#include "rca/common/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <deque>
#include <set>

namespace rca::sim {

std::map<std::string, double> FaultScenario::onsets() const {
    std::map<std::string, double> out;
    if (nominal()) return out;
    out[root] = injection_s;
    // Rules are stored in propagation order, so sources precede their targets.
    for (const auto& rule : rules) {
        out[rule.target] = out.at(rule.source) + rule.lag_s;
    }
    return out;
}

std::vector<std::string> scenario_templates() {
    std::vector<std::string> out{"nominal"};
    for (const auto kind : {EntityKind::host, EntityKind::pod, EntityKind::service}) {
        for (const auto& f : fault_catalog(kind)) {
            out.push_back(fmt::format("{}-{}", to_string(kind), f.name));
        }
    }
    return out;
}

namespace {

struct Template {
    EntityKind kind;
    const FaultProfile* fault;
};

std::optional<Template> parse_template(std::string_view name) {
    for (const auto kind : {EntityKind::host, EntityKind::pod, EntityKind::service}) {
        const auto prefix = fmt::format("{}-", to_string(kind));
        if (text::starts_with(name, prefix)) {
            const auto fault = name.substr(prefix.size());
            if (const auto idx = fault_index(kind, fault)) {
                return Template{kind, &fault_catalog(kind)[*idx]};
            }
        }
    }
    return std::nullopt;
}

class CascadeBuilder {
public:
    CascadeBuilder(const Topology& topo, Rng& rng, const ScenarioOptions& opts)
        : topo_(topo), rng_(rng), opts_(opts) {}

    void expand(const std::string& entity, const FaultProfile& fault) {
        visited_.insert(entity);
        // Breadth-first: the queue holds entities whose downstream is pending.
        std::deque<std::pair<std::string, const FaultProfile*>> queue{{entity, &fault}};
        while (!queue.empty()) {
            auto [id, profile] = queue.front();
            queue.pop_front();
            for (const auto& target : next_hops(id)) {
                if (!visited_.insert(target).second) continue;
                const auto target_kind = topo_.entity(target).kind;
                const auto effect = downstream_fault(*profile, target_kind);
                PropagationRule rule;
                rule.source = id;
                rule.target = target;
                rule.lag_s = static_cast<double>(
                    opts_.lag_min_s +
                    static_cast<int>(rng_.index(static_cast<std::size_t>(opts_.lag_max_s - opts_.lag_min_s + 1))));
                rule.effect = std::string(effect);
                rule.gain = rng_.uniform(opts_.gain_min, opts_.gain_max);
                rules.push_back(rule);
                queue.emplace_back(target, &fault_profile(target_kind, effect));
            }
        }
    }

    std::vector<PropagationRule> rules;

private:
    std::vector<std::string> next_hops(const std::string& id) {
        const auto kind = topo_.entity(id).kind;
        if (kind == EntityKind::host) {
            const auto pods = topo_.pods_on(id);
            if (pods.empty()) return {};
            return {pods[rng_.index(pods.size())]};
        }
        if (kind == EntityKind::pod) return topo_.services_of(id);
        return topo_.callers(id);
    }

    const Topology& topo_;
    Rng& rng_;
    const ScenarioOptions& opts_;
    std::set<std::string> visited_;
};

bool has_cascade(const Topology& topo, const std::string& id) {
    switch (topo.entity(id).kind) {
    case EntityKind::host: return !topo.pods_on(id).empty();
    case EntityKind::pod: return !topo.services_of(id).empty();
    case EntityKind::service: return !topo.callers(id).empty();
    }
    return false;
}

} // namespace

GeneratedScenario generate_scenario(const Topology& topology, std::string_view template_name,
                                    std::uint64_t seed, const ScenarioOptions& options) {
    if (options.lag_min_s <= 0 || options.lag_max_s < options.lag_min_s) {
        throw std::invalid_argument("propagation lags must be positive");
    }
    GeneratedScenario out;
    out.scenario.template_name = std::string(template_name);
    out.scenario.seed = seed;
    if (template_name == "nominal") {
        return out;
    }
    const auto tmpl = parse_template(template_name);
    if (!tmpl) {
        throw std::invalid_argument("unknown scenario template '" + std::string(template_name) + "'");
    }
    Rng rng(derive_seed(seed, {0x5ce7a}));

    std::string root;
    if (options.root) {
        const auto idx = topology.find(*options.root);
        if (!idx) throw std::invalid_argument("root entity '" + *options.root + "' does not exist");
        if (topology.entities()[*idx].kind != tmpl->kind) {
            throw std::invalid_argument(fmt::format("root entity '{}' is a {}, template '{}' needs a {}",
                                                    *options.root, to_string(topology.entities()[*idx].kind),
                                                    template_name, to_string(tmpl->kind)));
        }
        root = *options.root;
    } else {
        auto candidates = topology.ids(tmpl->kind);
        if (candidates.empty()) {
            throw std::invalid_argument(fmt::format("topology has no {} for template '{}'",
                                                    to_string(tmpl->kind), template_name));
        }
        std::vector<std::string> cascading;
        std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(cascading),
                     [&](const std::string& id) { return has_cascade(topology, id); });
        const auto& pool = cascading.empty() ? candidates : cascading;
        root = pool[rng.index(pool.size())];
    }

    auto& sc = out.scenario;
    sc.root = root;
    sc.fault_type = std::string(tmpl->fault->name);
    sc.injection_s = options.injection_s;
    sc.magnitude = rng.uniform(0.8, 1.2);

    CascadeBuilder builder(topology, rng, options);
    builder.expand(root, *tmpl->fault);
    sc.rules = std::move(builder.rules);

    auto& gt = out.truth;
    gt.root = root;
    const auto onsets = sc.onsets();
    gt.faulty.push_back(root);
    gt.fault_types[root] = sc.fault_type;
    gt.key_features[root] = {std::string(key_metric(*tmpl->fault))};
    for (const auto& rule : sc.rules) {
        gt.faulty.push_back(rule.target);
        gt.fault_types[rule.target] = rule.effect;
        const auto& profile = fault_profile(topology.entity(rule.target).kind, rule.effect);
        gt.key_features[rule.target] = {std::string(key_metric(profile))};
        gt.chain.push_back({onsets.at(rule.source), rule.source, rule.target});
    }
    std::stable_sort(gt.chain.begin(), gt.chain.end(),
                     [](const ChainLink& a, const ChainLink& b) { return a.time_s < b.time_s; });

    // Decoys: hosts outside the cascade first, then pods on those hosts.
    if (options.decoys > 0) {
        const std::set<std::string> faulty(gt.faulty.begin(), gt.faulty.end());
        std::vector<std::string> hosts;
        for (const auto& h : topology.ids(EntityKind::host)) {
            if (faulty.count(h) == 0) hosts.push_back(h);
        }
        std::vector<std::string> picked;
        while (!hosts.empty() && picked.size() < options.decoys) {
            const auto k = rng.index(hosts.size());
            const auto host = hosts[k];
            hosts.erase(hosts.begin() + static_cast<std::ptrdiff_t>(k));
            picked.push_back(host);
            std::vector<std::string> pods;
            for (const auto& p : topology.pods_on(host)) {
                if (faulty.count(p) == 0) pods.push_back(p);
            }
            if (!pods.empty() && picked.size() < options.decoys) {
                picked.push_back(pods[rng.index(pods.size())]);
            }
        }
        for (const auto& id : picked) {
            const auto kind = topology.entity(id).kind;
            const auto catalog = fault_catalog(kind);
            Disturbance d;
            d.entity = id;
            d.fault_type = std::string(catalog[rng.index(catalog.size())].name);
            d.start_s = options.injection_s + rng.uniform(-100.0, 200.0);
            d.magnitude = rng.uniform(0.8, 1.2);
            sc.disturbances.push_back(d);
        }
    }
    return out;
}

std::string format_scenario(const FaultScenario& s) {
    std::string out;
    out += fmt::format("template {}\n", s.template_name);
    out += fmt::format("seed {}\n", s.seed);
    if (!s.nominal()) {
        out += fmt::format("root {} {}\n", s.root, s.fault_type);
        out += fmt::format("injection {}\n", text::exact(s.injection_s));
        out += fmt::format("magnitude {}\n", text::exact(s.magnitude));
    }
    for (const auto& r : s.rules) {
        out += fmt::format("rule {} {} {} {} {}\n", r.source, r.target, text::exact(r.lag_s), r.effect,
                           text::exact(r.gain));
    }
    for (const auto& d : s.disturbances) {
        out += fmt::format("disturbance {} {} {} {}\n", d.entity, d.fault_type, text::exact(d.start_s),
                           text::exact(d.magnitude));
    }
    return out;
}

namespace {
double to_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw InputError("scenario: bad number '" + s + "'");
    }
    return v;
}
} // namespace

FaultScenario parse_scenario(std::string_view text) {
    FaultScenario s;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        const auto tokens = text::split_ws(text.substr(pos, end - pos));
        pos = end + 1;
        if (tokens.empty()) continue;
        const auto& k = tokens[0];
        auto need = [&](std::size_t n) {
            if (tokens.size() != n) throw InputError("scenario: malformed '" + k + "' line");
        };
        if (k == "template") {
            need(2);
            s.template_name = tokens[1];
        } else if (k == "seed") {
            need(2);
            s.seed = std::stoull(tokens[1]);
        } else if (k == "root") {
            need(3);
            s.root = tokens[1];
            s.fault_type = tokens[2];
        } else if (k == "injection") {
            need(2);
            s.injection_s = to_double(tokens[1]);
        } else if (k == "magnitude") {
            need(2);
            s.magnitude = to_double(tokens[1]);
        } else if (k == "rule") {
            need(6);
            s.rules.push_back({tokens[1], tokens[2], to_double(tokens[3]), tokens[4], to_double(tokens[5])});
        } else if (k == "disturbance") {
            need(5);
            s.disturbances.push_back({tokens[1], tokens[2], to_double(tokens[3]), to_double(tokens[4])});
        } else {
            throw InputError("scenario: unknown keyword '" + k + "'");
        }
    }
    return s;
}

} // namespace rca::sim
