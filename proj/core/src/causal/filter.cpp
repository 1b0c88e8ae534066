#include "rca/causal/filter.hpp"

#include "rca/causal/mutual_info.hpp"
#include "rca/common/rng.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace rca::causal {

namespace {

std::vector<int> binned(const Eigen::MatrixXd& signals, std::size_t col, std::size_t begin, std::size_t end, int bins) {
    std::vector<double> xs;
    xs.reserve(end - begin);
    for (std::size_t t = begin; t < end; ++t) xs.push_back(signals(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(col)));
    return equal_frequency_bins(xs, bins);
}

} // namespace

CausalEdgeSet filter_causal(const CausalTensor& tensor, const FilterOptions& o) {
    if (!(o.threshold >= 0.0 && o.threshold < 1.0)) throw std::invalid_argument("filter_causal: threshold must be in [0,1)");
    CausalEdgeSet out;
    out.threshold = o.threshold;
    out.cmi_cutoff = o.significance;
    out.warmup = tensor.warmup;
    out.step_windows = tensor.step_windows;
    out.window_s = tensor.window_s;
    out.origin_s = tensor.origin_s;

    std::map<std::pair<std::string, std::string>, CausalEdge> kept;
    for (const auto& cube : tensor.cubes) {
        for (std::size_t i = 0; i < cube.sources.size(); ++i) {
            for (std::size_t j = 0; j < cube.targets.size(); ++j) {
                if (cube.sources[i] == cube.targets[j] || cube.steps == 0) continue;
                CausalEdge e;
                e.source = cube.sources[i];
                e.target = cube.targets[j];
                e.cross = cube.cross;
                e.profile.resize(cube.steps);
                double sum = 0.0;
                for (std::size_t s = 0; s < cube.steps; ++s) {
                    e.profile[s] = cube.at(i, j, s);
                    sum += e.profile[s];
                }
                e.strength = sum / static_cast<double>(cube.steps);
                if (!(e.strength > o.threshold)) {
                    ++out.stage1_dropped;
                    continue;
                }
                const auto first = std::find_if(e.profile.begin(), e.profile.end(), [&](double v) { return v > o.threshold; });
                e.onset_step = static_cast<std::size_t>(first - e.profile.begin());
                if (first == e.profile.end()) e.onset_step = 0;
                e.onset_s = tensor.step_time(e.onset_step);
                const auto key = std::make_pair(e.source, e.target);
                const auto it = kept.find(key);
                if (it == kept.end()) kept.emplace(key, std::move(e));
                else if (e.strength > it->second.strength) it->second = std::move(e);
            }
        }
    }

    // Stage 2.
    std::map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < tensor.entities.size(); ++c) column.emplace(tensor.entities[c], c);
    const auto rows = static_cast<std::size_t>(tensor.signals.rows());
    std::set<std::pair<std::string, std::string>> linked;
    std::map<std::string, std::vector<std::string>> parents;
    for (const auto& [key, e] : kept) {
        linked.insert(key);
        linked.insert({key.second, key.first});
        parents[key.second].push_back(key.first);
    }
    std::set<std::pair<std::string, std::string>> removed;
    if (rows > o.lag + 2 && o.bins > 1) {
        for (const auto& [target, ps] : parents) {
            if (ps.size() < 2 || column.count(target) == 0) continue;
            const auto y = binned(tensor.signals, column.at(target), o.lag, rows, o.bins);
            for (std::size_t a = 0; a < ps.size(); ++a) {
                for (std::size_t b = a + 1; b < ps.size(); ++b) {
                    const auto& i = ps[a];
                    const auto& k = ps[b];
                    if (linked.count({i, k}) == 0 || column.count(i) == 0 || column.count(k) == 0) continue;
                    const auto xi = binned(tensor.signals, column.at(i), 0, rows - o.lag, o.bins);
                    const auto xk = binned(tensor.signals, column.at(k), 0, rows - o.lag, o.bins);
                    const auto seed = derive_seed(o.seed, {fnv1a(i), fnv1a(k), fnv1a(target)});
                    const double ei = cmi_excess(xi, y, xk, o.bins, o.permutations, seed);
                    const double ek = cmi_excess(xk, y, xi, o.bins, o.permutations, seed + 1);
                    auto& edge_i = kept.at({i, target});
                    auto& edge_k = kept.at({k, target});
                    if (std::isnan(edge_i.cmi_excess) || ei < edge_i.cmi_excess) edge_i.cmi_excess = ei;
                    if (std::isnan(edge_k.cmi_excess) || ek < edge_k.cmi_excess) edge_k.cmi_excess = ek;
                    if (std::min(ei, ek) < o.significance) removed.insert({ei <= ek ? i : k, target});
                }
            }
        }
    }
    for (auto& [key, e] : kept) {
        if (removed.count(key) != 0) {
            ++out.stage2_removed;
            continue;
        }
        out.edges.push_back(std::move(e));
    }
    return out;
}

} // namespace rca::causal
