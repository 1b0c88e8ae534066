#include "rca/causal/pagerank.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace rca::causal {

double recency_weight(const std::vector<double>& profile, double half_life) {
    if (profile.empty()) return 0.0;
    double num = 0.0;
    double den = 0.0;
    const auto last = static_cast<double>(profile.size() - 1);
    for (std::size_t s = 0; s < profile.size(); ++s) {
        const double w = half_life > 0.0 ? std::exp2(-(last - static_cast<double>(s)) / half_life) : 1.0;
        num += w * std::max(0.0, profile[s]);
        den += w;
    }
    return num / den;
}

std::vector<double> pagerank_scores(const Eigen::MatrixXd& w, double damping, double tolerance,
                                    std::size_t max_iterations) {
    if (!(damping > 0.0 && damping < 1.0)) throw std::invalid_argument("pagerank: damping must be in (0,1)");
    if (w.rows() != w.cols()) throw std::invalid_argument("pagerank: weight matrix must be square");
    const auto n = static_cast<std::size_t>(w.rows());
    if (n == 0) return {};
    const Eigen::VectorXd out_weight = w.rowwise().sum();
    Eigen::VectorXd r = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
    Eigen::VectorXd next(static_cast<Eigen::Index>(n));
    for (std::size_t it = 0; it < max_iterations; ++it) {
        double dangling = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(out_weight(static_cast<Eigen::Index>(i)) > 0.0)) dangling += r(static_cast<Eigen::Index>(i));
        }
        next.setConstant((1.0 - damping) / static_cast<double>(n) + damping * dangling / static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            if (!(out_weight(ii) > 0.0)) continue;
            next.noalias() += (damping * r(ii) / out_weight(ii)) * w.row(ii).transpose();
        }
        next /= next.sum();
        const double delta = (next - r).lpNorm<1>();
        r.swap(next);
        if (delta < tolerance) break;
    }
    return {r.data(), r.data() + r.size()};
}

std::vector<RankedEntity> pagerank_rank(const CausalEdgeSet& edges, const std::vector<std::string>& entities,
                                        const PageRankOptions& o) {
    std::map<std::string, std::size_t> index;
    for (const auto& e : entities) index.emplace(e, index.size());
    std::vector<std::string> ids(index.size());
    for (const auto& [id, i] : index) ids[i] = id;
    const auto n = static_cast<Eigen::Index>(ids.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : edges.edges) {
        const auto s = index.find(e.source);
        const auto t = index.find(e.target);
        if (s == index.end() || t == index.end()) {
            throw std::invalid_argument("pagerank: edge endpoint '" + (s == index.end() ? e.source : e.target) +
                                        "' is not a ranked entity");
        }
        const double half_life = o.half_life_fraction * static_cast<double>(e.profile.size());
        const double weight = e.profile.empty() ? std::max(0.0, e.strength) : recency_weight(e.profile, half_life);
        // Reversed: the effect links to its cause.
        w(static_cast<Eigen::Index>(t->second), static_cast<Eigen::Index>(s->second)) += weight;
    }
    const auto scores = pagerank_scores(w, o.damping, o.tolerance, o.max_iterations);
    std::vector<RankedEntity> out;
    out.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out.push_back({ids[i], scores[i]});
    // Scores are compared on a 1e-12 grid so that rounding noise does not
    // override the id order.
    auto key = [](double score) { return std::llround(score * 1e12); };
    std::stable_sort(out.begin(), out.end(), [&](const RankedEntity& a, const RankedEntity& b) {
        const auto ka = key(a.score);
        const auto kb = key(b.score);
        if (ka != kb) return ka > kb;
        return a.id < b.id;
    });
    return out;
}

} // namespace rca::causal
