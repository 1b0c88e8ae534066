#include "rca/causal/discovery.hpp"

#include "rca/causal/cross_level.hpp"
#include "rca/common/rng.hpp"
#include "rca/prep/series.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>

namespace rca::causal {

Eigen::MatrixXd select_causal_signals(const prep::FeatureTensor& x) {
    const std::size_t T = x.windows;
    const std::size_t E = x.entities.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(E));
    std::vector<std::size_t> candidates;
    const auto log_error = x.feature_index("log_error");
    const auto trace_latency = x.feature_index("trace_latency_mean");
    std::vector<double> col(T);
    for (std::size_t e = 0; e < E; ++e) {
        candidates.clear();
        for (std::size_t slot = 0; slot < prep::kMetricSlots; ++slot) {
            if (slot < x.metric_slots[e].size() && !x.metric_slots[e][slot].empty()) {
                candidates.push_back(slot * prep::kMetricFeatureCount);
            }
        }
        if (log_error) candidates.push_back(*log_error);
        if (trace_latency) candidates.push_back(*trace_latency);
        double best = -2.0;
        std::vector<double> chosen(T, 0.0);
        for (std::size_t f : candidates) {
            for (std::size_t t = 0; t < T; ++t) col[t] = x.at(t, e, f);
            if (!(prep::population_variance(col) > 0.0)) continue;
            const double ac = prep::lag1_autocorrelation(col);
            if (ac > best) {
                best = ac;
                chosen = col;
            }
        }
        if (T == 0) continue;
        const auto z = prep::normalize_zscore(chosen);
        for (std::size_t t = 0; t < T; ++t) out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(e)) = z[t];
    }
    return out;
}

namespace {

Eigen::MatrixXd columns(const Eigen::MatrixXd& m, const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = m.col(static_cast<Eigen::Index>(cols[c]));
    return out;
}

} // namespace

double bounded_strength(double c) {
    const double v = std::max(0.0, c);
    return v / (1.0 + v);
}

void normalize_cubes(std::vector<StrengthCube>& cubes) {
    std::vector<Eigen::MatrixXd> steps;
    for (const auto& cube : cubes) {
        for (std::size_t s = 0; s < cube.steps; ++s) {
            Eigen::MatrixXd m = cube.step(s);
            // Self pairs carry no strength and must not set the range.
            for (std::size_t i = 0; i < cube.sources.size(); ++i) {
                for (std::size_t j = 0; j < cube.targets.size(); ++j) {
                    if (cube.sources[i] == cube.targets[j]) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
                }
            }
            steps.push_back(std::move(m));
        }
    }
    minmax_normalize(steps);
    std::size_t k = 0;
    for (auto& cube : cubes) {
        for (std::size_t s = 0; s < cube.steps; ++s) cube.set_step(s, steps[k++]);
    }
}

CausalTensor discover_causality(const prep::FeatureTensor& x, const sim::Topology& topology,
                                const DiscoveryOptions& o) {
    CausalTensor out;
    out.entities = x.entities;
    out.signals = select_causal_signals(x);
    out.window_s = x.window_s;
    out.origin_s = x.origin_s;
    out.step_windows = o.strength.step_windows;

    std::array<std::vector<std::size_t>, sim::kEntityKindCount> level;
    for (std::size_t e = 0; e < x.entities.size(); ++e) level[static_cast<std::size_t>(x.kinds[e])].push_back(e);
    auto names = [&](const std::vector<std::size_t>& cols) {
        std::vector<std::string> ids;
        for (std::size_t c : cols) ids.push_back(x.entities[c]);
        return ids;
    };

    // Every predictor shares the lag, hence the step grid.
    std::size_t warmup = o.predictor.lag;
    const auto rows = static_cast<std::size_t>(out.signals.rows());

    for (std::size_t k = 0; k < sim::kEntityKindCount; ++k) {
        const auto& cols = level[k];
        if (cols.size() < 2) continue;
        const Eigen::MatrixXd series = columns(out.signals, cols);
        auto predictor = fit_predictor(series, o.predictor);
        warmup = predictor->warmup();
        const auto steps = strength_steps(rows, warmup, o.strength.step_windows);
        StrengthCube cube(std::string(sim::to_string(static_cast<sim::EntityKind>(k))), false, names(cols), names(cols), steps);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            StrengthOptions so = o.strength;
            so.seed = derive_seed(o.strength.seed, {k});
            const auto profiles = causal_strength_from(*predictor, series, i, so);
            for (std::size_t j = 0; j < cols.size(); ++j) {
                if (i == j) continue;
                for (std::size_t s = 0; s < steps; ++s) cube.at(i, j, s) = bounded_strength(profiles[j].per_step[s]);
            }
        }
        out.cubes.push_back(std::move(cube));
    }

    if (o.cross_level) {
        const std::array<std::pair<sim::EntityKind, sim::EntityKind>, 2> pairs{
            {{sim::EntityKind::host, sim::EntityKind::pod}, {sim::EntityKind::pod, sim::EntityKind::service}}};
        for (const auto& [from, to] : pairs) {
            const auto& src = level[static_cast<std::size_t>(from)];
            const auto& dst = level[static_cast<std::size_t>(to)];
            if (src.empty() || dst.empty()) continue;
            std::vector<std::size_t> cols = src;
            cols.insert(cols.end(), dst.begin(), dst.end());
            const Eigen::MatrixXd series = columns(out.signals, cols);
            auto predictor = fit_predictor(series, o.predictor);
            warmup = predictor->warmup();
            const auto steps = strength_steps(rows, warmup, o.strength.step_windows);
            std::vector<Eigen::MatrixXd> intra(steps, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(src.size()),
                                                                            static_cast<Eigen::Index>(dst.size())));
            for (std::size_t i = 0; i < src.size(); ++i) {
                StrengthOptions so = o.strength;
                so.seed = derive_seed(o.strength.seed, {10 + static_cast<std::size_t>(from)});
                const auto profiles = causal_strength_from(*predictor, series, i, so);
                for (std::size_t j = 0; j < dst.size(); ++j) {
                    for (std::size_t s = 0; s < steps; ++s) {
                        intra[s](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                            bounded_strength(profiles[src.size() + j].per_step[s]);
                    }
                }
            }
            Eigen::MatrixXd relation(static_cast<Eigen::Index>(src.size()), static_cast<Eigen::Index>(dst.size()));
            for (std::size_t i = 0; i < src.size(); ++i) {
                for (std::size_t j = 0; j < dst.size(); ++j) {
                    relation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        topology.relation(x.entities[src[i]], x.entities[dst[j]]);
                }
            }
            const auto cross = cross_level_raw(intra, relation);
            StrengthCube cube(fmt::format("{}->{}", sim::to_string(from), sim::to_string(to)), true, names(src),
                              names(dst), steps);
            for (std::size_t s = 0; s < steps; ++s) cube.set_step(s, cross[s]);
            out.cubes.push_back(std::move(cube));
        }
    }
    out.warmup = warmup;
    normalize_cubes(out.cubes);
    return out;
}

} // namespace rca::causal
