#include "rca/prep/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rca::prep {

std::array<double, 3> modal_softmax(const std::array<double, 3>& s) {
    const double m = std::max({s[0], s[1], s[2]});
    std::array<double, 3> w{std::exp(s[0] - m), std::exp(s[1] - m), std::exp(s[2] - m)};
    const double z = w[0] + w[1] + w[2];
    for (double& x : w) x /= z;
    return w;
}

FusedFeatures fuse_modalities(const FeatureTensor& x, bool modal_attention) {
    const std::size_t T = x.windows;
    const std::size_t E = x.entities.size();
    const std::size_t F = x.feature_count();
    FusedFeatures out;
    out.windows = T;
    out.entities = E;
    out.dims = F;
    out.values.assign(T * E * F, 0.0);
    out.weights.windows = T;
    out.weights.entities = E;
    out.weights.w.assign(T * E, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    if (T == 0) return out;

    std::vector<double> z(T * E * F, 0.0);
    std::vector<double> column(T);
    for (std::size_t e = 0; e < E; ++e) {
        for (std::size_t f = 0; f < F; ++f) {
            double m = 0.0;
            for (std::size_t t = 0; t < T; ++t) m += x.at(t, e, f);
            m /= static_cast<double>(T);
            double var = 0.0;
            for (std::size_t t = 0; t < T; ++t) var += (x.at(t, e, f) - m) * (x.at(t, e, f) - m);
            const double sd = std::sqrt(var / static_cast<double>(T));
            if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) continue;
            for (std::size_t t = 0; t < T; ++t) z[(t * E + e) * F + f] = (x.at(t, e, f) - m) / sd;
        }
    }

    const std::array<std::size_t, 4> bounds{0, x.metric_end, x.log_end, F};
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t e = 0; e < E; ++e) {
            const double* row = &z[(t * E + e) * F];
            std::array<double, 3> w{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
            if (modal_attention) {
                std::array<double, 3> score{};
                for (std::size_t b = 0; b < 3; ++b) {
                    const std::size_t width = bounds[b + 1] - bounds[b];
                    double s = 0.0;
                    for (std::size_t f = bounds[b]; f < bounds[b + 1]; ++f) s += std::abs(row[f]);
                    score[b] = width > 0 ? s / static_cast<double>(width) : 0.0;
                }
                w = modal_softmax(score);
            }
            out.weights.w[t * E + e] = w;
            double* dst = &out.values[(t * E + e) * F];
            for (std::size_t b = 0; b < 3; ++b) {
                for (std::size_t f = bounds[b]; f < bounds[b + 1]; ++f) dst[f] = w[b] * row[f];
            }
        }
    }
    return out;
}

std::vector<std::vector<double>> node_features(const FusedFeatures& fused, std::size_t begin, std::size_t end) {
    if (begin >= end || end > fused.windows) throw std::invalid_argument("node_features: empty or invalid horizon");
    std::vector<std::vector<double>> out(fused.entities, std::vector<double>(fused.dims, 0.0));
    const double n = static_cast<double>(end - begin);
    for (std::size_t t = begin; t < end; ++t) {
        for (std::size_t e = 0; e < fused.entities; ++e) {
            for (std::size_t f = 0; f < fused.dims; ++f) out[e][f] += fused.at(t, e, f) / n;
        }
    }
    return out;
}

} // namespace rca::prep
