#include "rca/eval/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <stdexcept>

namespace rca::eval {

namespace {

double f1_of(double tp, double fp, double fn) {
    const double denom = 2.0 * tp + fp + fn;
    return denom == 0.0 ? 1.0 : 2.0 * tp / denom;
}

} // namespace

Prf localization_prf(const std::set<std::string>& predicted, const std::set<std::string>& truth) {
    if (predicted.empty() && truth.empty()) return {};
    double tp = 0.0;
    for (const auto& p : predicted) tp += truth.count(p) ? 1.0 : 0.0;
    const double fp = static_cast<double>(predicted.size()) - tp;
    const double fn = static_cast<double>(truth.size()) - tp;
    Prf out;
    out.precision = predicted.empty() ? 0.0 : tp / static_cast<double>(predicted.size());
    out.recall = truth.empty() ? 0.0 : tp / static_cast<double>(truth.size());
    out.f1 = f1_of(tp, fp, fn);
    return out;
}

TypeF1 type_f1(const std::vector<std::string>& predicted, const std::vector<std::string>& truth,
               const std::vector<std::string>& classes) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("type_f1: label vectors differ in length");
    if (predicted.empty()) return {};
    std::map<std::string, std::array<double, 3>> counts; // tp, fp, fn
    for (const auto& c : classes) counts[c] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (const auto* label : {&predicted[i], &truth[i]}) {
            if (!counts.count(*label)) throw std::invalid_argument(fmt::format("type_f1: unknown class '{}'", *label));
        }
        if (predicted[i] == truth[i]) {
            counts[truth[i]][0] += 1.0;
        } else {
            counts[predicted[i]][1] += 1.0;
            counts[truth[i]][2] += 1.0;
        }
    }
    double macro = 0.0;
    std::size_t present = 0;
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (const auto& [c, k] : counts) {
        tp += k[0];
        fp += k[1];
        fn += k[2];
        if (k[0] + k[1] + k[2] == 0.0) continue;
        macro += f1_of(k[0], k[1], k[2]);
        ++present;
    }
    return {macro / static_cast<double>(present), f1_of(tp, fp, fn)};
}

double causal_chain_accuracy(const EdgeSet& predicted, const EdgeSet& truth) {
    double tp = 0.0;
    for (const auto& e : predicted) tp += truth.count(e) ? 1.0 : 0.0;
    return f1_of(tp, static_cast<double>(predicted.size()) - tp, static_cast<double>(truth.size()) - tp);
}

std::optional<double> feature_importance_accuracy(const std::map<std::string, std::vector<std::string>>& top_k,
                                                  const std::map<std::string, std::vector<std::string>>& annotated) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [entity, keys] : annotated) {
        if (keys.empty()) continue;
        const auto it = top_k.find(entity);
        std::size_t hit = 0;
        if (it != top_k.end()) {
            for (const auto& k : keys) hit += std::count(it->second.begin(), it->second.end(), k) ? 1 : 0;
        }
        sum += static_cast<double>(hit) / static_cast<double>(keys.size());
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

} // namespace rca::eval
