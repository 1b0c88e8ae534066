#include "rca/prep/log_features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rca::prep {

LogEncoding encode_log_features(const LogTemplateTable& table, const std::vector<LogCell>& cells,
                                std::size_t windows, const std::vector<std::string>& entities, std::size_t top_k) {
    if (cells.size() != table.assignment.size()) {
        throw std::invalid_argument("encode_log_features: cells and template assignment differ in length");
    }
    const std::size_t n_tmpl = table.templates.size();
    const std::size_t n_ent = entities.size();
    const std::size_t k = std::min(top_k, n_tmpl);

    // counts[(t * E + e) * n_tmpl + template]
    std::vector<double> counts(windows * n_ent * n_tmpl, 0.0);
    std::vector<double> totals(windows * n_ent, 0.0);
    std::vector<double> errors(windows * n_ent, 0.0);
    std::vector<double> warns(windows * n_ent, 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        if (!c.window) continue;
        const std::size_t cell = *c.window * n_ent + c.entity;
        counts[cell * n_tmpl + table.assignment[i]] += 1.0;
        totals[cell] += 1.0;
        if (c.level == sim::LogLevel::error) errors[cell] += 1.0;
        if (c.level == sim::LogLevel::warn) warns[cell] += 1.0;
    }

    LogEncoding enc;
    enc.idf.assign(n_tmpl, 0.0);
    for (std::size_t j = 0; j < n_tmpl; ++j) {
        std::size_t df = 0;
        for (std::size_t t = 0; t < windows; ++t) {
            for (std::size_t e = 0; e < n_ent; ++e) {
                if (counts[(t * n_ent + e) * n_tmpl + j] > 0.0) {
                    ++df;
                    break;
                }
            }
        }
        if (df > 0) enc.idf[j] = std::log(static_cast<double>(windows) / static_cast<double>(df));
    }
    auto tfidf = [&](std::size_t cell, std::size_t j) {
        return totals[cell] > 0.0 ? counts[cell * n_tmpl + j] / totals[cell] * enc.idf[j] : 0.0;
    };

    std::vector<double> mass(n_tmpl, 0.0);
    for (std::size_t cell = 0; cell < windows * n_ent; ++cell) {
        for (std::size_t j = 0; j < n_tmpl; ++j) mass[j] += tfidf(cell, j);
    }
    std::vector<std::size_t> order(n_tmpl);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mass[a] > mass[b]; });
    enc.top_templates.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));

    std::vector<std::string> names;
    for (std::size_t r = 0; r < top_k; ++r) names.push_back(fmt::format("log_tfidf{}", r));
    names.insert(names.end(), {"log_total", "log_error", "log_warn"});
    enc.block = FeatureBlock(windows, entities, names);
    for (std::size_t t = 0; t < windows; ++t) {
        for (std::size_t e = 0; e < n_ent; ++e) {
            const std::size_t cell = t * n_ent + e;
            for (std::size_t r = 0; r < k; ++r) enc.block.at(t, e, r) = tfidf(cell, enc.top_templates[r]);
            enc.block.at(t, e, top_k) = totals[cell];
            enc.block.at(t, e, top_k + 1) = errors[cell];
            enc.block.at(t, e, top_k + 2) = warns[cell];
        }
    }
    return enc;
}

} // namespace rca::prep
