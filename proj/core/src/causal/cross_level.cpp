#include "rca/causal/cross_level.hpp"
#include "rca/causal/types.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace rca::causal {

Eigen::MatrixXd StrengthCube::step(std::size_t s) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(sources.size()), static_cast<Eigen::Index>(targets.size()));
    for (std::size_t i = 0; i < sources.size(); ++i) {
        for (std::size_t j = 0; j < targets.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(i, j, s);
    }
    return m;
}

void StrengthCube::set_step(std::size_t s, const Eigen::MatrixXd& m) {
    for (std::size_t i = 0; i < sources.size(); ++i) {
        for (std::size_t j = 0; j < targets.size(); ++j) at(i, j, s) = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
}

std::vector<Eigen::MatrixXd> cross_level_raw(const std::vector<Eigen::MatrixXd>& intra, const Eigen::MatrixXd& r) {
    if ((r.array() < 0.0).any() || (r.array() > 1.0).any()) {
        throw std::invalid_argument("cross_level_causal: relation entries must lie in [0,1]");
    }
    std::vector<Eigen::MatrixXd> out;
    out.reserve(intra.size());
    for (const auto& c : intra) {
        if (c.rows() != r.rows() || c.cols() != r.cols()) {
            throw std::invalid_argument("cross_level_causal: strength and relation shapes differ");
        }
        out.push_back(c.cwiseMax(0.0).cwiseProduct(r));
    }
    return out;
}

void minmax_normalize(std::vector<Eigen::MatrixXd>& steps) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& m : steps) {
        if (m.size() == 0) continue;
        lo = std::min(lo, m.minCoeff());
        hi = std::max(hi, m.maxCoeff());
    }
    for (auto& m : steps) {
        if (!(hi > lo)) m.setZero();
        else m = (m.array() - lo) / (hi - lo);
    }
}

std::vector<Eigen::MatrixXd> cross_level_causal(const std::vector<Eigen::MatrixXd>& intra, const Eigen::MatrixXd& r) {
    auto out = cross_level_raw(intra, r);
    minmax_normalize(out);
    return out;
}

} // namespace rca::causal
