#include "rca/causal/strength.hpp"

#include "rca/common/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace rca::causal {

std::vector<double> perturb_segmented(std::span<const double> series, std::size_t segment, std::uint64_t seed) {
    if (segment < 2 || segment > series.size()) {
        throw std::invalid_argument("perturb_segmented: segment length must be in [2, series length]");
    }
    std::vector<double> out(series.begin(), series.end());
    Rng rng(seed);
    for (std::size_t start = 0; start < out.size(); start += segment) {
        const std::size_t len = std::min(segment, out.size() - start);
        for (std::size_t i = len; i > 1; --i) {
            const std::size_t j = rng.index(i);
            std::swap(out[start + i - 1], out[start + j]);
        }
    }
    return out;
}

std::size_t strength_steps(std::size_t rows, std::size_t warmup, std::size_t step_windows) {
    if (step_windows == 0) throw std::invalid_argument("step_windows must be >= 1");
    if (rows <= warmup) return 0;
    return (rows - warmup + step_windows - 1) / step_windows;
}

namespace {

// Squared forecast error per (step, feature).
Eigen::MatrixXd step_losses(const TemporalPredictor& predictor, const Eigen::MatrixXd& input,
                            const Eigen::MatrixXd& truth, std::size_t step_windows) {
    const Eigen::MatrixXd pred = predictor.predict(input);
    const auto warm = predictor.warmup();
    const auto rows = static_cast<std::size_t>(truth.rows());
    const auto steps = strength_steps(rows, warm, step_windows);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps), truth.cols());
    for (std::size_t t = warm; t < rows; ++t) {
        const auto s = static_cast<Eigen::Index>((t - warm) / step_windows);
        const auto ti = static_cast<Eigen::Index>(t);
        out.row(s) += (pred.row(ti) - truth.row(ti)).array().square().matrix();
    }
    return out;
}

} // namespace

std::vector<StrengthProfile> strength_under(const TemporalPredictor& predictor, const Eigen::MatrixXd& series,
                                            std::size_t source, const std::vector<std::vector<double>>& replacements,
                                            std::size_t step_windows) {
    const auto n = static_cast<std::size_t>(series.cols());
    if (source >= n) throw std::invalid_argument("causal strength: source index out of range");
    if (replacements.empty()) throw std::invalid_argument("causal strength: no perturbation draws");
    const Eigen::MatrixXd base = step_losses(predictor, series, series, step_windows);
    const auto steps = static_cast<std::size_t>(base.rows());
    Eigen::MatrixXd ratio = Eigen::MatrixXd::Zero(base.rows(), base.cols());
    Eigen::MatrixXd perturbed = series;
    for (const auto& column : replacements) {
        if (column.size() != static_cast<std::size_t>(series.rows())) {
            throw std::invalid_argument("causal strength: replacement column has the wrong length");
        }
        perturbed.col(static_cast<Eigen::Index>(source)) = Eigen::Map<const Eigen::VectorXd>(column.data(), series.rows());
        const Eigen::MatrixXd loss = step_losses(predictor, perturbed, series, step_windows);
        ratio.array() += (loss.array() - base.array()) / base.array().max(kLossFloor);
    }
    ratio /= static_cast<double>(replacements.size());

    std::vector<StrengthProfile> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == source) continue;
        auto& prof = out[j];
        prof.per_step.resize(steps);
        double sum = 0.0;
        for (std::size_t s = 0; s < steps; ++s) {
            prof.per_step[s] = ratio(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j));
            sum += prof.per_step[s];
        }
        prof.mean = steps > 0 ? sum / static_cast<double>(steps) : 0.0;
    }
    return out;
}

std::vector<StrengthProfile> causal_strength_from(const TemporalPredictor& predictor, const Eigen::MatrixXd& series,
                                                  std::size_t source, const StrengthOptions& o) {
    const auto rows = static_cast<std::size_t>(series.rows());
    const std::size_t segment = o.segment_length == 0 ? std::max<std::size_t>(2, rows / 4) : o.segment_length;
    if (o.repeats == 0) throw std::invalid_argument("causal strength: repeats must be >= 1");
    const Eigen::VectorXd col = series.col(static_cast<Eigen::Index>(source));
    std::vector<std::vector<double>> draws;
    draws.reserve(o.repeats);
    for (std::size_t r = 0; r < o.repeats; ++r) {
        draws.push_back(perturb_segmented(std::span<const double>(col.data(), rows), segment,
                                          derive_seed(o.seed, {source, r})));
    }
    return strength_under(predictor, series, source, draws, o.step_windows);
}

StrengthProfile causal_strength(const TemporalPredictor& predictor, const Eigen::MatrixXd& series, std::size_t source,
                                std::size_t target, const StrengthOptions& o) {
    if (source == target) throw std::invalid_argument("causal strength: source and target must differ");
    if (target >= static_cast<std::size_t>(series.cols())) {
        throw std::invalid_argument("causal strength: target index out of range");
    }
    return causal_strength_from(predictor, series, source, o)[target];
}

} // namespace rca::causal
