#pragma once

#include "rca/causal/predictor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rca::causal {

// Shuffles values within consecutive segments of `segment` samples (the tail
// segment may be shorter). Fisher-Yates per segment.
std::vector<double> perturb_segmented(std::span<const double> series, std::size_t segment, std::uint64_t seed);

inline constexpr double kLossFloor = 1e-8;

struct StrengthOptions {
    std::size_t segment_length = 0; // 0: max(2, T / 4)
    std::size_t repeats = 10;
    // Forecast losses are summed over blocks of this many rows before the
    // ratio is taken; 1 reproduces the per-row formula.
    std::size_t step_windows = 20;
    std::uint64_t seed = 1;
};

struct StrengthProfile {
    std::vector<double> per_step;
    double mean = 0.0;
};

// Number of strength steps for a series of `rows` rows.
std::size_t strength_steps(std::size_t rows, std::size_t warmup, std::size_t step_windows);

// C(i -> j, step) for every target j, given explicit replacement columns for
// the source (one per repeat). Entry i of the result is left empty.
std::vector<StrengthProfile> strength_under(const TemporalPredictor& predictor, const Eigen::MatrixXd& series,
                                            std::size_t source, const std::vector<std::vector<double>>& replacements,
                                            std::size_t step_windows);

// Perturbation draws are seeded by (seed, source, repeat), so all targets of
// one source see the same draws.
std::vector<StrengthProfile> causal_strength_from(const TemporalPredictor& predictor, const Eigen::MatrixXd& series,
                                                  std::size_t source, const StrengthOptions& options);

StrengthProfile causal_strength(const TemporalPredictor& predictor, const Eigen::MatrixXd& series, std::size_t source,
                                std::size_t target, const StrengthOptions& options);

} // namespace rca::causal
