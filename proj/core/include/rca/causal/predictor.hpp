#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

namespace rca::causal {

enum class PredictorKind { latent_var, tcn };

std::string_view to_string(PredictorKind kind);
PredictorKind parse_predictor_kind(std::string_view text);

// One-step-ahead forecaster over a T x n series matrix.
class TemporalPredictor {
public:
    virtual ~TemporalPredictor() = default;

    virtual PredictorKind kind() const = 0;
    virtual std::size_t features() const = 0;
    // Rows before warmup() have no forecast.
    virtual std::size_t warmup() const = 0;
    // Row t (t >= warmup) forecasts series row t from rows < t only.
    virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& series) const = 0;
};

struct PredictorOptions {
    PredictorKind kind = PredictorKind::latent_var;
    std::size_t lag = 6;
    std::size_t latent_dim = 0; // 0: one latent dimension per feature
    double ridge = 1.0;
    // TCN only.
    std::size_t epochs = 300;
    double learning_rate = 0.05;
    std::uint64_t seed = 1;
};

std::unique_ptr<TemporalPredictor> fit_predictor(const Eigen::MatrixXd& series, const PredictorOptions& options);

} // namespace rca::causal
