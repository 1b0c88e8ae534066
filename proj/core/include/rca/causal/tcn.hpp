#pragma once

#include "rca/causal/predictor.hpp"

#include <cstdint>
#include <vector>

namespace rca::causal {

struct TcnShape {
    std::size_t features = 1;
    std::vector<std::size_t> kernels{3, 5, 7}; // odd sizes only
    std::size_t channels = 4;
    std::size_t latent_dim = 4;
    std::size_t lag = 2;

    std::size_t parameter_count() const;
};

// Encoder: one causal tanh convolution per kernel size (zero left padding),
// outputs concatenated and projected linearly to the latent space. A latent
// VAR(p) forecasts the next latent state and a linear decoder maps latents
// back to features. Loss = reconstruction MSE + one-step forecast MSE, both
// on standardized features.
class TcnAutoencoder final : public TemporalPredictor {
public:
    TcnAutoencoder(TcnShape shape, std::vector<double> params, Eigen::RowVectorXd mean, Eigen::RowVectorXd scale);

    PredictorKind kind() const override { return PredictorKind::tcn; }
    std::size_t features() const override { return shape_.features; }
    std::size_t warmup() const override { return shape_.lag; }
    Eigen::MatrixXd predict(const Eigen::MatrixXd& series) const override;

    const TcnShape& shape() const noexcept { return shape_; }
    const std::vector<double>& parameters() const noexcept { return params_; }
    const std::vector<double>& loss_history() const noexcept { return history_; }
    Eigen::MatrixXd standardize(const Eigen::MatrixXd& series) const;

    // Loss and its gradient for standardized input `x` under `params`.
    static double loss(const TcnShape& shape, const std::vector<double>& params, const Eigen::MatrixXd& x,
                       std::vector<double>* gradient = nullptr, double* reconstruction = nullptr);

    friend TcnAutoencoder fit_tcn_autoencoder(const Eigen::MatrixXd& series, const TcnShape& shape,
                                              std::size_t epochs, double learning_rate, std::uint64_t seed);

private:
    TcnShape shape_;
    std::vector<double> params_;
    Eigen::RowVectorXd mean_;
    Eigen::RowVectorXd scale_;
    std::vector<double> history_;
};

std::vector<double> init_tcn_parameters(const TcnShape& shape, std::uint64_t seed);

// Throws DivergenceError naming the epoch when the loss becomes non-finite.
TcnAutoencoder fit_tcn_autoencoder(const Eigen::MatrixXd& series, const TcnShape& shape, std::size_t epochs,
                                   double learning_rate, std::uint64_t seed);

// Standardized reconstruction MSE of a fitted model on `series`.
double tcn_reconstruction_mse(const TcnAutoencoder& model, const Eigen::MatrixXd& series);

} // namespace rca::causal
