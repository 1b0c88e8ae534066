#pragma once

#include "rca/causal/predictor.hpp"

namespace rca::causal {

// Columns are standardized, projected onto their top-d principal directions
// and a ridge VAR(p) with an unpenalized intercept is fitted in that space:
//   z_t = c + sum_k A_k z_{t-k}.
class LatentVar final : public TemporalPredictor {
public:
    PredictorKind kind() const override { return PredictorKind::latent_var; }
    std::size_t features() const override { return static_cast<std::size_t>(mean_.size()); }
    std::size_t warmup() const override { return lag_; }
    Eigen::MatrixXd predict(const Eigen::MatrixXd& series) const override;

    std::size_t lag() const noexcept { return lag_; }
    std::size_t latent_dim() const noexcept { return static_cast<std::size_t>(projection_.cols()); }
    double ridge() const noexcept { return ridge_; }
    // A_k for k = 1..p (d x d).
    Eigen::MatrixXd coefficient(std::size_t k) const;
    const Eigen::VectorXd& intercept() const noexcept { return intercept_; }
    const Eigen::MatrixXd& projection() const noexcept { return projection_; }

    friend LatentVar fit_latent_var(const Eigen::MatrixXd& series, std::size_t lag, std::size_t latent_dim,
                                    double ridge);

private:
    std::size_t lag_ = 1;
    double ridge_ = 0.0;
    Eigen::RowVectorXd mean_;
    Eigen::RowVectorXd scale_;
    Eigen::MatrixXd projection_; // n x d, orthonormal columns
    Eigen::MatrixXd coef_;       // d x (d * p), blocks A_1 .. A_p
    Eigen::VectorXd intercept_;  // d
};

// Throws std::invalid_argument when T <= p + d or when the design is
// singular with ridge = 0.
LatentVar fit_latent_var(const Eigen::MatrixXd& series, std::size_t lag, std::size_t latent_dim, double ridge);

} // namespace rca::causal
