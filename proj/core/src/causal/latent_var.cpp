#include "rca/causal/latent_var.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace rca::causal {

LatentVar fit_latent_var(const Eigen::MatrixXd& x, std::size_t lag, std::size_t latent_dim, double ridge) {
    const auto T = static_cast<std::size_t>(x.rows());
    const auto n = static_cast<std::size_t>(x.cols());
    if (n == 0) throw std::invalid_argument("fit_latent_var: no features");
    if (lag == 0) throw std::invalid_argument("fit_latent_var: lag must be >= 1");
    if (latent_dim == 0 || latent_dim > n) throw std::invalid_argument("fit_latent_var: latent dim must be in [1, n]");
    if (ridge < 0.0) throw std::invalid_argument("fit_latent_var: negative ridge");
    if (T <= lag + latent_dim) {
        throw std::invalid_argument(fmt::format("fit_latent_var: series of length {} too short for lag {} and latent dim {}",
                                                T, lag, latent_dim));
    }

    LatentVar m;
    m.lag_ = lag;
    m.ridge_ = ridge;
    m.mean_ = x.colwise().mean();
    m.scale_ = ((x.rowwise() - m.mean_).array().square().colwise().mean()).sqrt().matrix();
    for (Eigen::Index j = 0; j < m.scale_.size(); ++j) {
        if (!(m.scale_(j) > 0.0)) m.scale_(j) = 1.0;
    }
    const Eigen::MatrixXd s = (x.rowwise() - m.mean_).array().rowwise() / m.scale_.array();

    const std::size_t d = latent_dim;
    if (d == n) {
        m.projection_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.transpose() * s);
        // Eigenvalues ascend; take the last d columns, largest first.
        m.projection_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        for (std::size_t k = 0; k < d; ++k) {
            Eigen::VectorXd v = eig.eigenvectors().col(static_cast<Eigen::Index>(n - 1 - k));
            Eigen::Index arg = 0;
            v.cwiseAbs().maxCoeff(&arg);
            if (v(arg) < 0.0) v = -v;
            m.projection_.col(static_cast<Eigen::Index>(k)) = v;
        }
    }
    const Eigen::MatrixXd z = s * m.projection_;

    // Rows t = p .. T-1; regressors [z_{t-1}, ..., z_{t-p}].
    const auto rows = static_cast<Eigen::Index>(T - lag);
    const auto cols = static_cast<Eigen::Index>(d * lag);
    Eigen::MatrixXd design(rows, cols);
    Eigen::MatrixXd target(rows, static_cast<Eigen::Index>(d));
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto t = r + static_cast<Eigen::Index>(lag);
        target.row(r) = z.row(t);
        for (std::size_t k = 1; k <= lag; ++k) {
            design.block(r, static_cast<Eigen::Index>((k - 1) * d), 1, static_cast<Eigen::Index>(d)) =
                z.row(t - static_cast<Eigen::Index>(k));
        }
    }
    // Centering the design leaves the intercept unpenalized.
    const Eigen::RowVectorXd dmean = design.colwise().mean();
    const Eigen::RowVectorXd tmean = target.colwise().mean();
    const Eigen::MatrixXd dc = design.rowwise() - dmean;
    const Eigen::MatrixXd tc = target.rowwise() - tmean;
    Eigen::MatrixXd gram = dc.transpose() * dc;
    gram.diagonal().array() += ridge;
    Eigen::MatrixXd beta;
    if (ridge == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dc);
        if (qr.rank() < cols) throw std::invalid_argument("fit_latent_var: singular design matrix with ridge 0");
        beta = qr.solve(tc);
    } else {
        beta = gram.ldlt().solve(dc.transpose() * tc);
    }
    m.coef_ = beta.transpose();
    m.intercept_ = (tmean - dmean * beta).transpose();
    if (!m.coef_.allFinite() || !m.intercept_.allFinite()) throw std::invalid_argument("fit_latent_var: non-finite fit");
    return m;
}

Eigen::MatrixXd LatentVar::coefficient(std::size_t k) const {
    if (k == 0 || k > lag_) throw std::out_of_range("LatentVar::coefficient: lag index out of range");
    const auto d = static_cast<Eigen::Index>(latent_dim());
    return coef_.block(0, static_cast<Eigen::Index>(k - 1) * d, d, d);
}

Eigen::MatrixXd LatentVar::predict(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean_.size()) throw std::invalid_argument("LatentVar::predict: feature count mismatch");
    const Eigen::MatrixXd z = ((x.rowwise() - mean_).array().rowwise() / scale_.array()).matrix() * projection_;
    const auto d = static_cast<Eigen::Index>(latent_dim());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    Eigen::VectorXd zhat(d);
    for (Eigen::Index t = static_cast<Eigen::Index>(lag_); t < x.rows(); ++t) {
        zhat = intercept_;
        for (std::size_t k = 1; k <= lag_; ++k) {
            zhat.noalias() += coef_.block(0, static_cast<Eigen::Index>(k - 1) * d, d, d) *
                              z.row(t - static_cast<Eigen::Index>(k)).transpose();
        }
        out.row(t) = (projection_ * zhat).transpose().array() * scale_.array() + mean_.array();
    }
    return out;
}

} // namespace rca::causal
