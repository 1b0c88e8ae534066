#include "rca/causal/tcn.hpp"

#include "rca/common/error.hpp"
#include "rca/common/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace rca::causal {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

// Offsets of each parameter group inside the flat vector.
struct Layout {
    std::vector<std::size_t> conv_w; // per kernel: channels x features x k
    std::vector<std::size_t> conv_b; // per kernel: channels
    std::size_t proj = 0;            // d x (kernels * channels)
    std::size_t proj_b = 0;          // d
    std::size_t var_c = 0;           // d
    std::size_t var_a = 0;           // p blocks of d x d
    std::size_t dec = 0;             // n x d
    std::size_t dec_b = 0;           // n
    std::size_t total = 0;

    explicit Layout(const TcnShape& s) {
        std::size_t pos = 0;
        for (std::size_t k : s.kernels) {
            conv_w.push_back(pos);
            pos += s.channels * s.features * k;
            conv_b.push_back(pos);
            pos += s.channels;
        }
        const std::size_t hidden = s.kernels.size() * s.channels;
        proj = pos;
        pos += s.latent_dim * hidden;
        proj_b = pos;
        pos += s.latent_dim;
        var_c = pos;
        pos += s.latent_dim;
        var_a = pos;
        pos += s.lag * s.latent_dim * s.latent_dim;
        dec = pos;
        pos += s.features * s.latent_dim;
        dec_b = pos;
        pos += s.features;
        total = pos;
    }
};

void validate(const TcnShape& s) {
    if (s.features == 0 || s.channels == 0 || s.latent_dim == 0 || s.lag == 0) {
        throw std::invalid_argument("TCN shape dimensions must be positive");
    }
    if (s.kernels.empty()) throw std::invalid_argument("TCN needs at least one kernel size");
    for (std::size_t k : s.kernels) {
        if (k % 2 == 0) throw std::invalid_argument(fmt::format("TCN kernel size {} rejected: only odd sizes", k));
    }
}

// Row-major views into the flat vector.
struct Params {
    const TcnShape& s;
    const Layout& L;
    const double* p;

    double w(std::size_t g, std::size_t c, std::size_t i, std::size_t m) const {
        return p[L.conv_w[g] + (c * s.features + i) * s.kernels[g] + m];
    }
    double b(std::size_t g, std::size_t c) const { return p[L.conv_b[g] + c]; }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> proj() const {
        return {p + L.proj, static_cast<Index>(s.latent_dim), static_cast<Index>(s.kernels.size() * s.channels)};
    }
    Eigen::Map<const Eigen::VectorXd> proj_b() const { return {p + L.proj_b, static_cast<Index>(s.latent_dim)}; }
    Eigen::Map<const Eigen::VectorXd> var_c() const { return {p + L.var_c, static_cast<Index>(s.latent_dim)}; }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> var_a(std::size_t k) const {
        const auto d = static_cast<Index>(s.latent_dim);
        return {p + L.var_a + (k - 1) * s.latent_dim * s.latent_dim, d, d};
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> dec() const {
        return {p + L.dec, static_cast<Index>(s.features), static_cast<Index>(s.latent_dim)};
    }
    Eigen::Map<const Eigen::VectorXd> dec_b() const { return {p + L.dec_b, static_cast<Index>(s.features)}; }
};

struct Forward {
    MatrixXd h;    // T x hidden (post-tanh)
    MatrixXd z;    // T x d
    MatrixXd zhat; // T x d (rows >= p)
    MatrixXd rec;  // T x n
    MatrixXd pred; // T x n (rows >= p)
};

Forward forward(const TcnShape& s, const Layout& L, const double* raw, const MatrixXd& x) {
    const Params P{s, L, raw};
    const auto T = x.rows();
    const auto n = static_cast<Index>(s.features);
    const auto C = s.channels;
    Forward f;
    f.h.resize(T, static_cast<Index>(s.kernels.size() * C));
    for (std::size_t g = 0; g < s.kernels.size(); ++g) {
        const std::size_t k = s.kernels[g];
        for (Index t = 0; t < T; ++t) {
            for (std::size_t c = 0; c < C; ++c) {
                double a = P.b(g, c);
                for (std::size_t m = 0; m < k && static_cast<Index>(m) <= t; ++m) {
                    for (Index i = 0; i < n; ++i) a += P.w(g, c, static_cast<std::size_t>(i), m) * x(t - static_cast<Index>(m), i);
                }
                f.h(t, static_cast<Index>(g * C + c)) = std::tanh(a);
            }
        }
    }
    f.z = (f.h * P.proj().transpose()).rowwise() + P.proj_b().transpose();
    f.rec = (f.z * P.dec().transpose()).rowwise() + P.dec_b().transpose();
    const auto p = static_cast<Index>(s.lag);
    f.zhat = MatrixXd::Zero(T, static_cast<Index>(s.latent_dim));
    for (Index t = p; t < T; ++t) {
        Eigen::VectorXd v = P.var_c();
        for (std::size_t k = 1; k <= s.lag; ++k) v.noalias() += P.var_a(k) * f.z.row(t - static_cast<Index>(k)).transpose();
        f.zhat.row(t) = v.transpose();
    }
    f.pred = (f.zhat * P.dec().transpose()).rowwise() + P.dec_b().transpose();
    f.pred.topRows(p).setZero();
    return f;
}

} // namespace

std::size_t TcnShape::parameter_count() const { return Layout(*this).total; }

std::vector<double> init_tcn_parameters(const TcnShape& s, std::uint64_t seed) {
    validate(s);
    const Layout L(s);
    std::vector<double> p(L.total, 0.0);
    Rng rng(seed);
    for (std::size_t g = 0; g < s.kernels.size(); ++g) {
        const double sd = 1.0 / std::sqrt(static_cast<double>(s.features * s.kernels[g]));
        for (std::size_t i = 0; i < s.channels * s.features * s.kernels[g]; ++i) p[L.conv_w[g] + i] = sd * rng.normal();
    }
    const std::size_t hidden = s.kernels.size() * s.channels;
    for (std::size_t i = 0; i < s.latent_dim * hidden; ++i) {
        p[L.proj + i] = rng.normal() / std::sqrt(static_cast<double>(hidden));
    }
    for (std::size_t i = 0; i < s.lag * s.latent_dim * s.latent_dim; ++i) p[L.var_a + i] = 0.1 * rng.normal();
    for (std::size_t i = 0; i < s.features * s.latent_dim; ++i) {
        p[L.dec + i] = rng.normal() / std::sqrt(static_cast<double>(s.latent_dim));
    }
    return p;
}

double TcnAutoencoder::loss(const TcnShape& s, const std::vector<double>& params, const MatrixXd& x,
                            std::vector<double>* grad, double* reconstruction) {
    validate(s);
    const Layout L(s);
    if (params.size() != L.total) throw std::invalid_argument("TCN parameter vector has the wrong size");
    if (static_cast<std::size_t>(x.cols()) != s.features) throw std::invalid_argument("TCN input width mismatch");
    const auto T = x.rows();
    const auto p = static_cast<Index>(s.lag);
    if (T <= p) throw std::invalid_argument("TCN input shorter than the lag");
    const Params P{s, L, params.data()};
    const Forward f = forward(s, L, params.data(), x);

    const double n_rec = static_cast<double>(T) * static_cast<double>(x.cols());
    const double n_pred = static_cast<double>(T - p) * static_cast<double>(x.cols());
    const MatrixXd er = f.rec - x;
    MatrixXd ep = f.pred - x;
    ep.topRows(p).setZero();
    const double rec = er.squaredNorm() / n_rec;
    const double value = rec + ep.squaredNorm() / n_pred;
    if (reconstruction != nullptr) *reconstruction = rec;
    if (grad == nullptr) return value;

    grad->assign(L.total, 0.0);
    auto& g = *grad;
    const MatrixXd dr = er * (2.0 / n_rec);
    const MatrixXd dp = ep * (2.0 / n_pred);
    const auto d = static_cast<Index>(s.latent_dim);
    const auto n = static_cast<Index>(s.features);

    // Decoder.
    const MatrixXd d_dec = dr.transpose() * f.z + dp.transpose() * f.zhat; // n x d
    for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < d; ++c) g[L.dec + static_cast<std::size_t>(r * d + c)] = d_dec(r, c);
        g[L.dec_b + static_cast<std::size_t>(r)] = dr.col(r).sum() + dp.col(r).sum();
    }
    MatrixXd dz = dr * P.dec();          // T x d
    const MatrixXd dzhat = dp * P.dec(); // T x d, zero for rows < p

    // Latent VAR.
    for (Index t = p; t < T; ++t) {
        for (Index c = 0; c < d; ++c) g[L.var_c + static_cast<std::size_t>(c)] += dzhat(t, c);
        for (std::size_t k = 1; k <= s.lag; ++k) {
            const auto src = t - static_cast<Index>(k);
            const std::size_t base = L.var_a + (k - 1) * s.latent_dim * s.latent_dim;
            for (Index r = 0; r < d; ++r) {
                for (Index c = 0; c < d; ++c) g[base + static_cast<std::size_t>(r * d + c)] += dzhat(t, r) * f.z(src, c);
            }
            dz.row(src).noalias() += dzhat.row(t) * P.var_a(k);
        }
    }

    // Projection.
    const auto hidden = f.h.cols();
    const MatrixXd d_proj = dz.transpose() * f.h; // d x hidden
    for (Index r = 0; r < d; ++r) {
        for (Index c = 0; c < hidden; ++c) g[L.proj + static_cast<std::size_t>(r * hidden + c)] = d_proj(r, c);
        g[L.proj_b + static_cast<std::size_t>(r)] = dz.col(r).sum();
    }
    const MatrixXd dh = dz * P.proj(); // T x hidden

    // Convolutions.
    const auto C = s.channels;
    for (std::size_t gi = 0; gi < s.kernels.size(); ++gi) {
        const std::size_t k = s.kernels[gi];
        for (std::size_t c = 0; c < C; ++c) {
            const auto col = static_cast<Index>(gi * C + c);
            for (Index t = 0; t < T; ++t) {
                const double hv = f.h(t, col);
                const double da = dh(t, col) * (1.0 - hv * hv);
                g[L.conv_b[gi] + c] += da;
                for (std::size_t m = 0; m < k && static_cast<Index>(m) <= t; ++m) {
                    for (Index i = 0; i < n; ++i) {
                        g[L.conv_w[gi] + (c * s.features + static_cast<std::size_t>(i)) * k + m] +=
                            da * x(t - static_cast<Index>(m), i);
                    }
                }
            }
        }
    }
    return value;
}

TcnAutoencoder::TcnAutoencoder(TcnShape shape, std::vector<double> params, Eigen::RowVectorXd mean,
                               Eigen::RowVectorXd scale)
    : shape_(std::move(shape)), params_(std::move(params)), mean_(std::move(mean)), scale_(std::move(scale)) {
    validate(shape_);
    if (params_.size() != shape_.parameter_count()) throw std::invalid_argument("TCN parameter vector has the wrong size");
}

Eigen::MatrixXd TcnAutoencoder::predict(const MatrixXd& series) const {
    if (static_cast<std::size_t>(series.cols()) != shape_.features) {
        throw std::invalid_argument("TcnAutoencoder::predict: feature count mismatch");
    }
    const MatrixXd x = standardize(series);
    const Layout L(shape_);
    Forward f = forward(shape_, L, params_.data(), x);
    MatrixXd out = (f.pred.array().rowwise() * scale_.array()).rowwise() + mean_.array();
    out.topRows(static_cast<Index>(std::min<std::size_t>(shape_.lag, static_cast<std::size_t>(series.rows())))).setZero();
    return out;
}

TcnAutoencoder fit_tcn_autoencoder(const MatrixXd& series, const TcnShape& shape, std::size_t epochs,
                                   double learning_rate, std::uint64_t seed) {
    validate(shape);
    if (epochs == 0) throw std::invalid_argument("fit_tcn_autoencoder: epochs must be >= 1");
    std::size_t widest = 0;
    for (std::size_t k : shape.kernels) widest = std::max(widest, k);
    if (static_cast<std::size_t>(series.rows()) <= std::max(widest, shape.lag)) {
        throw std::invalid_argument("fit_tcn_autoencoder: series not longer than the widest kernel");
    }
    if (static_cast<std::size_t>(series.cols()) != shape.features) {
        throw std::invalid_argument("fit_tcn_autoencoder: feature count mismatch");
    }
    Eigen::RowVectorXd mean = series.colwise().mean();
    Eigen::RowVectorXd scale = ((series.rowwise() - mean).array().square().colwise().mean()).sqrt().matrix();
    for (Index j = 0; j < scale.size(); ++j) {
        if (!(scale(j) > 0.0)) scale(j) = 1.0;
    }
    const MatrixXd x = (series.rowwise() - mean).array().rowwise() / scale.array();

    std::vector<double> params = init_tcn_parameters(shape, seed);
    std::vector<double> grad;
    std::vector<double> history;
    history.reserve(epochs);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const double value = TcnAutoencoder::loss(shape, params, x, &grad);
        if (!std::isfinite(value)) {
            throw DivergenceError(fmt::format("TCN training diverged at epoch {}", epoch + 1), epoch + 1);
        }
        history.push_back(value);
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= learning_rate * grad[i];
    }
    TcnAutoencoder model(shape, std::move(params), std::move(mean), std::move(scale));
    model.history_ = std::move(history);
    return model;
}

Eigen::MatrixXd TcnAutoencoder::standardize(const MatrixXd& series) const {
    return (series.rowwise() - mean_).array().rowwise() / scale_.array();
}

double tcn_reconstruction_mse(const TcnAutoencoder& model, const MatrixXd& series) {
    double rec = 0.0;
    TcnAutoencoder::loss(model.shape(), model.parameters(), model.standardize(series), nullptr, &rec);
    return rec;
}

} // namespace rca::causal
