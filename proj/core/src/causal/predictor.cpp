#include "rca/causal/predictor.hpp"

#include "rca/causal/latent_var.hpp"
#include "rca/causal/tcn.hpp"

#include <algorithm>
#include <stdexcept>

namespace rca::causal {

std::string_view to_string(PredictorKind kind) {
    return kind == PredictorKind::tcn ? "tcn" : "latent-var";
}

PredictorKind parse_predictor_kind(std::string_view text) {
    if (text == "latent-var") return PredictorKind::latent_var;
    if (text == "tcn") return PredictorKind::tcn;
    throw std::invalid_argument("unknown predictor kind '" + std::string(text) + "' (expected latent-var or tcn)");
}

std::unique_ptr<TemporalPredictor> fit_predictor(const Eigen::MatrixXd& series, const PredictorOptions& o) {
    const auto n = static_cast<std::size_t>(series.cols());
    const std::size_t d = o.latent_dim == 0 ? n : std::min(o.latent_dim, n);
    if (o.kind == PredictorKind::latent_var) {
        return std::make_unique<LatentVar>(fit_latent_var(series, o.lag, d, o.ridge));
    }
    TcnShape shape;
    shape.features = n;
    shape.latent_dim = d;
    shape.lag = o.lag;
    return std::make_unique<TcnAutoencoder>(fit_tcn_autoencoder(series, shape, o.epochs, o.learning_rate, o.seed));
}

} // namespace rca::causal
