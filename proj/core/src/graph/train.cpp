#include "rca/graph/train.hpp"

#include "rca/common/error.hpp"
#include "rca/common/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rca::graph {

namespace {

double mean_loss(const GatModel& model, const std::vector<LabeledGraph>& graphs, const std::vector<std::size_t>& idx,
                 std::vector<double>* grad) {
    if (grad) grad->assign(model.params.size(), 0.0);
    double total = 0.0;
    for (std::size_t i : idx) total += gat_loss(model, graphs[i].graph, graphs[i].labels, grad);
    const double scale = 1.0 / static_cast<double>(idx.size());
    if (grad) {
        for (auto& g : *grad) g *= scale;
    }
    return total * scale;
}

} // namespace

TrainResult train_gat(GatModel model, const std::vector<LabeledGraph>& graphs, const TrainOptions& options) {
    if (graphs.empty()) throw std::invalid_argument("train_gat: at least one labeled graph is required");
    if (options.epochs == 0) throw std::invalid_argument("train_gat: epochs must be positive");

    std::vector<std::size_t> order(graphs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(options.seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    std::size_t held = static_cast<std::size_t>(std::floor(options.validation_fraction * static_cast<double>(graphs.size())));
    if (held >= graphs.size()) held = graphs.size() - 1;
    const std::vector<std::size_t> train(order.begin(), order.end() - static_cast<std::ptrdiff_t>(held));
    const std::vector<std::size_t> valid(order.end() - static_cast<std::ptrdiff_t>(held), order.end());

    TrainResult result;
    result.model = model;
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::vector<double> grad;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        const double loss = mean_loss(model, graphs, train, &grad);
        if (!std::isfinite(loss)) {
            throw DivergenceError(fmt::format("GAT training diverged at epoch {}", epoch + 1), epoch + 1);
        }
        const double check = valid.empty() ? loss : mean_loss(model, graphs, valid, nullptr);
        result.loss_history.push_back(loss);
        result.validation_history.push_back(check);
        if (check < best) {
            best = check;
            since_best = 0;
            result.model = model;
            result.best_epoch = epoch;
        } else if (++since_best >= options.patience) {
            result.stopped_early = true;
            break;
        }
        for (std::size_t i = 0; i < grad.size(); ++i) model.params[i] -= options.learning_rate * grad[i];
    }
    return result;
}

} // namespace rca::graph
