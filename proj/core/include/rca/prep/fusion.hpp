#pragma once

#include "rca/prep/tensor.hpp"

#include <array>
#include <vector>

namespace rca::prep {

// Per (window, entity) weights of the metric, log and trace blocks.
struct ModalWeights {
    std::size_t windows = 0;
    std::size_t entities = 0;
    std::vector<std::array<double, 3>> w;

    const std::array<double, 3>& at(std::size_t t, std::size_t e) const { return w[t * entities + e]; }
};

struct FusedFeatures {
    std::size_t windows = 0;
    std::size_t entities = 0;
    std::size_t dims = 0;
    std::vector<double> values; // windows x entities x dims
    ModalWeights weights;

    double at(std::size_t t, std::size_t e, std::size_t f) const { return values[(t * entities + e) * dims + f]; }
};

// Each feature column is z-scored per entity across windows. A block's
// anomaly score is its mean |z|; weights are the softmax of the three scores
// and each block is scaled by its weight. Without modal attention every
// block gets weight 1/3.
FusedFeatures fuse_modalities(const FeatureTensor& tensor, bool modal_attention = true);

// Softmax of three scores (exposed for tests).
std::array<double, 3> modal_softmax(const std::array<double, 3>& scores);

// Mean fused vector of every entity over windows [begin, end).
std::vector<std::vector<double>> node_features(const FusedFeatures& fused, std::size_t begin, std::size_t end);

} // namespace rca::prep
