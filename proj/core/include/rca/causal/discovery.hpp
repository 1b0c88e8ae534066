#pragma once

#include "rca/causal/predictor.hpp"
#include "rca/causal/strength.hpp"
#include "rca/causal/types.hpp"
#include "rca/prep/tensor.hpp"
#include "rca/sim/topology.hpp"

namespace rca::causal {

// One series per entity: among its metric window means, its ERROR log count
// and (services) its mean trace latency, the candidate with the largest
// lag-1 autocorrelation, z-scored. Persistent faults drive smooth signals;
// measurement noise does not.
Eigen::MatrixXd select_causal_signals(const prep::FeatureTensor& tensor);

// C / (1 + C) for C > 0, else 0: the share of the perturbed loss that the
// source's history accounts for. Keeps heavy-tailed ratios on [0, 1).
double bounded_strength(double c);

// Joint min-max over every step of every cube (self pairs held at 0).
void normalize_cubes(std::vector<StrengthCube>& cubes);

struct DiscoveryOptions {
    PredictorOptions predictor{PredictorKind::latent_var, 6, 0, 50.0};
    StrengthOptions strength{0, 10, 20, 1};
    bool cross_level = true;
};

// Per-level strength cubes from one predictor per entity kind, plus (when
// enabled) host->pod and pod->service cubes from joint predictors over both
// levels scaled by association degree. Strengths are bounded per step and
// then min-max normalized jointly over all cubes, so one threshold applies
// to every level.
CausalTensor discover_causality(const prep::FeatureTensor& tensor, const sim::Topology& topology,
                                const DiscoveryOptions& options = {});

} // namespace rca::causal
