#pragma once

#include <Eigen/Dense>

#include <vector>

namespace rca::causal {

// Per step: cross(i, j) = max(C(i -> j), 0) * R(i, j), where C holds the
// strengths from level-l1 sources to level-l2 targets (|E1| x |E2|) and R the
// association degrees of the same pairs.
std::vector<Eigen::MatrixXd> cross_level_raw(const std::vector<Eigen::MatrixXd>& intra, const Eigen::MatrixXd& relation);

// Global min-max over all steps; a constant input becomes all zeros.
void minmax_normalize(std::vector<Eigen::MatrixXd>& steps);

std::vector<Eigen::MatrixXd> cross_level_causal(const std::vector<Eigen::MatrixXd>& intra,
                                                const Eigen::MatrixXd& relation);

} // namespace rca::causal
