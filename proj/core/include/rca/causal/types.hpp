#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace rca::causal {

// C[source][target][step] for one level or one level pair.
struct StrengthCube {
    std::string name; // e.g. "service" or "host->pod"
    bool cross = false;
    std::vector<std::string> sources;
    std::vector<std::string> targets;
    std::size_t steps = 0;
    std::vector<double> values;

    StrengthCube() = default;
    StrengthCube(std::string label, bool is_cross, std::vector<std::string> src, std::vector<std::string> dst,
                 std::size_t n_steps)
        : name(std::move(label)), cross(is_cross), sources(std::move(src)), targets(std::move(dst)), steps(n_steps),
          values(sources.size() * targets.size() * steps, 0.0) {}

    double& at(std::size_t i, std::size_t j, std::size_t s) { return values[(i * targets.size() + j) * steps + s]; }
    double at(std::size_t i, std::size_t j, std::size_t s) const { return values[(i * targets.size() + j) * steps + s]; }
    // Per-step matrix (sources x targets).
    Eigen::MatrixXd step(std::size_t s) const;
    void set_step(std::size_t s, const Eigen::MatrixXd& m);
};

struct CausalTensor {
    std::vector<std::string> entities;
    Eigen::MatrixXd signals; // windows x entities, one causal signal per entity
    std::vector<StrengthCube> cubes;
    std::size_t warmup = 0;       // windows before the first strength step
    std::size_t step_windows = 1; // windows per strength step
    double window_s = 5.0;
    double origin_s = 0.0;

    // Time (seconds) at the start of a strength step.
    double step_time(std::size_t step) const {
        return origin_s + static_cast<double>(warmup + step * step_windows) * window_s;
    }
};

struct CausalEdge {
    std::string source;
    std::string target;
    std::size_t onset_step = 0;
    double onset_s = 0.0;
    double strength = 0.0; // time-mean strength
    std::vector<double> profile;
    bool cross = false;
    double cmi_excess = std::numeric_limits<double>::quiet_NaN(); // smallest excess CMI seen in stage 2
};

struct CausalEdgeSet {
    std::vector<CausalEdge> edges;
    double threshold = 0.3;
    double cmi_cutoff = 0.01;
    std::size_t stage1_dropped = 0;
    std::size_t stage2_removed = 0;
    // Step -> seconds conversion copied from the tensor.
    std::size_t warmup = 0;
    std::size_t step_windows = 1;
    double window_s = 5.0;
    double origin_s = 0.0;

    double step_time(std::size_t step) const {
        return origin_s + static_cast<double>(warmup + step * step_windows) * window_s;
    }
};

} // namespace rca::causal
