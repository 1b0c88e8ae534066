#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace rca::testing {

// Worst relative error between an analytic gradient and central differences
// over the given coordinates.
inline double worst_fd_error(std::vector<double> params, const std::vector<double>& analytic,
                             const std::vector<std::size_t>& coords,
                             const std::function<double(const std::vector<double>&)>& loss, double h = 1e-6) {
    double worst = 0.0;
    for (std::size_t i : coords) {
        const double keep = params[i];
        params[i] = keep + h;
        const double up = loss(params);
        params[i] = keep - h;
        const double down = loss(params);
        params[i] = keep;
        const double fd = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(fd), std::abs(analytic[i]), 1e-7});
        worst = std::max(worst, std::abs(fd - analytic[i]) / scale);
    }
    return worst;
}

} // namespace rca::testing
