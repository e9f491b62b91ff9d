#include "stakesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stakesim::harness {

double gini(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return 0.0;
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
    if (!(total > 0.0)) return 0.0;
    // sum_ij |x_i - x_j| = 2 sum_i (2i - n - 1) x_(i) with 1-based ranks
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        weighted += (2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) * sorted[i];
    return std::clamp(weighted / (static_cast<double>(n) * total), 0.0, 1.0);
}

double norm_ratio(std::span<const double> x) {
    double l1 = 0.0, scale = 0.0;
    for (double v : x) {
        l1 += std::abs(v);
        scale = std::max(scale, std::abs(v));
    }
    if (!(l1 > 0.0)) return 0.0;
    double ss = 0.0;
    for (double v : x) ss += (v / scale) * (v / scale);
    return scale * std::sqrt(ss) / l1;
}

}  // namespace stakesim::harness
