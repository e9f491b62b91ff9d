#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace stakesim::harness {

/// Sample Gini coefficient sum_ij |x_i - x_j| / (2 n^2 mean). A zero-sum
/// vector is defined as 0.
double gini(std::span<const double> x);

/// ||x||_2 / ||x||_1; 0 for the zero vector.
double norm_ratio(std::span<const double> x);

/// One sampled height of a trajectory.
struct MetricPoint {
    std::uint64_t h = 0;
    double gini = 0.0;
    double norm_ratio = 0.0;
    double supply_ratio = 0.0;
    double frac_defaulted = 0.0;
    std::size_t alive = 0;
    std::optional<std::array<double, 3>> weights;  ///< mean (w_s, w_d, w_l) over alive agents
};

using TrajectoryRecord = std::vector<MetricPoint>;

}  // namespace stakesim::harness
