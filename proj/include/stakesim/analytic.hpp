#pragma once

#include <vector>

#include "stakesim/csv.hpp"

namespace stakesim::harness {

struct AnalyticGrid {
    std::vector<double> p{0.0, 0.1, 0.2, 0.25, 0.3, 0.4, 0.45, 0.5};
    std::vector<double> k{0.5, 1.0, 2.0, 4.0};
    std::vector<double> sigma_s2{0.5, 1.0, 2.0};
};

/// One row per (p, k, sigma^2). For p >= 1/2 the terminal law does not
/// exist and beta, aleph are reported as inf.
std::vector<AnalyticRow> analytic_report(const AnalyticGrid& grid);

}  // namespace stakesim::harness
