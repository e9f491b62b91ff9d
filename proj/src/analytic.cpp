#include "stakesim/analytic.hpp"

#include <limits>

#include "stakesim/errors.hpp"
#include "stakesim/portfolio.hpp"
#include "stakesim/urn.hpp"

namespace stakesim::harness {

std::vector<AnalyticRow> analytic_report(const AnalyticGrid& grid) {
    if (grid.p.empty() || grid.k.empty() || grid.sigma_s2.empty()) throw ParameterError("analytic grid has an empty axis");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<AnalyticRow> rows;
    rows.reserve(grid.p.size() * grid.k.size() * grid.sigma_s2.size());
    for (double p : grid.p) {
        const double gamma = urn::ruin_probability(p);
        const double beta = p < 0.5 ? urn::terminal_beta(p) : inf;
        const double aleph = p < 0.5 ? urn::dispersion_aleph(p, gamma, beta) : inf;
        for (double k : grid.k)
            for (double s2 : grid.sigma_s2)
                rows.push_back({p, gamma, beta, aleph, k, s2, portfolio::safe_borrow_limit(k, s2)});
    }
    return rows;
}

}  // namespace stakesim::harness
