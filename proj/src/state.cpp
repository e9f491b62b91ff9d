#include "stakesim/state.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "stakesim/errors.hpp"

namespace stakesim::core {

StakeState StakeState::with_stakes(std::vector<double> stakes) {
    StakeState s;
    const std::size_t n = stakes.size();
    s.stakes = std::move(stakes);
    s.loans.assign(n, 0.0);
    s.lent.assign(n, 0.0);
    s.max_supply = s.total_stake();
    return s;
}

double StakeState::total_stake() const { return std::accumulate(stakes.begin(), stakes.end(), 0.0); }
double StakeState::total_lent() const { return std::accumulate(lent.begin(), lent.end(), 0.0); }
double StakeState::total_loans() const { return std::accumulate(loans.begin(), loans.end(), 0.0); }
double StakeState::circulating() const { return total_stake() + total_lent() + total_loans(); }

void StakeState::check_invariants() const {
    auto check = [](const std::vector<double>& v, const char* what) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!(v[i] >= 0.0) || !std::isfinite(v[i]))
                throw NumericError(std::string(what) + "[" + std::to_string(i) + "] is negative or not finite");
    };
    check(stakes, "stake");
    check(loans, "loan");
    check(lent, "lent");
    if (!(burned >= 0.0)) throw NumericError("burned supply is negative");
    if (total_stake() + total_lent() + burned > max_supply * (1.0 + 1e-9))
        throw NumericError("held supply exceeds maximum supply");
}

double StakeState::rescale(double threshold) {
    if (!(max_supply > threshold)) return 1.0;
    const double f = max_supply;
    for (auto* v : {&stakes, &loans, &lent})
        for (double& x : *v) x /= f;
    burned /= f;
    max_supply = 1.0;
    unit_log += std::log(f);
    return f;
}

}  // namespace stakesim::core
