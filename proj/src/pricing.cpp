#include "stakesim/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stakesim/errors.hpp"

namespace stakesim::core {

namespace {

double eval_table(const TableDriven& t, double u) {
    const auto& knots = t.knots;
    if (u >= 1.0) return 1.0;
    if (u <= knots.front().first) return knots.front().second * knots.front().first / u;
    auto hi = std::upper_bound(knots.begin(), knots.end(), u,
                               [](double x, const auto& knot) { return x < knot.first; });
    auto lo = std::prev(hi);
    const double t01 = (u - lo->first) / (hi->first - lo->first);
    return lo->second + t01 * (hi->second - lo->second);
}

template <class F>
double central_difference(F&& f, double u, double rel_step) {
    const double h = rel_step * u;
    return (f(u + h) - f(u - h)) / (2.0 * h);
}

// u == 1 uses a backward difference so the flat branch does not leak in.
double table_derivative(const TableDriven& t, double u) {
    if (u >= 1.0) {
        if (u > 1.0) return 0.0;
        const double h = 1e-6;
        return (1.0 - eval_table(t, 1.0 - h)) / h;
    }
    return central_difference([&](double x) { return eval_table(t, std::min(x, 1.0)); }, u, 1e-6);
}

}  // namespace

PricingCurve::PricingCurve(PowerLaw p) : kind_(p) {
    if (!(p.k >= 0.0) || !std::isfinite(p.k)) throw ParameterError("power-law exponent must be finite and >= 0");
}

PricingCurve::PricingCurve(TableDriven t) {
    const auto& knots = t.knots;
    if (knots.empty()) throw ParameterError("pricing table is empty");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const auto [u, phi] = knots[i];
        if (!(u > 0.0) || u > 1.0 || !std::isfinite(phi))
            throw ParameterError("pricing table knot " + std::to_string(i) + " outside (0, 1]");
        if (i > 0 && !(u > knots[i - 1].first))
            throw ParameterError("pricing table abscissae must be strictly increasing");
        if (i > 0 && !(phi < knots[i - 1].second))
            throw ParameterError("pricing table values must be strictly decreasing");
    }
    if (knots.back().first != 1.0 || knots.back().second != 1.0)
        throw ParameterError("pricing table must end at (1, 1)");
    kind_ = std::move(t);
}

double PricingCurve::exponent() const {
    if (const auto* p = std::get_if<PowerLaw>(&kind_)) return p->k;
    throw ParameterError("table-driven curve has no exponent");
}

double eval_mother(const PricingCurve& curve, double u) {
    if (std::isnan(u) || u < 0.0) throw ParameterError("mother curve evaluated at negative argument");
    if (u == 0.0) return kDefaultPrice;
    if (const auto* p = std::get_if<PowerLaw>(&curve.kind())) {
        if (u >= 1.0) return 1.0;
        return std::pow(u, -p->k);
    }
    return eval_table(std::get<TableDriven>(curve.kind()), u);
}

double mother_derivative(const PricingCurve& curve, double u) {
    if (!(u > 0.0)) throw ParameterError("derivative requested at the default boundary");
    if (u > 1.0) return 0.0;
    if (const auto* p = std::get_if<PowerLaw>(&curve.kind())) {
        if (p->k == 0.0) return 0.0;
        return -p->k * std::pow(u, -p->k - 1.0);
    }
    return table_derivative(std::get<TableDriven>(curve.kind()), u);
}

double mother_second_derivative(const PricingCurve& curve, double u) {
    if (!(u > 0.0)) throw ParameterError("derivative requested at the default boundary");
    if (u > 1.0) return 0.0;
    if (const auto* p = std::get_if<PowerLaw>(&curve.kind())) {
        if (p->k == 0.0) return 0.0;
        return p->k * (p->k + 1.0) * std::pow(u, -p->k - 2.0);
    }
    const auto& t = std::get<TableDriven>(curve.kind());
    const double x = std::min(u, 1.0 - 1e-6 * u);
    return central_difference([&](double y) { return table_derivative(t, y); }, x, 1e-6);
}

AffineCoefficients calibrate_affine(double c, double stake_at_issue) {
    if (!(c > 0.0 && c < 1.0)) throw ParameterError("collateral factor must lie in (0, 1)");
    if (!(stake_at_issue > 0.0)) throw ParameterError("issuance stake must be positive");
    return {1.0 / (stake_at_issue * (1.0 - c)), -c / (1.0 - c)};
}

ValidatorPricing::ValidatorPricing(double collateral, double stake_at_issue, double debt)
    : c_(collateral), stake_at_issue_(stake_at_issue), debt_(debt) {
    calibrate_affine(collateral, stake_at_issue);
    if (!(debt >= 0.0)) throw ParameterError("debt must be non-negative");
}

double ValidatorPricing::a() const { return calibrate_affine(c_, stake_at_issue_).a; }
double ValidatorPricing::b() const { return calibrate_affine(c_, stake_at_issue_).b; }

double ValidatorPricing::argument(double stake) const {
    double s = stake, issue = stake_at_issue_;
    // power-of-two rescale is exact and keeps tiny balances out of the subnormal range
    if (issue < 0x1p-900) {
        s = std::ldexp(s, 1000);
        issue = std::ldexp(issue, 1000);
    }
    const double threshold = c_ * issue;
    return (s - threshold) / (issue - threshold);
}

double validator_price(const ValidatorPricing& vp, const PricingCurve& curve, double current_stake) {
    const double u = vp.argument(current_stake);
    if (u <= 0.0) return kDefaultPrice;
    return eval_mother(curve, u);
}

double aggregate_prices(const AggregationRule& rule, std::span<const double> prices) {
    if (prices.empty()) throw ParameterError("cannot aggregate an empty price vector");
    if (const auto* bm = std::get_if<BoundedMean>(&rule)) {
        double sum = 0.0;
        for (double p : prices)
            sum += bm->mode == BoundMode::Clamp ? std::min(p, bm->phi_max) : std::max(p, bm->phi_max);
        return sum / static_cast<double>(prices.size());
    }
    std::vector<double> sorted(prices.begin(), prices.end());
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    return *mid;
}

}  // namespace stakesim::core
