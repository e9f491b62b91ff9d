#include "stakesim/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stakesim/errors.hpp"
#include "stakesim/markowitz.hpp"

namespace stakesim::portfolio {

double duration(const core::PricingCurve& curve, double u, double chain_factor) {
    if (!(u > 0.0)) throw ParameterError("duration undefined at or beyond the default boundary");
    return -chain_factor * core::mother_derivative(curve, u) / core::eval_mother(curve, u);
}

double convexity(const core::PricingCurve& curve, double u, double chain_factor) {
    if (!(u > 0.0)) throw ParameterError("convexity undefined at or beyond the default boundary");
    return chain_factor * chain_factor * core::mother_second_derivative(curve, u) / core::eval_mother(curve, u);
}

double mean_derivative_return(const ReturnsModel& m) { return m.B + 0.5 * m.sigma_s2 * m.C; }

double instantaneous_return(const ReturnsModel& m) { return m.B - m.D * m.mu_s + 0.5 * m.sigma_s2 * m.C; }

Eigen::MatrixXd covariance(const ReturnsModel& m, bool with_lending) {
    const Eigen::Index n = with_lending ? 3 : 2;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    s(0, 0) = m.sigma_s2;
    s(0, 1) = s(1, 0) = m.D * m.sigma_s2;
    s(1, 1) = m.D * m.D * m.sigma_s2;
    if (with_lending) s(2, 2) = m.sigma_l2;
    return s;
}

Eigen::VectorXd mean_vector(const ReturnsModel& m, bool with_lending) {
    Eigen::VectorXd mu(with_lending ? 3 : 2);
    mu(0) = m.mu_s;
    mu(1) = m.mu_d;
    if (with_lending) mu(2) = m.mu_l;
    return mu;
}

double lending_weight_closed_form(const ReturnsModel& m) {
    if (!(std::abs(m.D - 1.0) > 1e-6)) throw ParameterError("lending weight is singular at D = 1");
    if (!(m.sigma_l2 > 0.0) || !(m.lambda_risk > 0.0)) throw ParameterError("need sigma_l^2 > 0 and lambda > 0");
    return (instantaneous_return(m) / (m.D - 1.0) + m.mu_l) / (m.lambda_risk * m.sigma_l2);
}

double u_factor(double D) {
    if (D == 1.0) throw ParameterError("U(D) is undefined at D = 1");
    return D > 1.0 ? D / (D - 1.0) : 1.0 / (D - 1.0);
}

double inverse_norm_closed_form(double D) {
    if (D == 1.0) throw ParameterError("bordered matrix is singular at D = 1");
    return std::max({std::abs(D / (D - 1.0)), std::abs(1.0 / (1.0 - D)), 1.0});
}

double inverse_norm_numeric(double D, double lambda_sigma2) {
    Eigen::MatrixXd s(2, 2);
    s << 1.0, D, D, D * D;
    const Eigen::MatrixXd inv = bordered_matrix(s, lambda_sigma2).inverse();
    return inv.cwiseAbs().colwise().sum().maxCoeff();
}

double turnover_bound(const ReturnsModel& t, const ReturnsModel& t1) {
    if (t.D == 1.0 || t1.D == 1.0) throw ParameterError("turnover bound is singular at D = 1");
    const double d_mu = (t1.mu_s - t.mu_s) + (t1.mu_d - t.mu_d);
    const double dD = t1.D - t.D;
    return std::abs(u_factor(t.D)) * std::abs(d_mu) +
           std::abs(dD / ((t1.D - 1.0) * (t.D - 1.0))) * std::abs(t1.mu_s + t1.mu_d + 1.0);
}

double safe_borrow_limit(double k, double sigma_s2) {
    if (!(k > 0.0) || !(sigma_s2 > 0.0)) throw ParameterError("safe borrow limit needs k > 0 and sigma^2 > 0");
    return std::pow(k / (k + 2.0 / sigma_s2), 1.0 / (k + 1.0));
}

void CIRParams::validate() const {
    if (!(kappa >= 0.0) || !(xi >= 0.0) || !(v0 >= 0.0)) throw ParameterError("CIR parameters must be non-negative");
    if (!(dt > 0.0)) throw ParameterError("CIR step must be positive");
}

double cir_step(const CIRParams& p, double v, double z) {
    const double vp = std::max(v, 0.0);
    const double next = v + (p.kappa - vp) * p.dt + p.xi * std::sqrt(vp * p.dt) * z;
    return std::max(next, 0.0);
}

double cir_step(const CIRParams& p, double v, Rng& rng) { return cir_step(p, v, rng.normal()); }

double compute_borrow_rate(const LendingMarket& m) {
    if (!(m.supplied >= 0.0) || !(m.demanded >= 0.0)) throw ParameterError("lending market balances must be >= 0");
    const double utilization = std::min(m.demanded / std::max(m.supplied, 1e-12), 1.0);
    return std::clamp(m.base_rate + m.slope * utilization, 0.0, 1.0);
}

double lipschitz_constant(const core::PricingCurve& curve, double lo, double hi, std::size_t samples) {
    if (!(lo > 0.0) || !(hi > lo) || samples < 2) throw ParameterError("bad Lipschitz interval");
    const double h = (hi - lo) / static_cast<double>(samples - 1);
    double best = 0.0;
    double prev[3] = {};
    for (std::size_t i = 0; i < samples; ++i) {
        const double u = lo + h * static_cast<double>(i);
        const double cur[3] = {core::eval_mother(curve, u), core::mother_derivative(curve, u),
                               core::mother_second_derivative(curve, u)};
        if (i > 0)
            for (int j = 0; j < 3; ++j) best = std::max(best, std::abs(cur[j] - prev[j]) / h);
        std::copy(cur, cur + 3, prev);
    }
    return best;
}

MuBoundResult mu_bound_check(std::span<const SegmentPoint> segment, double L, double sigma_s2, double epsilon) {
    if (!(sigma_s2 > 0.0) || !(L >= 0.0)) throw ParameterError("need L >= 0 and sigma^2 > 0");
    if (!(L < 2.0 / sigma_s2)) throw ParameterError("L >= 2/sigma^2: outside the safe regime");
    MuBoundResult r;
    if (segment.size() < 2) return r;
    r.steps = segment.size() - 1;

    for (std::size_t t = 0; t + 1 < segment.size(); ++t) {
        const auto& a = segment[t];
        const auto& b = segment[t + 1];
        const double num = std::abs(b.mu_s - a.mu_s) + std::abs(b.mu_l - a.mu_l);
        const double den = std::abs(b.stake - a.stake) / a.supply + std::abs(b.lend - a.lend);
        if (num == 0.0) continue;
        r.fitted_c = den > 0.0 ? std::max(r.fitted_c, num / den) : std::numeric_limits<double>::infinity();
    }

    // the last step of the argument folds L |dstake| into C
    r.fitted_c = std::max(r.fitted_c, L);
    const double factor = 1.0 - 0.5 * L * sigma_s2;
    r.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t + 1 < segment.size(); ++t) {
        const auto& a = segment[t];
        const auto& b = segment[t + 1];
        const double lhs = factor * (std::abs(b.mu_s - a.mu_s) + std::abs(b.mu_d - a.mu_d) + std::abs(b.mu_l - a.mu_l));
        const double drive = std::abs(b.stake - a.stake) * (1.0 + 1.0 / a.supply) + std::abs(b.lend - a.lend);
        const double rhs = (drive > 0.0 ? r.fitted_c * drive : 0.0) + 2.0 * epsilon;
        r.worst_margin = std::min(r.worst_margin, rhs - lhs);
        if (lhs > rhs) r.holds = false;
    }
    return r;
}

}  // namespace stakesim::portfolio
