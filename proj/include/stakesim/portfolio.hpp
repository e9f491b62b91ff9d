#pragma once

// Return model of a staking derivative position and the closed forms that
// come out of the bordered mean-variance system.

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "stakesim/pricing.hpp"
#include "stakesim/random.hpp"

namespace stakesim::portfolio {

struct ReturnsModel {
    double mu_s = 0.0;
    double mu_d = 0.0;
    double mu_l = 0.0;
    double sigma_s2 = 0.0;
    double sigma_l2 = 0.0;
    double D = 0.0;  ///< factor duration
    double B = 0.0;  ///< base return
    double C = 0.0;  ///< factor convexity
    double lambda_risk = 1.0;
};

/// Which argument the duration is differentiated in.
enum class ChainRule {
    Pseudocode,  ///< phi at the raw stake share, unit factor
    Normalized,  ///< phi at the affine argument, unit factor
    Affine,      ///< phi at the affine argument, factor 1/(1-c)
};

/// chain * (-phi'(u) / phi(u)). Throws ParameterError at u <= 0 (default boundary).
double duration(const core::PricingCurve& curve, double u, double chain_factor = 1.0);
/// chain^2 * phi''(u) / phi(u).
double convexity(const core::PricingCurve& curve, double u, double chain_factor = 1.0);

/// B + sigma_s^2 C / 2.
double mean_derivative_return(const ReturnsModel& m);

/// B - D mu_s + sigma_s^2 C / 2.
double instantaneous_return(const ReturnsModel& m);

/// sigma_s^2 [[1, D], [D, D^2]], bordered by sigma_l^2 when `with_lending`.
Eigen::MatrixXd covariance(const ReturnsModel& m, bool with_lending);
/// (mu_s, mu_d[, mu_l]).
Eigen::VectorXd mean_vector(const ReturnsModel& m, bool with_lending);

/// (IR / (D - 1) + mu_l) / (lambda sigma_l^2). Throws when |D - 1| <= 1e-6.
double lending_weight_closed_form(const ReturnsModel& m);

/// D/(D-1) above 1, 1/(D-1) below. Throws at D = 1.
double u_factor(double D);
/// max(|D/(D-1)|, |1/(1-D)|, 1).
double inverse_norm_closed_form(double D);
/// Induced 1-norm (max column sum) of the inverse of the two-asset bordered matrix.
double inverse_norm_numeric(double D, double lambda_sigma2);

/// |U(D_t)| |dmu_s + dmu_d| + |dD / ((D_t1 - 1)(D_t - 1))| |mu_s(t+1) + mu_d(t+1) + 1|.
double turnover_bound(const ReturnsModel& t, const ReturnsModel& t1);

/// (k / (k + 2/sigma^2))^(1/(k+1)).
double safe_borrow_limit(double k, double sigma_s2);

struct CIRParams {
    double kappa = 0.1;  ///< long-run level
    double xi = 0.1;     ///< vol of vol
    double dt = 1.0;
    double v0 = 0.1;

    void validate() const;
};

/// Full-truncation Euler step: v + (kappa - v+) dt + xi sqrt(v+ dt) Z, floored at 0.
double cir_step(const CIRParams& p, double v, Rng& rng);
double cir_step(const CIRParams& p, double v, double z);

struct LendingMarket {
    double base_rate = 0.02;
    double slope = 0.2;
    double supplied = 0.0;
    double demanded = 0.0;
};

/// clamp(base + slope * min(demanded / max(supplied, eps), 1), 0, 1).
double compute_borrow_rate(const LendingMarket& m);

/// Largest slope of phi, phi' and phi'' over [lo, hi] on a uniform grid.
double lipschitz_constant(const core::PricingCurve& curve, double lo, double hi, std::size_t samples = 20000);

/// One epoch of a segment fed to mu_bound_check.
struct SegmentPoint {
    double mu_s = 0.0;
    double mu_d = 0.0;
    double mu_l = 0.0;
    double stake = 0.0;   ///< staked amount
    double lend = 0.0;    ///< lent amount
    double supply = 1.0;  ///< S_t
};

struct MuBoundResult {
    bool holds = true;
    double fitted_c = 0.0;
    /// min over steps of rhs - lhs; negative when the inequality fails.
    double worst_margin = 0.0;
    std::size_t steps = 0;
};

/// Checks (1 - L sigma^2/2) ||dmu||_1 <= C (|dstake| (1 + 1/S) + |dlend|) + 2 eps at
/// every step, with C the smallest constant >= L for which
/// |dmu_s| + |dmu_l| <= C (|dstake| / S + |dlend|) holds on the segment.
/// Throws ParameterError when L >= 2 / sigma^2.
MuBoundResult mu_bound_check(std::span<const SegmentPoint> segment, double L, double sigma_s2, double epsilon = 0.0);

}  // namespace stakesim::portfolio
