#include <doctest.h>

#include <cmath>
#include <vector>

#include "stakesim/errors.hpp"
#include "stakesim/markowitz.hpp"
#include "stakesim/portfolio.hpp"
#include "stakesim/random.hpp"

using namespace stakesim;
using namespace stakesim::portfolio;
using core::PricingCurve;

namespace {

// KKT solve by elimination for the two-asset rank-one covariance, written
// out by hand so it shares nothing with the bordered solver.
Eigen::Vector2d two_asset_by_hand(double mu_s, double mu_d, double D, double ls2) {
    // w_s + w_d = 1, x = w_s + D w_d, (D - 1) ls2 x = mu_d - mu_s
    const double x = (mu_d - mu_s) / ((D - 1.0) * ls2);
    const double wd = (x - 1.0) / (D - 1.0);
    return {1.0 - wd, wd};
}

ReturnsModel random_model(Rng& rng) {
    ReturnsModel m;
    do {
        m.D = 4.0 * rng.uniform();
    } while (std::abs(m.D - 1.0) <= 0.05);
    m.mu_s = 0.2 * rng.uniform() - 0.05;
    m.B = 0.2 * rng.uniform() - 0.05;
    m.C = 3.0 * rng.uniform();
    m.sigma_s2 = 0.01 + rng.uniform();
    m.sigma_l2 = 0.01 + rng.uniform();
    m.mu_l = 0.1 * rng.uniform();
    m.lambda_risk = 0.2 + 5.0 * rng.uniform();
    m.mu_d = mean_derivative_return(m);
    return m;
}

}

TEST_SUITE("portfolio") {

TEST_CASE("duration examples") {
    for (double k : {0.5, 1.0, 3.0}) CHECK(duration(PricingCurve::power_law(k), 1.0) == doctest::Approx(k));
    CHECK(duration(PricingCurve::power_law(0.0), 0.6) == 0.0);
    CHECK(convexity(PricingCurve::power_law(0.0), 0.6) == 0.0);
    CHECK(duration(PricingCurve::power_law(2.0), 0.5) == doctest::Approx(4.0));
    CHECK(duration(PricingCurve::power_law(2.0), 0.5, 3.0) == doctest::Approx(12.0));
    CHECK(convexity(PricingCurve::power_law(2.0), 0.5) == doctest::Approx(6.0 / 0.25));
    CHECK_THROWS_AS(duration(PricingCurve::power_law(2.0), 0.0), ParameterError);
    CHECK_THROWS_AS(convexity(PricingCurve::power_law(2.0), -1.0), ParameterError);
}

TEST_CASE("analytic derivatives match central differences") {
    Rng rng(61);
    for (int t = 0; t < 1000; ++t) {
        const auto curve = PricingCurve::power_law(0.25 + 4.0 * rng.uniform());
        const double u = 0.1 + 0.85 * rng.uniform();
        const double h = 1e-5 * u;
        const double d1 = (core::eval_mother(curve, u + h) - core::eval_mother(curve, u - h)) / (2.0 * h);
        const double d2 = (core::mother_derivative(curve, u + h) - core::mother_derivative(curve, u - h)) / (2.0 * h);
        REQUIRE(core::mother_derivative(curve, u) == doctest::Approx(d1).epsilon(1e-6));
        REQUIRE(core::mother_second_derivative(curve, u) == doctest::Approx(d2).epsilon(1e-6));
    }
}

TEST_CASE("mean derivative return examples") {
    ReturnsModel m;
    m.B = 0.03;
    CHECK(mean_derivative_return(m) == 0.03);
    m.sigma_s2 = 0.2;
    m.C = 1.0;
    const double before = mean_derivative_return(m);
    m.C = 2.0;
    CHECK(mean_derivative_return(m) - before == doctest::Approx(0.1));
    m.B = 0.02;
    m.sigma_s2 = 0.04;
    m.C = 3.0;
    CHECK(mean_derivative_return(m) == doctest::Approx(0.08));
}

TEST_CASE("markowitz examples") {
    Eigen::Vector2d mu(0.1, 0.05);
    Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
    s(0, 0) = 0.05;
    auto r = solve_markowitz(mu, s, 1.0);
    CHECK(r.w(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(r.w(1)) < 1e-12);

    const Eigen::Vector3d same(0.07, 0.07, 0.07);
    r = solve_markowitz(same, 0.3 * Eigen::Matrix3d::Identity(), 2.0);
    for (int i = 0; i < 3; ++i) CHECK(r.w(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    ReturnsModel m;
    m.D = 2.0;
    m.lambda_risk = 1.0;
    m.sigma_s2 = 0.04;
    m.sigma_l2 = 0.01;
    m.mu_s = 0.1;
    m.mu_d = 0.15;
    m.B = 0.15;  // C = 0 so mu_d = B and IR = mu_d - D mu_s = -0.05
    m.mu_l = 0.05;
    CHECK(instantaneous_return(m) == doctest::Approx(-0.05));
    CHECK(std::abs(lending_weight_closed_form(m)) < 1e-12);
    r = solve_markowitz(mean_vector(m, true), covariance(m, true), m.lambda_risk);
    CHECK(std::abs(r.w(2)) < 1e-10);
    m.mu_l = 0.06;
    CHECK(lending_weight_closed_form(m) == doctest::Approx(1.0).epsilon(1e-12));
    r = solve_markowitz(mean_vector(m, true), covariance(m, true), m.lambda_risk);
    CHECK(r.w(2) == doctest::Approx(1.0).epsilon(1e-10));

    // the steep-curve limit leaves lending competing with staking only
    m.D = 1e7;
    m.B = m.mu_d = 0.0;
    const double lim = (m.mu_l - m.mu_s) / (m.lambda_risk * m.sigma_l2);
    CHECK(lending_weight_closed_form(m) == doctest::Approx(lim).epsilon(1e-5));

    CHECK_THROWS_AS(solve_markowitz(mu, -s, 1.0), ParameterError);
    CHECK_THROWS_AS(solve_markowitz(Eigen::VectorXd::Ones(4), Eigen::MatrixXd::Identity(4, 4), 1.0), ParameterError);
    m.D = 1.0;
    CHECK_THROWS_AS(lending_weight_closed_form(m), ParameterError);
}

TEST_CASE("two asset solve matches hand elimination") {
    Rng rng(62);
    for (int t = 0; t < 2000; ++t) {
        const auto m = random_model(rng);
        const auto r = solve_markowitz(mean_vector(m, false), covariance(m, false), m.lambda_risk);
        const auto w = two_asset_by_hand(m.mu_s, m.mu_d, m.D, m.lambda_risk * m.sigma_s2);
        REQUIRE(r.w(0) == doctest::Approx(w(0)).epsilon(1e-9).scale(1.0));
        REQUIRE(r.w(1) == doctest::Approx(w(1)).epsilon(1e-9).scale(1.0));
        REQUIRE(std::abs(r.w.sum() - 1.0) < 1e-10);
    }
}

TEST_CASE("lending closed form equals the bordered solve") {
    Rng rng(63);
    for (int t = 0; t < 2000; ++t) {
        const auto m = random_model(rng);
        const auto r = solve_markowitz(mean_vector(m, true), covariance(m, true), m.lambda_risk);
        const double cf = lending_weight_closed_form(m);
        REQUIRE(r.w(2) == doctest::Approx(cf).epsilon(1e-10).scale(1.0));
        REQUIRE(std::abs(r.w.sum() - 1.0) < 1e-10);
    }
}

TEST_CASE("solver constraint under extreme durations") {
    Rng rng(64);
    for (double D : {0.0, 1e-6, 1.0 - 1e-9, 1.0, 1.0 + 1e-9, 50.0, 1e3, 1e5}) {
        Eigen::Vector3d mu(rng.uniform(), rng.uniform(), rng.uniform());
        Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
        s.topLeftCorner<2, 2>() << 1.0, D, D, D * D;
        s(2, 2) = 0.3;
        const auto r = solve_markowitz(mu, s, 3.0);
        CAPTURE(D);
        REQUIRE(r.w.allFinite());
        if (std::abs(D - 1.0) < 1e-6) {
            // numerically singular: the ridge solution carries weights of order 1/ridge,
            // so the budget row can only hold to rounding of their sum
            CHECK(r.regularized);
            REQUIRE(std::abs(r.w.sum() - 1.0) < 1e-10 * std::max(1.0, r.w.lpNorm<1>() * 1e-6));
        } else {
            REQUIRE(std::abs(r.w.sum() - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("long-only option") {
    const Eigen::Vector3d mu(0.3, -0.2, 0.05);
    const Eigen::Matrix3d s = Eigen::Vector3d(0.1, 0.2, 0.1).asDiagonal();
    MarkowitzOptions opt;
    opt.long_only = true;
    const auto r = solve_markowitz(mu, s, 1.0, opt);
    CHECK((r.w.array() >= 0.0).all());
    CHECK(r.w.sum() == doctest::Approx(1.0));
    CHECK(r.w(1) == 0.0);
    // brute force over a simplex grid
    double best = -1e300;
    for (int a = 0; a <= 200; ++a)
        for (int b = 0; a + b <= 200; ++b) {
            const Eigen::Vector3d w(a / 200.0, b / 200.0, (200 - a - b) / 200.0);
            best = std::max(best, w.dot(mu) - 0.5 * w.dot(s * w));
        }
    CHECK(r.w.dot(mu) - 0.5 * r.w.dot(s * r.w) >= best - 1e-12);
}

TEST_CASE("U factor and turnover examples") {
    ReturnsModel a, b;
    a.D = b.D = 2.0;
    CHECK(turnover_bound(a, b) == 0.0);
    CHECK(std::abs(u_factor(2.0)) == doctest::Approx(2.0));
    CHECK(std::abs(u_factor(0.5)) == doctest::Approx(2.0));
    CHECK(std::abs(u_factor(0.0)) == doctest::Approx(1.0));
    b.D = 3.0;
    b.mu_s = 0.1;
    b.mu_d = 0.1;
    a.mu_s = 0.1;
    a.mu_d = 0.09;
    CHECK(turnover_bound(a, b) == doctest::Approx(0.62));
    a.D = 1.0;
    CHECK_THROWS_AS(turnover_bound(a, b), ParameterError);
    CHECK_THROWS_AS(u_factor(1.0), ParameterError);
    CHECK(inverse_norm_closed_form(2.0) == doctest::Approx(2.0));
    CHECK(inverse_norm_closed_form(0.0) == doctest::Approx(1.0));
}

TEST_CASE("safe borrow limit examples") {
    CHECK(safe_borrow_limit(1.0, 2.0) == doctest::Approx(std::sqrt(0.5)));
    CHECK(safe_borrow_limit(1.0, 2.0 / 3.0) == doctest::Approx(0.5));
    CHECK(safe_borrow_limit(2.0, 1e9) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(safe_borrow_limit(0.0, 1.0), ParameterError);
}

TEST_CASE("cir step") {
    const CIRParams p{0.1, 0.0, 0.5, 0.1};
    CHECK(cir_step(p, 0.1, 1.7) == 0.1);
    CHECK(cir_step(p, 0.2, -0.3) == doctest::Approx(0.15));
    Rng rng(65);
    const CIRParams wild{0.05, 2.0, 1.0, 0.0};
    double v = 0.0;
    for (int t = 0; t < 1000000; ++t) {
        v = cir_step(wild, v, rng);
        REQUIRE(v >= 0.0);
    }
    CHECK_THROWS_AS((CIRParams{0.1, 0.1, 0.0, 0.1}.validate()), ParameterError);
    CHECK_THROWS_AS((CIRParams{-0.1, 0.1, 1.0, 0.1}.validate()), ParameterError);
}

TEST_CASE("borrow rate") {
    CHECK(compute_borrow_rate({0.02, 0.2, 10.0, 0.0}) == doctest::Approx(0.02));
    CHECK(compute_borrow_rate({0.02, 0.2, 10.0, 5.0}) == doctest::Approx(0.12));
    CHECK(compute_borrow_rate({0.02, 0.2, 10.0, 50.0}) == doctest::Approx(0.22));
    CHECK(compute_borrow_rate({0.02, 0.2, 0.0, 1.0}) == doctest::Approx(0.22));
    CHECK(compute_borrow_rate({0.9, 0.5, 1.0, 1.0}) == 1.0);
    Rng rng(66);
    for (int t = 0; t < 1000; ++t) {
        const double r = compute_borrow_rate({rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()});
        REQUIRE(r >= 0.0);
        REQUIRE(r <= 1.0);
    }
}

TEST_CASE("lipschitz constant") {
    CHECK(lipschitz_constant(PricingCurve::power_law(0.0), 0.7, 1.0) == 0.0);
    // phi''' = -6/u^4 dominates for k = 1 on [0.7, 1]
    CHECK(lipschitz_constant(PricingCurve::power_law(1.0), 0.7, 1.0) == doctest::Approx(6.0 / std::pow(0.7, 4)).epsilon(1e-3));
}

TEST_CASE("mu bound check") {
    std::vector<SegmentPoint> seg;
    Rng rng(67);
    double u = 0.9;
    for (int t = 0; t < 50; ++t) {
        u = std::clamp(u + 0.02 * (rng.uniform() - 0.5), 0.7, 1.0);
        seg.push_back({u, 0.0, compute_borrow_rate({0.02, 0.2, 1.0 - u, 0.05}), u, 1.0 - u, 1.0});
    }
    const auto flat = mu_bound_check(seg, 0.0, 0.5);
    CHECK(flat.holds);
    CHECK(flat.steps == 49);
    CHECK(flat.worst_margin >= 0.0);
    CHECK_THROWS_AS(mu_bound_check(seg, 4.0, 0.5), ParameterError);
    CHECK_THROWS_AS(mu_bound_check(seg, lipschitz_constant(PricingCurve::power_law(1.0), 0.7, 1.0), 0.5), ParameterError);
}

TEST_CASE("mu bound on random k=1 segments") {
    const auto curve = PricingCurve::power_law(1.0);
    const double L = lipschitz_constant(curve, 0.7, 1.0);
    const double sigma2 = 0.05;
    REQUIRE(L < 2.0 / sigma2);
    Rng rng(68);
    // the Taylor remainder bound has to satisfy sigma^2 < eps / L
    const double eps = 1.000001 * L * sigma2;
    int violations = 0, strict_violations = 0;
    double worst = 1e300;
    for (int s = 0; s < 100; ++s) {
        std::vector<SegmentPoint> seg;
        double u = 0.7 + 0.3 * rng.uniform();
        double prev = u;
        for (int t = 0; t < 40; ++t) {
            prev = u;
            u = std::clamp(u + 0.02 * (rng.uniform() - 0.5), 0.7, 1.0);
            // second-order expected derivative return
            const double mu_d = (core::eval_mother(curve, u) + 0.5 * sigma2 * core::mother_second_derivative(curve, u)) /
                                    core::eval_mother(curve, prev) - 1.0;
            seg.push_back({u, mu_d, compute_borrow_rate({0.02, 0.2, 1.0 - u, 0.05}), u, 1.0 - u, 1.0});
        }
        const auto r = mu_bound_check(seg, L, sigma2, eps);
        violations += !r.holds;
        const auto strict = mu_bound_check(seg, L, sigma2, 0.0);
        strict_violations += !strict.holds;
        worst = std::min(worst, strict.worst_margin);
    }
    MESSAGE("mu bound: " << violations << " of 100 segments violated; with eps = 0: " << strict_violations
                         << ", worst margin " << worst);
    CHECK(violations == 0);
}

TEST_CASE("inverse norm numeric is a true induced norm") {
    Rng rng(69);
    for (int t = 0; t < 200; ++t) {
        double D;
        do {
            D = 4.0 * rng.uniform();
        } while (std::abs(D - 1.0) < 0.05);
        Eigen::Matrix2d s;
        s << 1.0, D, D, D * D;
        const Eigen::MatrixXd inv = bordered_matrix(s, 1.0).inverse();
        double by_hand = 0.0;
        for (int j = 0; j < 3; ++j) by_hand = std::max(by_hand, inv.col(j).cwiseAbs().sum());
        REQUIRE(inverse_norm_numeric(D, 1.0) == doctest::Approx(by_hand));
    }
}

}
