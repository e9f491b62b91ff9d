#include "stakesim/markowitz.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "stakesim/errors.hpp"

namespace stakesim::portfolio {

namespace {

double condition_number(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

// Ruiz equilibration: rows and columns scaled symmetrically until every
// row's largest entry is close to 1. Durations in the thousands otherwise
// leave the bordered system numerically singular.
Eigen::VectorXd equilibrate(const Eigen::MatrixXd& a) {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(a.rows());
    for (int it = 0; it < 20; ++it) {
        const Eigen::MatrixXd scaled = d.asDiagonal() * a * d.asDiagonal();
        const Eigen::VectorXd row = scaled.cwiseAbs().rowwise().maxCoeff();
        if (((row.array() - 1.0).abs() < 1e-3).all()) break;
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (row(i) > 0.0) d(i) /= std::sqrt(row(i));
    }
    return d;
}

struct Scaled {
    Eigen::MatrixXd a;
    Eigen::VectorXd d;
};

Scaled scaled_system(const Eigen::MatrixXd& sigma, double lambda_risk) {
    Scaled s;
    const Eigen::MatrixXd a = bordered_matrix(sigma, lambda_risk);
    s.d = equilibrate(a);
    s.a = s.d.asDiagonal() * a * s.d.asDiagonal();
    return s;
}

MarkowitzResult solve_equality(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double lambda_risk,
                               double cond_limit) {
    const Eigen::Index n = mu.size();
    Eigen::VectorXd rhs(n + 1);
    rhs << mu, 1.0;

    MarkowitzResult r;
    Scaled sys = scaled_system(sigma, lambda_risk);
    r.condition = condition_number(sys.a);
    if (!(r.condition <= cond_limit)) {
        const double trace = sigma.trace();
        const double eps = trace > 0.0 ? 1e-8 * trace / static_cast<double>(n) : 1e-8;
        Eigen::MatrixXd ridged = sigma;
        ridged.diagonal().array() += eps;
        sys = scaled_system(ridged, lambda_risk);
        r.condition = condition_number(sys.a);
        r.regularized = true;
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.a);
    const Eigen::VectorXd b = sys.d.asDiagonal() * rhs;
    Eigen::VectorXd z = lu.solve(b);
    // refinement keeps the budget row exact on ridged, badly conditioned systems
    for (int it = 0; it < 3; ++it) z += lu.solve(b - sys.a * z);
    const Eigen::VectorXd x = sys.d.asDiagonal() * z;
    if (!x.allFinite()) throw NumericError("bordered Markowitz system has no finite solution");
    r.w = x.head(n);
    r.multiplier = x(n);
    return r;
}

double utility(const Eigen::VectorXd& w, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double lambda_risk) {
    return w.dot(mu) - 0.5 * lambda_risk * w.dot(sigma * w);
}

}  // namespace

Eigen::MatrixXd bordered_matrix(const Eigen::MatrixXd& sigma, double lambda_risk) {
    const Eigen::Index n = sigma.rows();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
    a.topLeftCorner(n, n) = lambda_risk * sigma;
    a.block(0, n, n, 1).setOnes();
    a.block(n, 0, 1, n).setOnes();
    return a;
}

MarkowitzResult solve_markowitz(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double lambda_risk,
                                const MarkowitzOptions& options) {
    const Eigen::Index n = mu.size();
    if (n < 2 || n > 3) throw ParameterError("Markowitz solver supports 2 or 3 assets");
    if (sigma.rows() != n || sigma.cols() != n) throw ParameterError("covariance shape does not match mean vector");
    if (!(lambda_risk > 0.0) || !std::isfinite(lambda_risk)) throw ParameterError("risk aversion must be positive");
    if (!mu.allFinite() || !sigma.allFinite()) throw ParameterError("non-finite Markowitz inputs");

    const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
    const double trace = sym.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(trace, 0.0) - 1e-300)
        throw ParameterError("covariance matrix is not positive semidefinite");

    MarkowitzResult best = solve_equality(mu, sym, lambda_risk, options.cond_limit);
    if (!options.long_only || (best.w.array() >= 0.0).all()) return best;

    // Enumerate supports; the optimum over the simplex is the stationary point
    // of its own face, so the feasible face solution with the best utility wins.
    double best_u = -std::numeric_limits<double>::infinity();
    MarkowitzResult chosen;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        const auto k = static_cast<Eigen::Index>(idx.size());
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        MarkowitzResult sub;
        if (k == 1) {
            w(idx[0]) = 1.0;
            sub.multiplier = mu(idx[0]) - lambda_risk * sym(idx[0], idx[0]);
        } else {
            Eigen::VectorXd m(k);
            Eigen::MatrixXd s(k, k);
            for (Eigen::Index a = 0; a < k; ++a) {
                m(a) = mu(idx[a]);
                for (Eigen::Index b = 0; b < k; ++b) s(a, b) = sym(idx[a], idx[b]);
            }
            sub = solve_equality(m, s, lambda_risk, options.cond_limit);
            if ((sub.w.array() < 0.0).any()) continue;
            for (Eigen::Index a = 0; a < k; ++a) w(idx[a]) = sub.w(a);
        }
        const double u = utility(w, mu, sym, lambda_risk);
        if (u > best_u) {
            best_u = u;
            chosen = sub;
            chosen.w = w;
        }
    }
    return chosen;
}

}  // namespace stakesim::portfolio
