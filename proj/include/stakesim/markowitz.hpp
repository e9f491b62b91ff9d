#pragma once

#include <Eigen/Dense>

namespace stakesim::portfolio {

struct MarkowitzOptions {
    bool long_only = false;    ///< restrict to w >= 0 by enumerating active sets
    double cond_limit = 1e12;  ///< above this the covariance gets a ridge
};

struct MarkowitzResult {
    Eigen::VectorXd w;
    double multiplier = 0.0;  ///< nu in lambda * Sigma * w + nu * 1 = mu
    bool regularized = false;
    double condition = 0.0;   ///< 2-norm condition number of the equilibrated bordered matrix
};

/// [lambda Sigma, 1; 1^T, 0].
Eigen::MatrixXd bordered_matrix(const Eigen::MatrixXd& sigma, double lambda_risk);

/// Maximizes w^T mu - lambda/2 w^T Sigma w subject to sum(w) = 1.
/// Throws ParameterError for a non-PSD Sigma or a bad dimension.
MarkowitzResult solve_markowitz(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double lambda_risk,
                                const MarkowitzOptions& options = {});

}  // namespace stakesim::portfolio
