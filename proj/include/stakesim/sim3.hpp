#pragma once

// Three-asset agent model: every epoch each agent re-solves a mean-variance
// problem over (stake, derivative, lending) and moves balances to match,
// then blocks run exactly as in the two-asset model.

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "stakesim/metrics.hpp"
#include "stakesim/portfolio.hpp"
#include "stakesim/sim2.hpp"

namespace stakesim::sim3 {

struct Sim3Config {
    sim2::Sim2Config base;
    portfolio::CIRParams cir{0.5, 0.1, 1.0, 0.5};
    double lending_base_rate = 0.02;
    double lending_slope = 0.2;
    /// Exogenous borrow demand on the lending pool, as a fraction of max supply.
    double lending_demand = 0.05;
    /// Degrees of freedom of the chi-squared risk aversion; 0 means n.
    double lambda_risk_dof = 0.0;
    portfolio::ChainRule chain_rule = portfolio::ChainRule::Pseudocode;
    int components = 3;  ///< 2 drops the lending asset
    bool supply_includes_lent = false;
    bool long_only = false;

    void validate() const;
};

struct RebalanceCounters {
    std::uint64_t lend_clipped = 0;   ///< stake top-up limited by the lent balance
    std::uint64_t stake_clipped = 0;  ///< lend top-up limited by the staked balance
    std::uint64_t solver_skipped = 0;
};

struct Sim3State {
    sim2::Sim2State core;
    std::vector<double> lambda_risk;
    std::vector<double> var_lend;   ///< per-agent CIR lending variance
    std::vector<double> var_scale;  ///< per-agent CIR covariance scale
    std::vector<double> mu_prev;    ///< last epoch's staking return per agent
    std::vector<double> epoch_loans;       ///< loans outstanding when the last epoch closed
    std::vector<double> epoch_end_price;   ///< their derivative price at that point
    std::vector<std::array<double, 3>> weights;
    std::vector<char> solved;
    double gamma = 0.0;
    RebalanceCounters counters;
};

struct AgentModel {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    double duration = 0.0;
};

Sim3State initialize(const Sim3Config& config, Rng& rng);

/// Mean vector (stake share, derivative price return, lending rate) and the
/// scaled covariance [[1, d, 0], [d, d^2, 0], [0, 0, v_l]] for one agent.
/// Advances nothing; the CIR states are read from `s`.
AgentModel get_returns_and_covariance(const Sim3State& s, const Sim3Config& config, std::size_t agent);

/// Solves every live agent's problem; failures keep the previous weights.
void update_markowitz(Sim3State& s, const Sim3Config& config);

/// Moves balances toward the target weights using the three transfer rules.
void rebalance(Sim3State& s);

/// Wealth of an agent: stake + lent + outstanding loan.
double wealth(const Sim3State& s, std::size_t agent);

harness::MetricPoint sample_metrics(const Sim3State& s, const Sim3Config& config, std::uint64_t h);

harness::TrajectoryRecord run_trajectory3(const Sim3Config& config, std::uint64_t stream_seed);

}  // namespace stakesim::sim3
