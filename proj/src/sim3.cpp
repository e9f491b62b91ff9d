#include "stakesim/sim3.hpp"

#include <algorithm>
#include <cmath>

#include "stakesim/errors.hpp"
#include "stakesim/markowitz.hpp"
#include "stakesim/urn.hpp"

namespace stakesim::sim3 {

using portfolio::ChainRule;

void Sim3Config::validate() const {
    base.validate();
    cir.validate();
    if (components != 2 && components != 3) throw ParameterError("components must be 2 or 3");
    if (!(lending_base_rate >= 0.0) || !(lending_slope >= 0.0) || !(lending_demand >= 0.0))
        throw ParameterError("lending parameters must be non-negative");
    if (!(lambda_risk_dof >= 0.0)) throw ParameterError("risk aversion degrees of freedom must be >= 0");
}

Sim3State initialize(const Sim3Config& config, Rng& rng) {
    Sim3State s;
    s.core = sim2::initialize(config.base, rng);
    const std::size_t n = config.base.n;
    const double dof = config.lambda_risk_dof > 0.0 ? config.lambda_risk_dof : static_cast<double>(n);
    s.lambda_risk.resize(n);
    // a zero draw would make the problem unbounded
    for (double& l : s.lambda_risk) l = std::max(rng.chi_squared(dof), 1e-12);
    s.var_lend.assign(n, config.cir.v0);
    s.var_scale.assign(n, config.cir.v0);
    s.mu_prev.assign(n, 0.0);
    s.epoch_loans.assign(n, 0.0);
    s.epoch_end_price.assign(n, 1.0);
    s.weights.assign(n, {0.0, 0.0, 0.0});
    s.solved.assign(n, 0);
    return s;
}

double wealth(const Sim3State& s, std::size_t i) {
    const auto& st = s.core.stake;
    return st.stakes[i] + st.lent[i] + st.loans[i];
}

AgentModel get_returns_and_covariance(const Sim3State& s, const Sim3Config& config, std::size_t i) {
    const auto& st = s.core.stake;
    const auto& curve = config.base.curve;
    const double total = st.total_stake();

    double r_s = 0.0, delta = 0.0;
    if (total > 0.0 && st.stakes[i] / total > 0.0) {
        r_s = st.stakes[i] / total;
        switch (config.chain_rule) {
            case ChainRule::Pseudocode: delta = portfolio::duration(curve, r_s); break;
            // a loan taken now is issued at argument 1
            case ChainRule::Normalized: delta = portfolio::duration(curve, 1.0); break;
            case ChainRule::Affine:
                delta = portfolio::duration(curve, 1.0, 1.0 / (1.0 - s.core.params.collateral[i]));
                break;
        }
    }

    double mu_d = 0.0;
    if (s.epoch_loans[i] > 0.0) {
        if (config.chain_rule == ChainRule::Pseudocode) {
            if (s.mu_prev[i] > 0.0 && r_s > 0.0)
                mu_d = core::eval_mother(curve, r_s) / core::eval_mother(curve, s.mu_prev[i]) - 1.0;
        } else {
            mu_d = s.epoch_end_price[i] - 1.0;
        }
    }

    const bool lending = config.components == 3;
    AgentModel m;
    m.duration = delta;
    m.mu.resize(lending ? 3 : 2);
    m.mu(0) = r_s;
    m.mu(1) = mu_d;
    if (lending) m.mu(2) = s.gamma;
    m.sigma = Eigen::MatrixXd::Zero(m.mu.size(), m.mu.size());
    m.sigma(0, 0) = 1.0;
    m.sigma(0, 1) = m.sigma(1, 0) = delta;
    m.sigma(1, 1) = delta * delta;
    if (lending) m.sigma(2, 2) = s.var_lend[i];
    m.sigma *= s.var_scale[i];
    return m;
}

void update_markowitz(Sim3State& s, const Sim3Config& config) {
    const auto& st = s.core.stake;
    // all models are read from the same pre-update state
    std::vector<AgentModel> models(st.size());
    for (std::size_t i = 0; i < st.size(); ++i)
        if (!s.core.defaulted[i] && st.stakes[i] > 0.0) models[i] = get_returns_and_covariance(s, config, i);

    portfolio::MarkowitzOptions opts;
    opts.long_only = config.long_only;
    for (std::size_t i = 0; i < st.size(); ++i) {
        s.solved[i] = 0;
        if (s.core.defaulted[i] || !(st.stakes[i] > 0.0)) {
            s.weights[i] = {0.0, 0.0, 0.0};
            continue;
        }
        s.mu_prev[i] = models[i].mu(0);
        try {
            const auto r = portfolio::solve_markowitz(models[i].mu, models[i].sigma, s.lambda_risk[i], opts);
            s.weights[i] = {r.w(0), r.w(1), r.w.size() > 2 ? r.w(2) : 0.0};
            s.solved[i] = 1;
        } catch (const std::exception&) {
            ++s.counters.solver_skipped;
        }
    }
}

void rebalance(Sim3State& s) {
    auto& st = s.core.stake;
    for (std::size_t i = 0; i < st.size(); ++i) {
        if (!s.solved[i]) continue;
        double& stake = st.stakes[i];
        double& lent = st.lent[i];
        const double omega = stake + lent;
        const double ws = omega * s.weights[i][0];
        const double wd = omega * s.weights[i][1];
        const double wl = omega * s.weights[i][2];

        if (ws + wd > stake) {
            double d = ws + wd - stake;
            if (d > lent) {
                d = lent;
                ++s.counters.lend_clipped;
            }
            lent -= d;
            stake += d;
        }
        // new derivative issuance
        if (ws < stake && wd < stake && wd > 0.0) {
            st.loans[i] = wd;
            stake -= wd;
        }
        if (wl > lent) {
            double d = wl - lent;
            if (d > stake) {
                d = stake;
                ++s.counters.stake_clipped;
            }
            lent += d;
            stake -= d;
        }
    }
}

namespace {

void close_epoch(Sim3State& s, const Sim3Config& config) {
    auto& st = s.core.stake;
    for (std::size_t i = 0; i < st.size(); ++i) {
        s.epoch_loans[i] = st.loans[i];
        s.epoch_end_price[i] = 1.0;
        if (st.loans[i] > 0.0 && s.core.snapshot[i] > 0.0) {
            const core::ValidatorPricing vp(s.core.params.collateral[i], s.core.snapshot[i], st.loans[i]);
            s.epoch_end_price[i] = core::validator_price(vp, config.base.curve, st.stakes[i]);
        }
        // surviving loans are repaid in full
        st.stakes[i] += st.loans[i];
        st.loans[i] = 0.0;
    }
}

void clear_defaults(Sim3State& s, const std::vector<double>& prices, double phi_max) {
    auto& st = s.core.stake;
    for (std::size_t i = 0; i < st.size(); ++i) {
        if (!(prices[i] > phi_max)) continue;
        st.burned += st.stakes[i] + st.loans[i];
        st.stakes[i] = 0.0;
        st.loans[i] = 0.0;
        s.core.params.borrow[i] = 0.0;
        s.core.defaulted[i] = 1;
    }
}

void check_supply(const core::StakeState& st) {
    st.check_invariants();
    if (st.circulating() + st.burned > st.max_supply * (1.0 + 1e-9))
        throw NumericError("held supply including loans exceeds maximum supply");
}

}  // namespace

harness::MetricPoint sample_metrics(const Sim3State& s, const Sim3Config& config, std::uint64_t h) {
    harness::MetricPoint m = sim2::sample_metrics(s.core, h);
    const auto& st = s.core.stake;
    if (config.supply_includes_lent && st.max_supply > 0.0)
        m.supply_ratio = (st.total_stake() + st.total_lent()) / st.max_supply;
    std::array<double, 3> mean{0.0, 0.0, 0.0};
    std::size_t count = 0;
    for (std::size_t i = 0; i < st.size(); ++i) {
        if (!s.solved[i]) continue;
        for (int j = 0; j < 3; ++j) mean[j] += s.weights[i][j];
        ++count;
    }
    if (count > 0)
        for (double& x : mean) x /= static_cast<double>(count);
    m.weights = mean;
    return m;
}

harness::TrajectoryRecord run_trajectory3(const Sim3Config& config, std::uint64_t stream_seed) {
    config.validate();
    const auto& base = config.base;
    Rng rng(stream_seed);
    Sim3State s = initialize(config, rng);
    auto& st = s.core.stake;
    harness::TrajectoryRecord record;
    record.reserve(base.h_max / base.eta + 1);
    record.push_back(sample_metrics(s, config, 0));

    for (std::uint64_t h = 0; h < base.h_max; ++h) {
        if (h % base.eta == 0) {
            portfolio::LendingMarket market{config.lending_base_rate, config.lending_slope, st.total_lent(),
                                            config.lending_demand * st.max_supply};
            s.gamma = portfolio::compute_borrow_rate(market);
            // a position that crossed the line on the last block defaults before repayment
            clear_defaults(s, sim2::mark_loans(s.core, base.curve), base.phi_max);
            close_epoch(s, config);
            for (std::size_t i = 0; i < st.size(); ++i) {
                s.var_lend[i] = portfolio::cir_step(config.cir, s.var_lend[i], rng);
                s.var_scale[i] = portfolio::cir_step(config.cir, s.var_scale[i], rng);
            }
            update_markowitz(s, config);
            rebalance(s);
            s.core.snapshot = st.stakes;
        }
        clear_defaults(s, sim2::mark_loans(s.core, base.curve), base.phi_max);
        const double reward = std::exp(base.monetary.log_block_reward(h) - st.unit_log);
        sim2::update_stake_distribution(s.core, base.iota, reward, rng);
        st.height = h + 1;

        const double f = st.rescale();
        if (f != 1.0) {
            for (double& x : s.core.snapshot) x /= f;
            for (double& x : s.epoch_loans) x /= f;
        }
        if ((h + 1) % base.eta == 0) {
            check_supply(st);
            record.push_back(sample_metrics(s, config, h + 1));
        }
    }
    return record;
}

}  // namespace stakesim::sim3
