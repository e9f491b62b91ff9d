#include "stakesim/sim2.hpp"

#include <algorithm>
#include <cmath>

#include "stakesim/errors.hpp"
#include "stakesim/urn.hpp"

namespace stakesim::sim2 {

void Sim2Config::validate() const {
    if (n < 2) throw ParameterError("need at least two validators");
    if (eta < 1) throw ParameterError("epoch length must be >= 1");
    if (h_max < eta) throw ParameterError("h_max must be at least one epoch");
    for (double l : {lambda_stake, lambda_collateral, lambda_borrow, lambda_slash})
        if (!(l > 0.0) || !std::isfinite(l)) throw ParameterError("distribution parameters must be positive");
    if (!(iota > 0.0 && iota < 1.0)) throw ParameterError("iota must lie in (0, 1)");
    if (!(phi_max > 1.0)) throw ParameterError("phi_max must exceed 1");
    if (sample_stride < 1) throw ParameterError("sample stride must be >= 1");
    if (trajectories < 1) throw ParameterError("need at least one trajectory");
}

std::size_t Sim2State::defaulted_count() const {
    return static_cast<std::size_t>(std::count(defaulted.begin(), defaulted.end(), 1));
}

Sim2State initialize(const Sim2Config& config, Rng& rng) {
    const std::size_t n = config.n;
    std::vector<double> stakes(n);
    for (double& x : stakes) x = std::ceil(rng.exponential(config.lambda_stake));
    Sim2State s;
    s.stake = core::StakeState::with_stakes(std::move(stakes));
    s.params.collateral.resize(n);
    s.params.borrow.resize(n);
    s.params.slash.resize(n);
    for (double& c : s.params.collateral) c = rng.beta_a1(config.lambda_collateral);
    for (double& b : s.params.borrow) b = rng.beta_a1(config.lambda_borrow);
    for (double& p : s.params.slash) p = rng.beta_a1(config.lambda_slash);
    s.snapshot = s.stake.stakes;
    s.defaulted.assign(n, 0);
    return s;
}

double borrow_amount(double ell, double collateral, double stake, double xi) {
    if (!(stake > 0.0)) return 0.0;
    return std::max(0.0, (collateral - ell / stake) * xi * stake);
}

void update_borrowers(Sim2State& s, Rng& rng) {
    auto& st = s.stake;
    for (std::size_t i = 0; i < st.size(); ++i) {
        // both draws are always taken so the stream layout is state independent
        const bool borrows = rng.bernoulli(s.params.borrow[i]);
        const double xi = rng.uniform();
        if (s.defaulted[i] || !borrows) continue;
        const double limit = s.params.collateral[i] * st.stakes[i];
        if (!(st.loans[i] < limit)) continue;
        st.loans[i] = std::min(limit, st.loans[i] + borrow_amount(st.loans[i], s.params.collateral[i], st.stakes[i], xi));
    }
}

std::vector<double> mark_loans(const Sim2State& s, const core::PricingCurve& curve) {
    const auto& st = s.stake;
    std::vector<double> prices(st.size(), 1.0);
    for (std::size_t i = 0; i < st.size(); ++i) {
        if (!(st.loans[i] > 0.0) || !(s.snapshot[i] > 0.0)) continue;
        const core::ValidatorPricing vp(s.params.collateral[i], s.snapshot[i], st.loans[i]);
        prices[i] = core::validator_price(vp, curve, st.stakes[i]);
    }
    return prices;
}

std::size_t clear_defaulted_loans(Sim2State& s, const std::vector<double>& prices, double phi_max) {
    auto& st = s.stake;
    std::size_t fresh = 0;
    for (std::size_t i = 0; i < st.size(); ++i) {
        if (!(prices[i] > phi_max)) continue;
        st.burned += st.stakes[i];
        st.stakes[i] = 0.0;
        st.loans[i] = 0.0;
        s.params.borrow[i] = 0.0;
        if (!s.defaulted[i]) ++fresh;
        s.defaulted[i] = 1;
    }
    return fresh;
}

void update_stake_distribution(Sim2State& s, double iota, double reward, Rng& rng) {
    const urn::SlashParams params{s.params.slash, iota};
    const auto step = urn::urn_step(s.stake, params, reward, urn::SlashMode::Independent, rng);
    if (step.extinct) s.extinct = true;
}

harness::MetricPoint sample_metrics(const Sim2State& s, std::uint64_t h) {
    const auto& st = s.stake;
    harness::MetricPoint m;
    m.h = h;
    m.gini = harness::gini(st.stakes);
    m.norm_ratio = harness::norm_ratio(st.stakes);
    m.supply_ratio = st.max_supply > 0.0 ? st.total_stake() / st.max_supply : 0.0;
    m.frac_defaulted = static_cast<double>(s.defaulted_count()) / static_cast<double>(st.size());
    m.alive = static_cast<std::size_t>(std::count_if(st.stakes.begin(), st.stakes.end(), [](double x) { return x > 0.0; }));
    return m;
}

harness::TrajectoryRecord run_trajectory2(const Sim2Config& config, std::uint64_t stream_seed) {
    config.validate();
    Rng rng(stream_seed);
    Sim2State s = initialize(config, rng);
    harness::TrajectoryRecord record;
    record.reserve(config.h_max / config.sample_stride + 1);
    record.push_back(sample_metrics(s, 0));

    for (std::uint64_t h = 0; h < config.h_max; ++h) {
        auto& st = s.stake;
        if (h % config.eta == 0) {
            // loans that survived the epoch are repaid in full
            std::fill(st.loans.begin(), st.loans.end(), 0.0);
            update_borrowers(s, rng);
            s.snapshot = st.stakes;
        }
        clear_defaulted_loans(s, mark_loans(s, config.curve), config.phi_max);
        const double reward = std::exp(config.monetary.log_block_reward(h) - st.unit_log);
        update_stake_distribution(s, config.iota, reward, rng);
        st.height = h + 1;

        const double f = st.rescale();
        if (f != 1.0) {
            for (double& x : s.snapshot) x /= f;
        }
        if ((h + 1) % config.sample_stride == 0) {
            st.check_invariants();
            record.push_back(sample_metrics(s, h + 1));
        }
    }
    return record;
}

}  // namespace stakesim::sim2
