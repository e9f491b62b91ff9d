#include "stakesim/urn.hpp"

#include <cmath>
#include <string>

#include "stakesim/errors.hpp"

namespace stakesim::urn {

using core::StakeState;
using core::ValidatorPricing;

void SlashParams::validate() const {
    for (std::size_t i = 0; i < p.size(); ++i)
        if (!(p[i] >= 0.0 && p[i] <= 1.0))
            throw ParameterError("slash probability p[" + std::to_string(i) + "] outside [0, 1]");
    if (!(iota > 0.0 && iota < 1.0)) throw ParameterError("slash fraction iota must lie in (0, 1)");
}

namespace {

bool defaults_after_slash(const std::optional<ValidatorPricing>& loan, double stake, double iota) {
    if (!loan || !(loan->debt() > 0.0)) return false;
    return (1.0 - iota) * stake < loan->collateral() * loan->stake_at_issue();
}

const std::optional<ValidatorPricing>& loan_at(std::span<const std::optional<ValidatorPricing>> loans,
                                               std::size_t i) {
    static const std::optional<ValidatorPricing> none;
    return i < loans.size() ? loans[i] : none;
}

}  // namespace

std::array<double, 4> event_probabilities(const StakeState& state, const SlashParams& params,
                                          const std::optional<ValidatorPricing>& loan, std::size_t i) {
    const double total = state.total_stake();
    if (!(total > 0.0)) throw ParameterError("event probabilities need a positive total stake");
    if (i >= state.size() || i >= params.p.size()) throw ParameterError("validator index out of range");
    const double share = state.stakes[i] / total;
    const double p = params.p[i];
    const double defaulted = defaults_after_slash(loan, state.stakes[i], params.iota) ? 1.0 : 0.0;
    return {(1.0 - p) * share, (1.0 - p) * (1.0 - share), p * (1.0 - defaulted), p * defaulted};
}

ReplacementDraw draw_replacement(const StakeState& state, const SlashParams& params,
                                 const std::optional<ValidatorPricing>& loan, std::size_t i, double reward,
                                 Rng& rng) {
    const auto probs = event_probabilities(state, params, loan, i);
    double u = rng.uniform();
    std::size_t k = 0;
    while (k < 3 && u >= probs[k]) {
        u -= probs[k];
        ++k;
    }
    const double stake = state.stakes[i];
    switch (k) {
        case 0: return {i, reward, EventOutcome::RewardedNotSlashed};
        case 1: return {i, 0.0, EventOutcome::NotRewardedNotSlashed};
        case 2: return {i, -params.iota * stake, EventOutcome::SlashedNoDefault};
        default: return {i, -stake, EventOutcome::SlashedDefaulted};
    }
}

StakeState apply_replacement(StakeState state, const ReplacementDraw& draw) {
    if (draw.validator >= state.size()) throw ParameterError("replacement row index out of range");
    double& stake = state.stakes[draw.validator];
    if (draw.outcome == EventOutcome::SlashedDefaulted) {
        state.burned += stake;
        stake = 0.0;
        return state;
    }
    const double next = stake + draw.delta;
    if (next < 0.0) throw std::logic_error("replacement would make a stake negative");
    stake = next;
    if (draw.delta < 0.0) state.burned -= draw.delta;
    if (draw.delta > 0.0) state.max_supply += draw.delta;
    return state;
}

StepResult urn_step(StakeState& state, const SlashParams& params, double reward, SlashMode mode, Rng& rng,
                    std::span<const std::optional<ValidatorPricing>> loans) {
    const std::size_t n = state.size();
    StepResult result;
    state.max_supply += reward;

    auto slash = [&](std::size_t j) {
        double& stake = state.stakes[j];
        if (defaults_after_slash(loan_at(loans, j), stake, params.iota)) {
            state.burned += stake;
            stake = 0.0;
        } else {
            const double loss = params.iota * stake;
            stake -= loss;
            state.burned += loss;
        }
        ++result.slashed;
    };

    if (mode == SlashMode::Independent) {
        thread_local std::vector<char> slashed;
        slashed.assign(n, 0);
        for (std::size_t j = 0; j < n; ++j) slashed[j] = rng.bernoulli(params.p[j]) ? 1 : 0;
        const double total = state.total_stake();
        if (!(total > 0.0)) {
            state.burned += reward;
            result.extinct = true;
            return result;
        }
        const std::size_t w = rng.categorical(state.stakes, total);
        result.winner = w;
        if (!slashed[w]) {
            state.stakes[w] += reward;
            result.rewarded = true;
        } else {
            state.burned += reward;
        }
        for (std::size_t j = 0; j < n; ++j)
            if (slashed[j]) slash(j);
        return result;
    }

    const double total = state.total_stake();
    if (!(total > 0.0)) {
        state.burned += reward;
        result.extinct = true;
        return result;
    }
    const std::size_t w = rng.categorical(state.stakes, total);
    result.winner = w;
    if (rng.bernoulli(params.p[w])) {
        state.burned += reward;
        slash(w);
    } else {
        state.stakes[w] += reward;
        result.rewarded = true;
    }
    return result;
}

double ruin_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("slash probability must lie in [0, 1]");
    if (p >= 0.5) return 1.0;
    return p / (1.0 - p);
}

double terminal_beta(double p) {
    if (!(p >= 0.0 && p < 0.5)) throw ParameterError("terminal law requires 0 <= p < 1/2");
    return (1.0 - p) / (1.0 - 2.0 * p);
}

RuinEstimate simulate_ruin(double p, std::uint64_t trials, std::uint64_t seed, std::uint64_t escape_level) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("slash probability must lie in [0, 1]");
    if (escape_level == 0) {
        if (p == 0.0) {
            escape_level = 10;
        } else if (p < 0.5) {
            const double r = p / (1.0 - p);
            escape_level = std::max<std::uint64_t>(10, static_cast<std::uint64_t>(std::ceil(std::log(1e-7) / std::log(r))));
        } else {
            escape_level = 10000;
        }
    }
    RuinEstimate est;
    est.trials = trials;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng(hash64(seed, t));
        std::uint64_t units = 1;
        while (units > 0 && units < escape_level) {
            if (rng.bernoulli(p)) --units;
            else ++units;
        }
        if (units == 0) ++est.ruined;
    }
    return est;
}

double growth_exponent(double p, double reward, double iota, GrowthExponent mode) {
    if (mode == GrowthExponent::Martingale) return reward * (1.0 - p) - iota * p;
    return reward - (1.0 + iota) * p;
}

double sample_terminal_factor(Rng& rng, double p) {
    const double beta = terminal_beta(p);
    const double gamma = ruin_probability(p);
    if (rng.uniform() < gamma) return 0.0;
    return rng.exponential(1.0 / beta);
}

double sample_terminal_stake(Rng& rng, double p, double reward, double iota, std::uint64_t h, GrowthExponent mode) {
    const double x = sample_terminal_factor(rng, p);
    return std::exp(growth_exponent(p, reward, iota, mode) * static_cast<double>(h)) * x;
}

double terminal_mean(double p) { return (1.0 - ruin_probability(p)) * terminal_beta(p); }

double terminal_second_moment(double p) {
    const double beta = terminal_beta(p);
    return 2.0 * (1.0 - ruin_probability(p)) * beta * beta;
}

double dispersion_aleph(double /*p*/, double gamma, double beta) {
    const double survive = 1.0 - gamma;
    return beta * (1.0 + survive * survive);
}

double dispersion_aleph(double p) { return dispersion_aleph(p, ruin_probability(p), terminal_beta(p)); }

std::uint64_t recurrence_experiment(const RecurrenceSetup& setup) {
    if (setup.stakes.empty()) throw ParameterError("recurrence experiment needs at least one validator");
    setup.slash.validate();
    if (setup.slash.p.size() != setup.stakes.size()) throw ParameterError("slash vector size mismatch");
    if (!(setup.epsilon >= 0.0)) throw ParameterError("epsilon must be non-negative");

    StakeState state = StakeState::with_stakes(setup.stakes);
    std::vector<std::optional<ValidatorPricing>> loans(state.size());
    if (setup.collateral) loans[0] = ValidatorPricing(*setup.collateral, setup.stakes[0], *setup.collateral * setup.stakes[0]);

    Rng rng(hash64(setup.seed));
    std::uint64_t visits = 0;
    for (std::uint64_t h = 0; h < setup.horizon; ++h) {
        const auto step = urn_step(state, setup.slash, setup.reward, setup.mode, rng, loans);
        double price = 1.0;
        if (loans[0]) price = core::validator_price(*loans[0], setup.curve, state.stakes[0]);
        if (core::is_default(price)) break;
        const double d = std::abs(price - setup.fixed_point);
        if (d < setup.epsilon || d == 0.0) ++visits;
        if (step.extinct) break;
    }
    return visits;
}

std::array<std::array<double, 2>, 2> selfish_mining_matrix(double reward) {
    return {{{2.0 * reward, -reward}, {0.0, reward}}};
}

}  // namespace stakesim::urn
