#pragma once

// Slashing-driven Polya urn: the per-block event space, the measure-valued
// replacement rows, and the closed-form survival/terminal-stake laws used as
// oracles for the Monte Carlo models.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "stakesim/pricing.hpp"
#include "stakesim/random.hpp"
#include "stakesim/state.hpp"

namespace stakesim::urn {

struct SlashParams {
    std::vector<double> p;  ///< per-validator slash probability
    double iota = 0.05;     ///< fraction of stake burned per slash

    void validate() const;
};

enum class EventOutcome {
    RewardedNotSlashed,     // E1
    NotRewardedNotSlashed,  // E2
    SlashedNoDefault,       // E3
    SlashedDefaulted,       // E4
};

struct ReplacementDraw {
    std::size_t validator = 0;
    double delta = 0.0;
    EventOutcome outcome = EventOutcome::NotRewardedNotSlashed;
};

/// (Pr[E1], Pr[E2], Pr[E3], Pr[E4]) for validator i. `loan` is the open loan
/// of that validator, if any; the default indicator fires when the post-slash
/// stake falls below c * stake_at_issue.
std::array<double, 4> event_probabilities(const core::StakeState& state, const SlashParams& params,
                                          const std::optional<core::ValidatorPricing>& loan, std::size_t i);

/// Samples one row of the random replacement matrix for validator i.
ReplacementDraw draw_replacement(const core::StakeState& state, const SlashParams& params,
                                 const std::optional<core::ValidatorPricing>& loan, std::size_t i,
                                 double reward, Rng& rng);

/// pi(h) = pi(h-1) + R_row. Negative deltas are burned; positive deltas are
/// newly minted and raise max_supply.
core::StakeState apply_replacement(core::StakeState state, const ReplacementDraw& draw);

enum class SlashMode {
    SelectedOnly,  ///< only the block producer can be slashed
    Independent,   ///< every validator draws its own slash each block
};

struct StepResult {
    std::optional<std::size_t> winner;
    bool rewarded = false;
    std::size_t slashed = 0;
    bool extinct = false;
};

/// One block of the urn. In Independent mode every validator j is slashed with
/// probability p_j (losing iota * stake), and the stake-weighted winner is paid
/// `reward` only if it was not slashed. An unpaid reward is minted and burned
/// so stakes + lent + burned keeps matching max_supply.
StepResult urn_step(core::StakeState& state, const SlashParams& params, double reward, SlashMode mode,
                    Rng& rng, std::span<const std::optional<core::ValidatorPricing>> loans = {});

/// Probability that a validator is eventually ruined: p / (1 - p), capped at 1.
double ruin_probability(double p);

/// Gamma-branch mean (1 - p) / (1 - 2p) of the terminal law.
double terminal_beta(double p);

struct RuinEstimate {
    std::uint64_t ruined = 0;
    std::uint64_t trials = 0;
    double frequency() const { return trials ? static_cast<double>(ruined) / static_cast<double>(trials) : 0.0; }
};

/// Monte Carlo ruin frequency on the embedded birth-death chain of a single
/// validator: each selection either adds one reward unit (prob 1 - p) or
/// removes one unit (prob p). A trajectory stops at ruin or when it reaches
/// `escape_level` units; pass 0 to pick a level whose residual ruin mass is
/// below 1e-7.
RuinEstimate simulate_ruin(double p, std::uint64_t trials, std::uint64_t seed, std::uint64_t escape_level = 0);

enum class GrowthExponent {
    Martingale,  ///< alpha = R (1 - p) - iota p
    MainText,    ///< alpha = R - (1 + iota) p
};

double growth_exponent(double p, double reward, double iota, GrowthExponent mode);

/// Draws X ~ (1 - gamma) Exp(mean beta) + gamma delta_0. Requires p < 1/2.
double sample_terminal_factor(Rng& rng, double p);
/// exp(alpha h) X.
double sample_terminal_stake(Rng& rng, double p, double reward, double iota, std::uint64_t h,
                             GrowthExponent mode = GrowthExponent::Martingale);

/// Exact moments of the terminal mixture law.
double terminal_mean(double p);
double terminal_second_moment(double p);

/// beta (1 + (1 - gamma)^2).
double dispersion_aleph(double p, double gamma, double beta);
double dispersion_aleph(double p);

struct RecurrenceSetup {
    core::PricingCurve curve;
    std::vector<double> stakes;
    SlashParams slash;
    /// Collateral factor of validator 0's loan, taken at height 0. No loan
    /// means the price stays pinned at 1.
    std::optional<double> collateral;
    double reward = 1.0;
    std::uint64_t horizon = 10000;
    double epsilon = 0.1;
    double fixed_point = 1.0;
    std::uint64_t seed = 0;
    SlashMode mode = SlashMode::SelectedOnly;
};

/// Counts blocks at which validator 0's derivative price lies within epsilon
/// of the fixed point (exact hits when epsilon is 0). Exploratory only.
std::uint64_t recurrence_experiment(const RecurrenceSetup& setup);

/// Replacement matrix of the two-validator selfish-mining urn: R * [[2, -1], [0, 1]].
std::array<std::array<double, 2>, 2> selfish_mining_matrix(double reward);

}  // namespace stakesim::urn
