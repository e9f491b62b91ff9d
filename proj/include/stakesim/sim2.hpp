#pragma once

// Two-component agent model: validators stake, borrow derivatives against
// their stake at epoch boundaries, get marked every block, and default when
// slashing pushes them through the collateral line.

#include <cstdint>
#include <vector>

#include "stakesim/metrics.hpp"
#include "stakesim/monetary.hpp"
#include "stakesim/pricing.hpp"
#include "stakesim/random.hpp"
#include "stakesim/state.hpp"

namespace stakesim::sim2 {

struct Sim2Config {
    std::size_t n = 100;
    std::uint64_t h_max = 20000;
    std::uint64_t eta = 10;  ///< epoch length in blocks
    double lambda_stake = 0.01;
    double lambda_collateral = 1.0;
    double lambda_borrow = 0.5;
    double lambda_slash = 0.5;
    double iota = 0.05;
    core::MonetaryPolicy monetary;
    core::PricingCurve curve = core::PricingCurve::power_law(1.0);
    double phi_max = 1e6;
    /// How phi_max bounds the aggregate price; the sims price validators individually.
    core::BoundMode bound_mode = core::BoundMode::Clamp;
    std::uint64_t seed = 0;
    std::uint64_t trajectories = 20;
    std::uint64_t sample_stride = 100;

    void validate() const;
};

/// Static per-validator draws.
struct ValidatorParams {
    std::vector<double> collateral;  ///< c_i ~ Beta(lambda_collateral, 1)
    std::vector<double> borrow;      ///< beta_i ~ Beta(lambda_borrow, 1)
    std::vector<double> slash;       ///< p_i ~ Beta(lambda_slash, 1)
};

struct Sim2State {
    core::StakeState stake;
    ValidatorParams params;
    std::vector<double> snapshot;  ///< stake at the last epoch boundary
    std::vector<char> defaulted;
    bool extinct = false;

    std::size_t defaulted_count() const;
};

/// Samples ceil(Exp) stakes and the validator parameters, in that order.
Sim2State initialize(const Sim2Config& config, Rng& rng);

/// Fraction xi of the remaining headroom (c - ell/stake) * stake.
double borrow_amount(double ell, double collateral, double stake, double xi);

/// Each live validator borrows with probability beta_i while below its
/// collateral limit.
void update_borrowers(Sim2State& s, Rng& rng);

/// Per-validator derivative price against the epoch snapshot; 1 without a loan.
std::vector<double> mark_loans(const Sim2State& s, const core::PricingCurve& curve);

/// Validators priced above phi_max lose their stake (burned), their loan, and
/// their borrow propensity for good. Returns the number of new defaults.
std::size_t clear_defaulted_loans(Sim2State& s, const std::vector<double>& prices, double phi_max);

/// One block of independent slashing plus the stake-weighted reward.
void update_stake_distribution(Sim2State& s, double iota, double reward, Rng& rng);

harness::MetricPoint sample_metrics(const Sim2State& s, std::uint64_t h);

/// Runs one trajectory on the given random stream.
harness::TrajectoryRecord run_trajectory2(const Sim2Config& config, std::uint64_t stream_seed);

}  // namespace stakesim::sim2
