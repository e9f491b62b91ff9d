#pragma once

#include <cstdint>
#include <vector>

namespace stakesim::core {

/// Token balances of all validators plus supply bookkeeping.
///
/// Monetary quantities are stored in a floating unit: the true amount is the
/// stored value times exp(unit_log). rescale() shifts the unit so inflationary
/// schedules never overflow; every ratio the simulations use is unaffected.
struct StakeState {
    std::vector<double> stakes;
    std::vector<double> loans;
    std::vector<double> lent;
    double max_supply = 0.0;
    double burned = 0.0;
    std::uint64_t height = 0;
    double unit_log = 0.0;

    static StakeState with_stakes(std::vector<double> stakes);

    std::size_t size() const { return stakes.size(); }
    double total_stake() const;
    double total_lent() const;
    double total_loans() const;
    /// Total currently held: stakes + lent + loans.
    double circulating() const;

    /// Throws NumericError when a balance is negative or the held supply
    /// exceeds max_supply beyond a relative 1e-9.
    void check_invariants() const;

    /// Divides every monetary quantity by max_supply once it exceeds
    /// threshold. Returns the divisor (1 when nothing changed) so callers can
    /// rescale balances they keep outside the state.
    double rescale(double threshold = 1e150);
};

}  // namespace stakesim::core
