#pragma once

#include <cstdint>

namespace stakesim::core {

/// Geometric block-reward schedule R_h = r0 * lambda^h.
/// lambda < 1 is deflationary, lambda == 1 constant, lambda > 1 inflationary.
class MonetaryPolicy {
public:
    MonetaryPolicy(double r0 = 1.0, double lambda = 1.0);

    double r0() const { return r0_; }
    double lambda() const { return lambda_; }

    double block_reward(std::uint64_t h) const;
    /// log(R_h); stays finite where R_h itself overflows.
    double log_block_reward(std::uint64_t h) const;
    /// Sum of R_h' for h' = 0..h.
    double max_supply(std::uint64_t h) const;

private:
    double r0_;
    double lambda_;
};

}  // namespace stakesim::core
