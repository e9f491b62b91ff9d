#include "stakesim/monetary.hpp"

#include <cmath>

#include "stakesim/errors.hpp"

namespace stakesim::core {

MonetaryPolicy::MonetaryPolicy(double r0, double lambda) : r0_(r0), lambda_(lambda) {
    if (!(r0 > 0.0) || !std::isfinite(r0)) throw ParameterError("base block reward must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("policy parameter lambda must be positive");
}

double MonetaryPolicy::block_reward(std::uint64_t h) const {
    return r0_ * std::pow(lambda_, static_cast<double>(h));
}

double MonetaryPolicy::log_block_reward(std::uint64_t h) const {
    return std::log(r0_) + static_cast<double>(h) * std::log(lambda_);
}

double MonetaryPolicy::max_supply(std::uint64_t h) const {
    const double n = static_cast<double>(h) + 1.0;
    if (lambda_ == 1.0) return n * r0_;
    // expm1 keeps the sum accurate when lambda is close to 1.
    return r0_ * std::expm1(n * std::log(lambda_)) / (lambda_ - 1.0);
}

}  // namespace stakesim::core
