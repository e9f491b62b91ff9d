#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace stakesim {

/// Mixes a master seed with stream coordinates into an independent 64-bit seed.
std::uint64_t hash64(std::uint64_t master_seed, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0);

/// One deterministic random stream. Every draw goes through this class so a
/// trajectory's output depends only on its seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    double exponential(double rate);
    double normal() { return normal_(engine_); }
    double gamma(double shape, double scale);
    /// Beta(a, 1) by inversion.
    double beta_a1(double a);
    double chi_squared(double dof) { return gamma(0.5 * dof, 2.0); }
    /// Index drawn with probability proportional to weights; weights must have a positive sum.
    std::size_t categorical(std::span<const double> weights, double total);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace stakesim
