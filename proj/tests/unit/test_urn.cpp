#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "stakesim/errors.hpp"
#include "stakesim/random.hpp"
#include "stakesim/urn.hpp"

using namespace stakesim;
using namespace stakesim::urn;
using core::StakeState;
using core::ValidatorPricing;

namespace {
const std::optional<ValidatorPricing> kNoLoan;
}

TEST_SUITE("urn") {

TEST_CASE("event probabilities examples") {
    const auto st = StakeState::with_stakes({1.0, 1.0});
    auto e = event_probabilities(st, {{0.0, 0.0}, 0.05}, kNoLoan, 0);
    CHECK(e[0] == 0.5);
    CHECK(e[1] == 0.5);
    CHECK(e[2] == 0.0);
    CHECK(e[3] == 0.0);

    e = event_probabilities(st, {{0.2, 0.2}, 0.05}, kNoLoan, 0);
    CHECK(e[0] == doctest::Approx(0.4));
    CHECK(e[1] == doctest::Approx(0.4));
    CHECK(e[2] == doctest::Approx(0.2));
    CHECK(e[3] == 0.0);

    // 0.95 after a slash is below 0.99 of the issuance stake
    const std::optional<ValidatorPricing> loan(ValidatorPricing(0.99, 1.0, 0.5));
    e = event_probabilities(st, {{0.2, 0.2}, 0.05}, loan, 0);
    CHECK(e[0] == doctest::Approx(0.4));
    CHECK(e[1] == doctest::Approx(0.4));
    CHECK(e[2] == 0.0);
    CHECK(e[3] == doctest::Approx(0.2));

    const auto empty = StakeState::with_stakes({0.0, 0.0});
    CHECK_THROWS(event_probabilities(empty, {{0.2, 0.2}, 0.05}, kNoLoan, 0));
}

TEST_CASE("event probabilities sum to one") {
    Rng rng(21);
    for (int t = 0; t < 100000; ++t) {
        const std::size_t n = 2 + t % 5;
        std::vector<double> stakes(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            stakes[i] = rng.uniform() * 100.0;
            p[i] = rng.uniform();
        }
        stakes[0] += 1e-3;
        const auto st = StakeState::with_stakes(stakes);
        std::optional<ValidatorPricing> loan;
        if (rng.bernoulli(0.5)) loan.emplace(0.01 + 0.98 * rng.uniform(), stakes[0] * (0.5 + rng.uniform()), 1.0);
        const auto e = event_probabilities(st, {p, 0.05 + 0.9 * rng.uniform()}, loan, 0);
        double sum = 0.0;
        for (double x : e) {
            REQUIRE(x >= 0.0);
            sum += x;
        }
        REQUIRE(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("apply replacement examples") {
    auto st = StakeState::with_stakes({3.0, 1.0});
    st = apply_replacement(st, {0, 1.0, EventOutcome::RewardedNotSlashed});
    CHECK(st.stakes == std::vector<double>{4.0, 1.0});
    CHECK(st.max_supply == 5.0);

    st = apply_replacement(st, {0, -0.25 * 4.0, EventOutcome::SlashedNoDefault});
    CHECK(st.stakes == std::vector<double>{3.0, 1.0});
    CHECK(st.burned == 1.0);

    st = apply_replacement(st, {1, -1.0, EventOutcome::SlashedDefaulted});
    CHECK(st.stakes == std::vector<double>{3.0, 0.0});
    CHECK(st.burned == 2.0);

    CHECK_THROWS(apply_replacement(st, {1, -1.0, EventOutcome::SlashedNoDefault}));
}

TEST_CASE("replacement draws conserve accounting") {
    Rng rng(22);
    auto st = StakeState::with_stakes({5.0, 3.0, 2.0});
    const SlashParams params{{0.1, 0.3, 0.2}, 0.1};
    const std::optional<ValidatorPricing> loan(ValidatorPricing(0.9, 3.0, 1.0));
    for (int t = 0; t < 20000 && st.total_stake() > 0.0; ++t) {
        const std::size_t i = t % 3;
        const double before = st.total_stake() + st.burned;
        const double supply = st.max_supply;
        const auto d = draw_replacement(st, params, i == 1 ? loan : kNoLoan, i, 1.0, rng);
        switch (d.outcome) {
            case EventOutcome::RewardedNotSlashed: REQUIRE(d.delta == 1.0); break;
            case EventOutcome::NotRewardedNotSlashed: REQUIRE(d.delta == 0.0); break;
            case EventOutcome::SlashedNoDefault: REQUIRE(d.delta == -0.1 * st.stakes[i]); break;
            case EventOutcome::SlashedDefaulted: REQUIRE(d.delta == -st.stakes[i]); break;
        }
        st = apply_replacement(st, d);
        const double after = st.total_stake() + st.burned;
        if (d.outcome == EventOutcome::RewardedNotSlashed) {
            REQUIRE(after - before == doctest::Approx(1.0));
            REQUIRE(st.max_supply == supply + 1.0);
        } else {
            REQUIRE(after == doctest::Approx(before).epsilon(1e-12));
            REQUIRE(st.max_supply == supply);
        }
    }
}

TEST_CASE("urn step keeps supply identity") {
    Rng rng(23);
    for (auto mode : {SlashMode::SelectedOnly, SlashMode::Independent}) {
        auto st = StakeState::with_stakes({10.0, 20.0, 30.0, 40.0});
        const SlashParams params{{0.05, 0.1, 0.2, 0.4}, 0.05};
        for (int h = 0; h < 5000; ++h) {
            const auto r = urn_step(st, params, 1.0, mode, rng);
            if (r.extinct) break;
            REQUIRE(st.total_stake() + st.burned == doctest::Approx(st.max_supply).epsilon(1e-12));
        }
        CHECK(st.max_supply == doctest::Approx(100.0 + 5000.0));
    }
}

TEST_CASE("urn step examples") {
    Rng rng(24);
    auto st = StakeState::with_stakes({1.0, 1.0});
    const auto r = urn_step(st, {{0.0, 0.0}, 0.05}, 1.0, SlashMode::Independent, rng);
    REQUIRE(r.winner);
    CHECK(r.rewarded);
    CHECK(st.stakes[*r.winner] == 2.0);
    CHECK(st.stakes[1 - *r.winner] == 1.0);

    auto s2 = StakeState::with_stakes({100.0, 1.0});
    const auto r2 = urn_step(s2, {{1.0, 0.0}, 0.05}, 1.0, SlashMode::Independent, rng);
    CHECK(r2.slashed == 1);
    CHECK(s2.stakes[0] == doctest::Approx(95.0));
    // a slashed winner forfeits the reward, which is burned
    CHECK(s2.burned == doctest::Approx(*r2.winner == 0 ? 6.0 : 5.0));

    auto s3 = StakeState::with_stakes({5.0, 7.0});
    double prev = s3.total_stake() / s3.max_supply;
    for (int h = 0; h < 200; ++h) {
        const auto r3 = urn_step(s3, {{1.0, 1.0}, 0.05}, 1.0, SlashMode::Independent, rng);
        CHECK_FALSE(r3.rewarded);
        const double ratio = s3.total_stake() / s3.max_supply;
        REQUIRE(ratio < prev);
        prev = ratio;
    }
}

TEST_CASE("ruin probability examples") {
    CHECK(ruin_probability(0.0) == 0.0);
    CHECK(ruin_probability(1.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ruin_probability(0.5) == 1.0);
    CHECK(ruin_probability(0.7) == 1.0);
    CHECK(terminal_beta(0.25) == doctest::Approx(1.5));
    CHECK_THROWS_AS(terminal_beta(0.5), ParameterError);
}

TEST_CASE("ruin frequency small run") {
    // the full 1e5 check lives in the acceptance suite
    for (double p : {0.1, 0.25, 0.4}) {
        const auto est = simulate_ruin(p, 20000, 31);
        const double g = ruin_probability(p);
        const double se = std::sqrt(g * (1.0 - g) / 20000.0);
        CHECK(std::abs(est.frequency() - g) < 3.3 * se);
    }
    CHECK(simulate_ruin(0.0, 100, 1).ruined == 0);
    CHECK(simulate_ruin(0.6, 100, 1).ruined == 100);
}

TEST_CASE("terminal law") {
    Rng rng(25);
    int zeros = 0;
    double sum = 0.0;
    const int n = 200000;
    for (int t = 0; t < n; ++t) {
        const double x = sample_terminal_factor(rng, 0.0);
        REQUIRE(x >= 0.0);
        zeros += x == 0.0;
        sum += x;
    }
    CHECK(zeros == 0);
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));

    zeros = 0;
    sum = 0.0;
    for (int t = 0; t < n; ++t) {
        const double x = sample_terminal_factor(rng, 0.25);
        zeros += x == 0.0;
        sum += x;
    }
    CHECK(static_cast<double>(zeros) / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
    CHECK(sum / n == doctest::Approx(1.0).epsilon(0.015));
    CHECK(terminal_mean(0.25) == doctest::Approx(1.0));
    CHECK(terminal_second_moment(0.25) == doctest::Approx(2.0 * (2.0 / 3.0) * 2.25));
    CHECK_THROWS_AS(sample_terminal_factor(rng, 0.5), ParameterError);

    // exponent variants agree at R = 1
    CHECK(growth_exponent(0.2, 1.0, 0.05, GrowthExponent::Martingale) ==
          doctest::Approx(growth_exponent(0.2, 1.0, 0.05, GrowthExponent::MainText)));
    CHECK(growth_exponent(0.2, 2.0, 0.05, GrowthExponent::Martingale) == doctest::Approx(2.0 * 0.8 - 0.01));
    CHECK(growth_exponent(0.2, 2.0, 0.05, GrowthExponent::MainText) == doctest::Approx(2.0 - 1.05 * 0.2));
    Rng a(7), b(7);
    const double x = sample_terminal_factor(a, 0.1);
    CHECK(sample_terminal_stake(b, 0.1, 1.0, 0.05, 10) ==
          doctest::Approx(std::exp(10.0 * growth_exponent(0.1, 1.0, 0.05, GrowthExponent::Martingale)) * x));
}

TEST_CASE("dispersion examples") {
    CHECK(dispersion_aleph(0.0) == 2.0);
    CHECK(dispersion_aleph(0.3, 1.0, 1.7) == 1.7);
    CHECK(dispersion_aleph(0.25) == doctest::Approx(13.0 / 6.0));
}

TEST_CASE("recurrence experiment") {
    RecurrenceSetup pinned;
    pinned.stakes = {10.0, 10.0, 10.0};
    pinned.slash = {{0.0, 0.0, 0.0}, 0.05};
    pinned.horizon = 1000;
    CHECK(recurrence_experiment(pinned) == 1000);

    RecurrenceSetup mild;
    mild.curve = core::PricingCurve::power_law(1.0);
    mild.stakes = {10.0, 10.0, 10.0, 10.0};
    mild.slash = {{0.05, 0.05, 0.05, 0.05}, 0.05};
    mild.collateral = 0.5;
    mild.horizon = 10000;
    mild.epsilon = 0.1;
    mild.seed = 3;
    const auto visits = recurrence_experiment(mild);
    MESSAGE("recurrence visits (k=1, p=0.05, eps=0.1): " << visits);
    CHECK(visits > 0);

    mild.epsilon = 0.0;
    CHECK(recurrence_experiment(mild) <= mild.horizon);
}

TEST_CASE("selfish mining matrix") {
    const auto m = selfish_mining_matrix(1.5);
    CHECK(m[0][0] == 3.0);
    CHECK(m[0][1] == -1.5);
    CHECK(m[1][0] == 0.0);
    CHECK(m[1][1] == 1.5);
}

}
