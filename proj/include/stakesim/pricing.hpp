#pragma once

// Derivative pricing curves: the mother function, per-validator affine
// calibration and the aggregation rules used to build a fungible price.

#include <limits>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace stakesim::core {

/// Price sentinel for a defaulted position.
inline constexpr double kDefaultPrice = std::numeric_limits<double>::infinity();

inline bool is_default(double price) { return price == kDefaultPrice; }

/// phi(u) = max(u^-k, 1).
struct PowerLaw {
    double k = 1.0;
};

/// Piecewise-linear curve through (u, phi) knots. Knots must have strictly
/// increasing u in (0, 1], strictly decreasing phi, and end at (1, 1).
/// Below the first knot the curve continues as phi_0 * u_0 / u.
struct TableDriven {
    std::vector<std::pair<double, double>> knots;
};

class PricingCurve {
public:
    using Kind = std::variant<PowerLaw, TableDriven>;

    PricingCurve() : kind_(PowerLaw{}) {}
    explicit PricingCurve(PowerLaw p);
    explicit PricingCurve(TableDriven t);

    static PricingCurve power_law(double k) { return PricingCurve(PowerLaw{k}); }

    const Kind& kind() const { return kind_; }
    bool is_power_law() const { return std::holds_alternative<PowerLaw>(kind_); }
    /// Exponent for PowerLaw curves; throws for tables.
    double exponent() const;

private:
    Kind kind_;
};

/// Evaluates the mother curve. Returns kDefaultPrice at u = 0.
/// Throws ParameterError for u < 0.
double eval_mother(const PricingCurve& curve, double u);

/// First and second derivative of the mother curve at u > 0. At u = 1 the
/// left (interior) limit is returned.
double mother_derivative(const PricingCurve& curve, double u);
double mother_second_derivative(const PricingCurve& curve, double u);

struct AffineCoefficients {
    double a;
    double b;
};

/// Solves a*S + b = 1 and a*c*S + b = 0 for a validator with issuance stake S.
AffineCoefficients calibrate_affine(double c, double stake_at_issue);

/// Per-validator calibration of the mother curve at loan issuance.
class ValidatorPricing {
public:
    ValidatorPricing(double collateral, double stake_at_issue, double debt = 0.0);

    double collateral() const { return c_; }
    double stake_at_issue() const { return stake_at_issue_; }
    double debt() const { return debt_; }
    double a() const;
    double b() const;

    /// Normalized argument a*s + b; exactly 1 at issuance and 0 at c*issuance.
    double argument(double stake) const;
    /// Chain factor d(argument)/d(stake) times the issuance stake, i.e. 1/(1-c).
    double chain_factor() const { return 1.0 / (1.0 - c_); }

private:
    double c_;
    double stake_at_issue_;
    double debt_;
};

/// phi(a*s + b); kDefaultPrice when the argument is <= 0.
double validator_price(const ValidatorPricing& vp, const PricingCurve& curve, double current_stake);

enum class BoundMode {
    Clamp,  ///< min(price, phi_max)
    Floor,  ///< max(price, phi_max), the literal lattice-meet reading
};

struct BoundedMean {
    double phi_max = 1e6;
    BoundMode mode = BoundMode::Clamp;
};

struct Median {};

using AggregationRule = std::variant<BoundedMean, Median>;

/// Aggregates per-validator prices into one price. Median returns the lower
/// median for even input sizes.
double aggregate_prices(const AggregationRule& rule, std::span<const double> prices);

}  // namespace stakesim::core
