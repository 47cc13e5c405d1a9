#pragma once

#include <algorithm>
#include <string>

#include "fimi/errors.hpp"
#include "fimi/money.hpp"

namespace fimi {

namespace detail {

inline void require_lending_rate(const Rate& k, const char* what) {
    if (k.is_negative())
        throw domain_error(std::string(what) + ": lending rate must be non-negative");
}

} // namespace detail

/// Portfolio yield when the share X of disbursed funds is never returned and
/// the rest repays principal plus interest at rate K:
///
///   E(X, K) = (1 - X) * (1 + K) - 1
///
/// Exact rational, no rounding.
inline Rate portfolio_yield(const Fraction& default_share, const Rate& lending_rate) {
    detail::require_lending_rate(lending_rate, "portfolio yield");
    Rational survived = default_share.complement().value();
    Rational gross = Rational(1) + lending_rate.value();
    return Rate::from_rational(survived * gross - Rational(1));
}

/// The default share X0 at which the portfolio exactly breaks even,
/// E(X0, K) = 0. Closed form X0 = K / (1 + K).
inline Fraction break_even_default(const Rate& lending_rate) {
    detail::require_lending_rate(lending_rate, "break-even");
    Rational k = lending_rate.value();
    return Fraction::from_rational(k / (Rational(1) + k));
}

/// The default share Xcr at which the portfolio loss reaches the guarantee
/// fraction, E(Xcr, K) = -PP, so the pledged notes still cover the loss.
/// Closed form Xcr = (K + PP) / (1 + K).
inline Fraction critical_default(const Rate& lending_rate, const Fraction& guarantee) {
    detail::require_lending_rate(lending_rate, "critical default");
    if (guarantee == Fraction::one())
        throw domain_error("critical default: guarantee fraction must be below 100%");
    Rational k = lending_rate.value();
    return Fraction::from_rational((k + guarantee.value()) / (Rational(1) + k));
}

/// Inverse of the yield formula: the rate K at which a portfolio with the
/// forecast default share hits the target yield exactly,
///
///   K = (E + X) / (1 - X).
///
/// Throws infeasible_error when the solution would be negative.
inline Rate solve_rate(const Fraction& forecast_default, const Rate& target_yield) {
    if (forecast_default == Fraction::one())
        throw domain_error("solve rate: forecast default share must be below 100%");
    Rational x = forecast_default.value();
    Rational k = (target_yield.value() + x) / (Rational(1) - x);
    if (k.is_negative())
        throw infeasible_error("solve rate: target yield of " + format_percent(target_yield) +
                               "% at forecast default " + format_percent(forecast_default) +
                               "% needs a negative lending rate");
    return Rate::from_rational(k);
}

/// Rate discount for a priority sector, with a floor keeping the critical
/// default threshold of the tiered book above forecast plus margin.
struct SectorTier {
    std::string sector;
    Rate rate_discount;      // subtracted from the base rate
    Fraction safety_margin;  // required gap between forecast default and Xcr
};

/// Discounted lending rate for a priority sector. The result is
/// max(base - discount, floor, 0) where the floor is the rate at which
/// critical_default(K, PP) equals forecast + margin. A floor above the base
/// rate means the book cannot honor the safety margin at all.
inline Rate tier_rate(const Rate& base, const SectorTier& tier,
                      const Fraction& forecast_default, const Fraction& guarantee) {
    detail::require_lending_rate(base, "tier rate");
    if (tier.rate_discount.is_negative())
        throw domain_error("tier rate: discount must be non-negative");
    Rational x = forecast_default.value() + tier.safety_margin.value();
    if (x >= Rational(1))
        throw infeasible_error("tier rate: forecast plus margin reaches 100%");
    // Same algebra as solve_rate(x, -PP), kept unclamped so a negative floor
    // does not trip the feasibility check.
    Rational floor = (x - guarantee.value()) / (Rational(1) - x);
    if (floor > base.value())
        throw infeasible_error("tier rate: safety floor " +
                               format_percent(Rate::from_rational(floor)) +
                               "% exceeds the base rate");
    Rational discounted = base.value() - tier.rate_discount.value();
    return Rate::from_rational(std::max({discounted, floor, Rational(0)}));
}

} // namespace fimi
