#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "fimi/errors.hpp"
#include "fimi/money.hpp"

namespace fimi {

/// Which exposure the collateral coefficient multiplies.
/// PrincipalNet:             c * L*(1-PP)                (market comparison)
/// PrincipalNetPlusInterest: c * (L*(1-PP) + interest)   (scheme requirement)
enum class CollateralBasis { PrincipalNet, PrincipalNetPlusInterest };

/// One-year bullet microloan under a municipal note guarantee.
/// The municipality backs the fraction PP of the principal with its own
/// promissory notes; the borrower secures the rest plus, depending on the
/// basis, the interest.
struct LoanTerms {
    Money principal;
    Rate annual_rate;                                    // K, simple interest
    Fraction guarantee_fraction;                         // PP, share of principal
    Rational collateral_coefficient = Rational(1);       // c >= 0
    CollateralBasis collateral_basis = CollateralBasis::PrincipalNetPlusInterest;
    std::string sector;
};

inline void validate(const LoanTerms& t) {
    if (t.principal.kopecks <= 0)
        throw domain_error("loan terms: principal must be positive");
    if (t.annual_rate.is_negative())
        throw domain_error("loan terms: lending rate must be non-negative");
    if (t.guarantee_fraction >= Fraction::one())
        throw domain_error("loan terms: guarantee fraction must be below 100%");
    if (t.collateral_coefficient.is_negative())
        throw domain_error("loan terms: collateral coefficient must be non-negative");
}

enum class ScenarioKind { FullRepayment, Default };

/// Outcome scenario for one loan. A default carries the market value of the
/// pledged collateral and the share of the secured claim actually realized.
struct DealScenario {
    ScenarioKind kind = ScenarioKind::FullRepayment;
    Money collateral_value;
    Fraction recovery_fraction = Fraction::one();

    static DealScenario full_repayment() { return {}; }

    static DealScenario defaulted(Money collateral_value,
                                  Fraction recovery = Fraction::one()) {
        DealScenario s;
        s.kind = ScenarioKind::Default;
        s.collateral_value = collateral_value;
        s.recovery_fraction = recovery;
        return s;
    }
};

inline void validate(const DealScenario& s) {
    if (s.kind == ScenarioKind::Default && s.collateral_value.is_negative())
        throw domain_error("scenario: collateral value must be non-negative");
}

/// Result of one loan scenario seen from three sides: the lending fund, the
/// guaranteeing municipality, and both consolidated.
struct DealOutcome {
    ScenarioKind scenario = ScenarioKind::FullRepayment;
    Money fund_cash_in;                    // everything the fund receives
    Rate fund_yield;                       // on principal disbursed
    Money municipal_guarantee_draw;        // face of notes presented, 0 if repaid
    Rate municipal_result;                 // on principal; -PP when notes are drawn
    std::optional<Rate> municipal_roi_net; // interest / L*(1-PP), repayment only
    Rate consolidated_yield;               // fund plus municipality, on principal
};

inline Money interest_due(const LoanTerms& t) {
    return apply_rate(t.principal, t.annual_rate);
}

inline Money total_repayment(const LoanTerms& t) {
    return t.principal + interest_due(t);
}

/// Face value of the municipal notes backing the loan. Guarantees cover
/// principal only, never interest.
inline Money guarantee_face(const LoanTerms& t) {
    return apply_fraction(t.principal, t.guarantee_fraction);
}

/// Principal net of the guaranteed part, L*(1-PP). The borrower's own
/// security answers for this slice.
inline Money net_principal(const LoanTerms& t) {
    return t.principal - guarantee_face(t);
}

/// The claim the borrower must secure: net principal plus interest.
inline Money secured_claim(const LoanTerms& t) {
    return net_principal(t) + interest_due(t);
}

inline Money required_collateral(const LoanTerms& t) {
    Money basis = t.collateral_basis == CollateralBasis::PrincipalNet
                      ? net_principal(t)
                      : secured_claim(t);
    return apply_coefficient(basis, t.collateral_coefficient);
}

inline DealOutcome evaluate_outcome(const LoanTerms& t, const DealScenario& s) {
    validate(t);
    validate(s);
    DealOutcome out;
    out.scenario = s.kind;
    Money interest = interest_due(t);
    if (s.kind == ScenarioKind::FullRepayment) {
        out.fund_cash_in = t.principal + interest;
        out.fund_yield = t.annual_rate;
        out.municipal_guarantee_draw = Money{};
        out.municipal_result = Rate::zero();
        Money net = net_principal(t);
        if (!net.is_zero())
            out.municipal_roi_net = Rate::from_rational(money_ratio(interest, net));
        out.consolidated_yield = t.annual_rate;
        return out;
    }
    Money claim = secured_claim(t);
    Money recovered = apply_fraction(std::min(s.collateral_value, claim), s.recovery_fraction);
    Money draw = guarantee_face(t);
    out.fund_cash_in = recovered + draw;
    out.fund_yield =
        Rate::from_rational(money_ratio(out.fund_cash_in - t.principal, t.principal));
    out.municipal_guarantee_draw = draw;
    out.municipal_result = -Rate::from_rational(t.guarantee_fraction.value());
    out.consolidated_yield =
        Rate::from_rational(money_ratio(recovered - t.principal, t.principal));
    return out;
}

/// The spread of possible per-deal yields, in both reporting conventions.
/// The two conventions use different bases and are never blended: the lower
/// bound is always the municipal loss cap -PP on disbursed principal, the
/// upper bound is either the municipal ROI on net budget exposure K/(1-PP)
/// or the plain fund rate K on principal.
struct YieldRange {
    Rate lower;
    Rate upper;
};

struct DealYieldBounds {
    YieldRange net_exposure; // (-PP, K/(1-PP))
    YieldRange on_principal; // (-PP, K)
};

inline DealYieldBounds deal_yield_bounds(const LoanTerms& t) {
    validate(t); // rejects PP = 1, which would zero the net-exposure base
    Rate loss_cap = -Rate::from_rational(t.guarantee_fraction.value());
    Rational net_share = t.guarantee_fraction.complement().value();
    DealYieldBounds b;
    b.net_exposure = {loss_cap, Rate::from_rational(t.annual_rate.value() / net_share)};
    b.on_principal = {loss_cap, t.annual_rate};
    return b;
}

} // namespace fimi
