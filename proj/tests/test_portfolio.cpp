#include <doctest.h>

#include "fimi/portfolio.hpp"
#include "fimi/rng.hpp"

using namespace fimi;

namespace {

std::uint64_t rnd(std::uint64_t& state) {
    state = rng::mix(state + rng::GAMMA);
    return state;
}

const Rate K15 = Rate::from_basis_points(1500);
const Fraction PP10 = Fraction::from_ppm(100'000);

} // namespace

TEST_SUITE("portfolio") {

TEST_CASE("portfolio yield at named points") {
    // the break-even share substituted back gives exactly zero
    CHECK(portfolio_yield(Fraction::from_rational(Rational::of(3, 23)), K15) == Rate::zero());
    // at 13% flat the yield is +0.05%
    CHECK(portfolio_yield(Fraction::from_ppm(130'000), K15).value() ==
          Rational::of(5, 10'000));
    // no defaults: yield equals the lending rate
    CHECK(portfolio_yield(Fraction::zero(), K15) == K15);
    // at 21.7% flat: -9.955%
    CHECK(portfolio_yield(Fraction::from_ppm(217'000), K15).value() ==
          Rational::of(-9955, 100'000));
    CHECK(format_percent(portfolio_yield(Fraction::from_ppm(217'000), K15)) == "-9.9550");
    // at the exact critical share: -10% on the kopeck
    CHECK(portfolio_yield(Fraction::from_rational(Rational::of(5, 23)), K15).value() ==
          Rational::of(-1, 10));
    // everything lost
    CHECK(portfolio_yield(Fraction::one(), K15).value() == Rational(-1));
}

TEST_CASE("break-even default share") {
    Fraction x0 = break_even_default(K15);
    CHECK(x0.value() == Rational::of(3, 23));
    CHECK(format_percent(x0) == "13.0435");
    CHECK(break_even_default(Rate::zero()) == Fraction::zero());
    CHECK(break_even_default(Rate::from_basis_points(1000)).value() == Rational::of(1, 11));
    CHECK(format_percent(break_even_default(Rate::from_basis_points(1000))) == "9.0909");
    CHECK_THROWS_AS(break_even_default(Rate::from_basis_points(-1)), domain_error);
}

TEST_CASE("critical default share") {
    Fraction xcr = critical_default(K15, PP10);
    CHECK(xcr.value() == Rational::of(5, 23));
    CHECK(format_percent(xcr) == "21.7391");
    CHECK(critical_default(K15, Fraction::zero()) == break_even_default(K15));
    CHECK(critical_default(Rate::from_basis_points(1000), PP10).value() ==
          Rational::of(2, 11));
    CHECK(format_percent(critical_default(Rate::from_basis_points(1000), PP10)) == "18.1818");
    CHECK_THROWS_AS(critical_default(K15, Fraction::one()), domain_error);
}

TEST_CASE("solve_rate named points") {
    CHECK(solve_rate(Fraction::from_rational(Rational::of(3, 23)), Rate::zero()).value() ==
          Rational::of(3, 20));
    CHECK(solve_rate(Fraction::zero(), Rate::zero()) == Rate::zero());
    CHECK(solve_rate(Fraction::from_rational(Rational::of(5, 23)),
                     Rate::from_basis_points(-1000))
              .value() == Rational::of(3, 20));
    // a share entered at 4-decimal precision solves back to a rate that
    // still renders as 15.0000
    CHECK(format_percent(solve_rate(Fraction::from_ppm(130'435), Rate::zero())) == "15.0000");
}

TEST_CASE("solve_rate feasibility") {
    CHECK_THROWS_AS(solve_rate(Fraction::zero(), Rate::from_basis_points(-1000)),
                    infeasible_error);
    CHECK_THROWS_AS(solve_rate(Fraction::one(), Rate::zero()), domain_error);
    // a loss tolerance larger than the forecast share is already covered
    CHECK_THROWS_AS(solve_rate(Fraction::from_ppm(50'000), Rate::from_basis_points(-1000)),
                    infeasible_error);
}

TEST_CASE("tier rate") {
    SectorTier tier{"agriculture", Rate::from_basis_points(500), Fraction::zero()};
    // floor = solve_rate(5%, -10%) = -1/19, far below the discounted 10%
    CHECK(tier_rate(K15, tier, Fraction::from_ppm(50'000), PP10) ==
          Rate::from_basis_points(1000));

    SectorTier none{"services", Rate::zero(), Fraction::zero()};
    CHECK(tier_rate(K15, none, Fraction::from_ppm(50'000), PP10) == K15);

    // discount past zero clamps at a non-negative rate
    SectorTier deep{"social", Rate::from_basis_points(2000), Fraction::zero()};
    CHECK(tier_rate(K15, deep, Fraction::from_ppm(50'000), PP10) == Rate::zero());

    // binding floor: forecast 20% with PP 10% needs at least 12.5%
    SectorTier clamped{"trade", Rate::from_basis_points(500), Fraction::zero()};
    CHECK(tier_rate(K15, clamped, Fraction::from_ppm(200'000), PP10).value() ==
          Rational::of(1, 8));

    // floor above the base rate: the margin cannot be honored at all
    SectorTier margin{"transport", Rate::zero(), Fraction::from_ppm(200'000)};
    CHECK_THROWS_AS(tier_rate(K15, margin, Fraction::from_ppm(200'000), PP10),
                    infeasible_error);
}

TEST_CASE("round trips are exact over random rates and guarantees") {
    std::uint64_t state = 5150;
    for (int i = 0; i < 1500; ++i) {
        Rate k = Rate::from_basis_points(static_cast<std::int64_t>(rnd(state) % 10'001));
        Fraction pp = Fraction::from_ppm(static_cast<std::int64_t>(rnd(state) % 900'001));
        CHECK(solve_rate(break_even_default(k), Rate::zero()) == k);
        CHECK(solve_rate(critical_default(k, pp),
                         -Rate::from_rational(pp.value())) == k);
        CHECK(portfolio_yield(break_even_default(k), k) == Rate::zero());
        CHECK(portfolio_yield(critical_default(k, pp), k).value() == -pp.value());
    }
}

TEST_CASE("threshold ordering and monotonicity") {
    std::uint64_t state = 6021;
    for (int i = 0; i < 1000; ++i) {
        std::int64_t kbp = static_cast<std::int64_t>(rnd(state) % 10'000) + 1;
        std::int64_t ppm = static_cast<std::int64_t>(rnd(state) % 899'999) + 1;
        Rate k = Rate::from_basis_points(kbp);
        Fraction pp = Fraction::from_ppm(ppm);

        Fraction x0 = break_even_default(k);
        Fraction xcr = critical_default(k, pp);
        CHECK(Fraction::zero() < x0);
        CHECK(x0 < xcr);
        CHECK(xcr < Fraction::one());

        // yield falls as defaults grow, rises with the rate
        Fraction x_lo = Fraction::from_ppm(ppm / 2);
        CHECK(portfolio_yield(x_lo, k) > portfolio_yield(pp, k));
        Rate k_hi = Rate::from_basis_points(kbp + 100);
        CHECK(portfolio_yield(pp, k_hi) > portfolio_yield(pp, k));

        // thresholds grow with the rate and the guarantee
        CHECK(critical_default(k_hi, pp) > xcr);
        Fraction pp_hi = Fraction::from_ppm(ppm + 100);
        CHECK(critical_default(k, pp_hi) > xcr);

        // with no defaults the yield is the rate; the net-exposure bound
        // dominates it
        CHECK(portfolio_yield(Fraction::zero(), k) == k);
        Rational net_upper = k.value() / pp.complement().value();
        CHECK(net_upper >= k.value());
    }
    // equality of the bounds only without a guarantee
    Rate k = Rate::from_basis_points(1500);
    CHECK(k.value() / Fraction::zero().complement().value() == k.value());
}

} // TEST_SUITE
