#include <doctest.h>

#include <string>

#include "fimi/loan_book.hpp"
#include "fimi/scenario_config.hpp"

using namespace fimi;

namespace {

const std::string SCHEME_CFG = "# worked scenario\n"
                               "principal = 500000.00\n"
                               "rate_percent = 15\n"
                               "guarantee_percent = 10   # municipal notes\n"
                               "collateral_coefficient = 1\n"
                               "collateral_basis = principal_net_plus_interest\n"
                               "sector = general\n"
                               "\n"
                               "default_prob_percent = 10\n"
                               "recovery_model = zero\n"
                               "n_loans = 1000\n"
                               "trials = 200\n"
                               "seed = 42\n";

const std::string BOOK = std::string(LOAN_BOOK_HEADER) + "\n" +
                         "L-1,50000000,1500,1000,52500000,1000,general\n" +
                         "L-2,10000000,1000,0,0,1500,trade\n";

} // namespace

TEST_SUITE("formats") {

TEST_CASE("scenario config parses the worked scenario") {
    ScenarioConfig cfg = parse_scenario_config(SCHEME_CFG);
    LoanTerms t = cfg.loan_terms();
    CHECK(t.principal == Money::from_rubles(500'000));
    CHECK(t.annual_rate == Rate::from_basis_points(1500));
    CHECK(t.guarantee_fraction == Fraction::from_ppm(100'000));
    CHECK(t.collateral_coefficient == Rational(1));
    CHECK(t.collateral_basis == CollateralBasis::PrincipalNetPlusInterest);
    CHECK(t.sector == "general");

    // the default scenario falls back to the required collateral
    DealScenario s = cfg.default_scenario(t);
    CHECK(s.collateral_value == Money::from_rubles(525'000));
    CHECK(s.recovery_fraction == Fraction::one());

    SimConfig sim = cfg.sim_config();
    CHECK(sim.n_loans == 1000);
    CHECK(sim.trials == 200);
    CHECK(sim.seed == 42);
    CHECK(sim.default_prob == Fraction::from_ppm(100'000));
    CHECK(sim.recovery.kind == RecoveryModel::Kind::ZeroRecovery);
}

TEST_CASE("scenario config optional fields") {
    ScenarioConfig cfg = parse_scenario_config("principal = 1000\n"
                                               "rate_percent = 12.5\n"
                                               "guarantee_percent = 0\n"
                                               "collateral_value = 900.50\n"
                                               "recovery_percent = 80\n"
                                               "recovery_model = collateral\n");
    LoanTerms t = cfg.loan_terms();
    CHECK(t.guarantee_fraction == Fraction::zero());
    DealScenario s = cfg.default_scenario(t);
    CHECK(s.collateral_value == Money{90'050});
    CHECK(s.recovery_fraction == Fraction::from_ppm(800'000));
    RecoveryModel r = cfg.recovery_for(t);
    CHECK(r.kind == RecoveryModel::Kind::CollateralRecovery);
    CHECK(r.collateral_value == Money{90'050});
}

TEST_CASE("scenario config rejections") {
    CHECK_THROWS_AS(parse_scenario_config("rate = 15\n"), parse_error);    // unknown key
    CHECK_THROWS_AS(parse_scenario_config("principal\n"), parse_error);    // no '='
    CHECK_THROWS_AS(parse_scenario_config("principal =\n"), parse_error);  // no value
    CHECK_THROWS_AS(parse_scenario_config("seed = 1\nseed = 2\n"), parse_error);
    CHECK_THROWS_AS(parse_scenario_config("rate_percent = -1\n"), parse_error);
    CHECK_THROWS_AS(parse_scenario_config("guarantee_percent = 101\n"), parse_error);
    CHECK_THROWS_AS(parse_scenario_config("principal = 1.005\n"), parse_error);
    CHECK_THROWS_AS(parse_scenario_config("rate_percent = 15.00001\n"), parse_error);
    CHECK_THROWS_AS(parse_scenario_config("trials = ten\n"), parse_error);
    CHECK_THROWS_AS(parse_scenario_config("collateral_basis = both\n"), parse_error);
    CHECK_THROWS_AS(parse_scenario_config("recovery_model = all\n"), parse_error);

    // missing keys surface when the command needs them
    ScenarioConfig cfg = parse_scenario_config("principal = 1000\n");
    CHECK_THROWS_AS(cfg.loan_terms(), parse_error);
    CHECK_THROWS_AS(cfg.sim_config(), parse_error);
    CHECK_THROWS_AS(cfg.portfolio_default_share(), parse_error);
}

TEST_CASE("line numbers in config errors") {
    try {
        parse_scenario_config("principal = 1000\nrate_percent = nope\n");
        FAIL("bad rate accepted");
    } catch (const parse_error& e) {
        CHECK(e.line() == 0); // number format errors carry no line
    }
    try {
        parse_scenario_config("principal = 1000\nmystery = 1\n");
        FAIL("unknown key accepted");
    } catch (const parse_error& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("loan book parses and expands") {
    std::vector<LoanBookRow> rows = parse_loan_book(BOOK);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].loan_id == "L-1");
    CHECK(rows[0].principal_kopecks == 50'000'000);
    CHECK(rows[1].sector == "trade");

    LoanTerms t0 = rows[0].terms();
    CHECK(t0.principal == Money::from_rubles(500'000));
    CHECK(t0.annual_rate == Rate::from_basis_points(1500));
    CHECK(t0.guarantee_fraction == Fraction::from_ppm(100'000));
    CHECK(t0.collateral_coefficient == Rational(1));

    std::vector<SimLoan> zero = to_sim_loans(rows, RecoveryModel::Kind::ZeroRecovery);
    CHECK(zero.size() == 2);
    CHECK(zero[0].recovery.kind == RecoveryModel::Kind::ZeroRecovery);

    std::vector<SimLoan> coll = to_sim_loans(rows, RecoveryModel::Kind::CollateralRecovery,
                                             Fraction::from_ppm(900'000));
    CHECK(coll[0].recovery.collateral_value == Money{52'500'000});
    CHECK(coll[0].recovery.recovery_fraction == Fraction::from_ppm(900'000));
}

TEST_CASE("loan book round trip is the identity") {
    std::vector<LoanBookRow> rows = parse_loan_book(BOOK);
    CHECK(serialize_loan_book(rows) == BOOK);
    std::vector<LoanBookRow> again = parse_loan_book(serialize_loan_book(rows));
    CHECK(serialize_loan_book(again) == BOOK);
}

TEST_CASE("loan book rejections name row and column") {
    CHECK_THROWS_AS(parse_loan_book(""), parse_error);
    CHECK_THROWS_AS(parse_loan_book("id,principal\nL-1,1\n"), parse_error);

    std::string bad_field = std::string(LOAN_BOOK_HEADER) + "\n" +
                            "L-1,50000000,15%,1000,0,1000,general\n";
    try {
        parse_loan_book(bad_field);
        FAIL("bad rate accepted");
    } catch (const parse_error& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 3);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        CHECK(std::string(e.what()).find("rate_bp") != std::string::npos);
    }

    std::string short_row = std::string(LOAN_BOOK_HEADER) + "\nL-1,1,2\n";
    CHECK_THROWS_AS(parse_loan_book(short_row), parse_error);

    std::string dupe = std::string(LOAN_BOOK_HEADER) + "\n" +
                       "L-1,50000000,1500,1000,0,1000,a\n" +
                       "L-1,60000000,1500,1000,0,1000,b\n";
    CHECK_THROWS_AS(parse_loan_book(dupe), parse_error);

    std::string negative = std::string(LOAN_BOOK_HEADER) + "\n" +
                           "L-1,-5,1500,1000,0,1000,a\n";
    CHECK_THROWS_AS(parse_loan_book(negative), parse_error);
}

} // TEST_SUITE
