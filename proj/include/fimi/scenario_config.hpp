#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "fimi/deal.hpp"
#include "fimi/errors.hpp"
#include "fimi/money.hpp"
#include "fimi/simulate.hpp"

namespace fimi {

// Flat scenario file: UTF-8 "key = value" lines, '#' starts a comment.
// Percent values take up to four decimals, money two, coefficients three;
// anything finer is rejected rather than rounded.
//
//   principal = 500000.00
//   rate_percent = 15
//   guarantee_percent = 10
//   collateral_coefficient = 1
//   collateral_basis = principal_net_plus_interest
//   sector = general
//   collateral_value = 525000.00        # optional, default: required collateral
//   recovery_percent = 100
//   recovery_model = collateral         # zero | collateral
//   default_prob_percent = 10
//   n_loans = 1000
//   trials = 1000
//   seed = 42
struct ScenarioConfig {
    std::optional<Money> principal;
    std::optional<Rate> rate;
    std::optional<Fraction> guarantee;
    std::optional<Rational> collateral_coefficient;
    std::optional<CollateralBasis> collateral_basis;
    std::optional<std::string> sector;
    std::optional<Money> collateral_value;
    std::optional<Fraction> recovery;
    std::optional<RecoveryModel::Kind> recovery_model;
    std::optional<Fraction> default_prob;
    std::optional<std::int64_t> n_loans;
    std::optional<std::int64_t> trials;
    std::optional<std::uint64_t> seed;

    /// Loan terms for the deal and simulate commands. Principal, rate and
    /// guarantee are mandatory; coefficient defaults to 1 on the scheme
    /// basis (net principal plus interest).
    LoanTerms loan_terms() const {
        LoanTerms t;
        t.principal = require(principal, "principal");
        t.annual_rate = require(rate, "rate_percent");
        t.guarantee_fraction = require(guarantee, "guarantee_percent");
        t.collateral_coefficient = collateral_coefficient.value_or(Rational(1));
        t.collateral_basis =
            collateral_basis.value_or(CollateralBasis::PrincipalNetPlusInterest);
        t.sector = sector.value_or("general");
        validate(t);
        return t;
    }

    /// Default scenario for the deal command: pledged collateral at its
    /// configured value (falls back to the required collateral) and the
    /// configured recovery share.
    DealScenario default_scenario(const LoanTerms& t) const {
        Money collateral = collateral_value.value_or(required_collateral(t));
        return DealScenario::defaulted(collateral, recovery.value_or(Fraction::one()));
    }

    RecoveryModel recovery_for(const LoanTerms& t) const {
        if (recovery_model.value_or(RecoveryModel::Kind::ZeroRecovery) ==
            RecoveryModel::Kind::ZeroRecovery)
            return RecoveryModel::zero();
        return RecoveryModel::collateral(collateral_value.value_or(required_collateral(t)),
                                         recovery.value_or(Fraction::one()));
    }

    SimConfig sim_config() const {
        SimConfig cfg;
        cfg.terms = loan_terms();
        cfg.default_prob = require(default_prob, "default_prob_percent");
        cfg.n_loans = require(n_loans, "n_loans");
        cfg.trials = require(trials, "trials");
        cfg.seed = seed.value_or(0);
        cfg.recovery = recovery_for(cfg.terms);
        validate(cfg);
        return cfg;
    }

    Fraction portfolio_default_share() const {
        return require(default_prob, "default_prob_percent");
    }

private:
    template <class T>
    static const T& require(const std::optional<T>& field, const char* key) {
        if (!field)
            throw parse_error(std::string("config: missing required key '") + key + "'");
        return *field;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::int64_t parse_count(std::string_view v, std::size_t line, const char* what) {
    if (v.empty())
        throw parse_error(std::string("config: empty ") + what, line);
    std::int64_t n = 0;
    for (char c : v) {
        if (c < '0' || c > '9')
            throw parse_error(std::string("config: ") + what + " must be a whole number", line);
        if (n > (INT64_MAX - (c - '0')) / 10)
            throw parse_error(std::string("config: ") + what + " out of range", line);
        n = n * 10 + (c - '0');
    }
    return n;
}

inline Fraction percent_fraction(std::string_view v, std::size_t line, const char* what) {
    Rational r = parse_percent(v);
    if (r.is_negative() || r > Rational(1))
        throw parse_error(std::string("config: ") + what + " must lie in [0, 100]", line);
    return Fraction::from_rational(r);
}

} // namespace detail

inline ScenarioConfig parse_scenario_config(std::string_view text) {
    ScenarioConfig cfg;
    std::map<std::string, bool, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        ++line_no;
        std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        std::string_view line = detail::trim(raw);
        if (!line.empty()) {
            std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw parse_error("config: expected 'key = value'", line_no);
            std::string key{detail::trim(line.substr(0, eq))};
            std::string_view value = detail::trim(line.substr(eq + 1));
            if (key.empty() || value.empty())
                throw parse_error("config: expected 'key = value'", line_no);
            if (!seen.emplace(key, true).second)
                throw parse_error("config: duplicate key '" + key + "'", line_no);

            if (key == "principal") {
                cfg.principal = parse_money(value);
            } else if (key == "rate_percent") {
                Rational r = parse_percent(value);
                if (r.is_negative())
                    throw parse_error("config: rate_percent must be non-negative", line_no);
                cfg.rate = Rate::from_rational(r);
            } else if (key == "guarantee_percent") {
                cfg.guarantee = detail::percent_fraction(value, line_no, "guarantee_percent");
            } else if (key == "collateral_coefficient") {
                cfg.collateral_coefficient = parse_coefficient(value);
            } else if (key == "collateral_basis") {
                if (value == "principal_net")
                    cfg.collateral_basis = CollateralBasis::PrincipalNet;
                else if (value == "principal_net_plus_interest")
                    cfg.collateral_basis = CollateralBasis::PrincipalNetPlusInterest;
                else
                    throw parse_error("config: collateral_basis must be principal_net or "
                                      "principal_net_plus_interest",
                                      line_no);
            } else if (key == "sector") {
                cfg.sector = std::string(value);
            } else if (key == "collateral_value") {
                cfg.collateral_value = parse_money(value);
            } else if (key == "recovery_percent") {
                cfg.recovery = detail::percent_fraction(value, line_no, "recovery_percent");
            } else if (key == "recovery_model") {
                if (value == "zero")
                    cfg.recovery_model = RecoveryModel::Kind::ZeroRecovery;
                else if (value == "collateral")
                    cfg.recovery_model = RecoveryModel::Kind::CollateralRecovery;
                else
                    throw parse_error("config: recovery_model must be zero or collateral",
                                      line_no);
            } else if (key == "default_prob_percent") {
                cfg.default_prob =
                    detail::percent_fraction(value, line_no, "default_prob_percent");
            } else if (key == "n_loans") {
                cfg.n_loans = detail::parse_count(value, line_no, "n_loans");
            } else if (key == "trials") {
                cfg.trials = detail::parse_count(value, line_no, "trials");
            } else if (key == "seed") {
                std::uint64_t s = 0;
                for (char c : value) {
                    if (c < '0' || c > '9')
                        throw parse_error("config: seed must be a whole number", line_no);
                    if (s > (UINT64_MAX - static_cast<unsigned>(c - '0')) / 10)
                        throw parse_error("config: seed out of range", line_no);
                    s = s * 10 + static_cast<unsigned>(c - '0');
                }
                cfg.seed = s;
            } else {
                throw parse_error("config: unknown key '" + key + "'", line_no);
            }
        }
        if (eol == std::string_view::npos)
            break;
        pos = eol + 1;
    }
    return cfg;
}

} // namespace fimi
