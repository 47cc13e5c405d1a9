#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fimi/deal.hpp"
#include "fimi/errors.hpp"
#include "fimi/money.hpp"
#include "fimi/rng.hpp"

namespace fimi {

/// What a defaulted loan recovers. ZeroRecovery writes the whole exposure
/// off; CollateralRecovery realizes the pledged collateral through the
/// deal-engine default scenario.
struct RecoveryModel {
    enum class Kind { ZeroRecovery, CollateralRecovery };

    Kind kind = Kind::ZeroRecovery;
    Money collateral_value;
    Fraction recovery_fraction = Fraction::one();

    static RecoveryModel zero() { return {}; }

    static RecoveryModel collateral(Money value, Fraction recovered = Fraction::one()) {
        RecoveryModel m;
        m.kind = Kind::CollateralRecovery;
        m.collateral_value = value;
        m.recovery_fraction = recovered;
        return m;
    }
};

/// One loan of a simulated book.
struct SimLoan {
    LoanTerms terms;
    RecoveryModel recovery;
};

/// Homogeneous-book simulation input. Heterogeneous books enter through the
/// book-level run_sim overload.
struct SimConfig {
    std::int64_t n_loans = 1;
    LoanTerms terms;
    Fraction default_prob;
    RecoveryModel recovery;
    std::int64_t trials = 1;
    std::uint64_t seed = 0;
};

inline void validate(const SimConfig& cfg) {
    if (cfg.n_loans < 1)
        throw domain_error("sim config: n_loans must be at least 1");
    if (cfg.trials < 1)
        throw domain_error("sim config: trials must be at least 1");
    validate(cfg.terms);
    if (cfg.recovery.kind == RecoveryModel::Kind::CollateralRecovery &&
        cfg.recovery.collateral_value.is_negative())
        throw domain_error("sim config: collateral value must be non-negative");
}

/// Exact cash totals of one portfolio trial.
struct TrialResult {
    Money principal;           // total disbursed
    Money fund_cash_in;        // repayments, recoveries and guarantee draws
    Money guarantee_draw;      // face of notes presented in this trial
    std::int64_t defaults = 0; // defaulted loan count

    Rate fund_yield() const {
        return Rate::from_rational(money_ratio(fund_cash_in - principal, principal));
    }

    Rate consolidated_yield() const {
        return Rate::from_rational(
            money_ratio(fund_cash_in - guarantee_draw - principal, principal));
    }
};

/// Aggregated simulation output. All means and quantiles are exact ratios of
/// integer kopeck totals; only the standard error passes through one square
/// root and is then pinned to 0.01 bp resolution, so reports for one
/// (config, seed) pair are identical bit for bit on every platform.
struct SimReport {
    Rate mean_fund_yield;
    Rate mean_consolidated_yield;
    Rate std_error;             // of the mean consolidated yield
    Rate mean_municipal_loss;   // guarantee draws over disbursed principal
    static constexpr std::array<int, 5> quantile_levels{1, 5, 50, 95, 99};
    std::array<Rate, 5> quantiles; // consolidated yield, nearest-rank
    std::int64_t trials_below_cap = 0; // consolidated yield strictly below -cap
    Fraction loss_cap;          // pledgeable face over principal
    std::int64_t trials = 0;
    std::int64_t n_loans = 0;
    std::uint64_t seed = 0;
    std::string config_digest;

    Fraction share_below_cap() const {
        return Fraction::from_rational(Rational::of(trials_below_cap, trials));
    }
};

namespace detail {

// Per-loan settlement amounts, fixed before any trial runs. Both branches
// come from the deal engine, so a trial is a Bernoulli pick between two
// precomputed exact outcomes.
struct LoanCash {
    std::int64_t principal;
    std::int64_t repay_cash;
    std::int64_t default_cash; // recovery plus guarantee draw
    std::int64_t draw;
};

inline LoanCash loan_cash(const SimLoan& loan) {
    validate(loan.terms);
    DealOutcome repaid = evaluate_outcome(loan.terms, DealScenario::full_repayment());
    DealScenario worst =
        loan.recovery.kind == RecoveryModel::Kind::ZeroRecovery
            ? DealScenario::defaulted(Money{}, Fraction::zero())
            : DealScenario::defaulted(loan.recovery.collateral_value,
                                      loan.recovery.recovery_fraction);
    DealOutcome defaulted = evaluate_outcome(loan.terms, worst);
    return LoanCash{loan.terms.principal.kopecks, repaid.fund_cash_in.kopecks,
                    defaulted.fund_cash_in.kopecks, defaulted.municipal_guarantee_draw.kopecks};
}

inline TrialResult run_trial_cash(std::span<const LoanCash> book, const Rational& p,
                                  std::uint64_t seed, std::uint64_t trial_index) {
    int128 cash = 0;
    int128 draw = 0;
    int128 principal = 0;
    std::int64_t defaults = 0;
    for (std::size_t i = 0; i < book.size(); ++i) {
        principal += book[i].principal;
        if (rng::bernoulli(rng::word_at(seed, trial_index, i), p)) {
            cash += book[i].default_cash;
            draw += book[i].draw;
            ++defaults;
        } else {
            cash += book[i].repay_cash;
        }
    }
    TrialResult t;
    t.principal = Money{narrow64(principal, "sim: principal total overflow")};
    t.fund_cash_in = Money{narrow64(cash, "sim: cash total overflow")};
    t.guarantee_draw = Money{narrow64(draw, "sim: draw total overflow")};
    t.defaults = defaults;
    return t;
}

inline Rational rational_from_int128(int128 num, int128 den, const char* what) {
    if (den == 0)
        throw domain_error(std::string(what) + ": zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    if (num == 0)
        return Rational(0);
    uint128 g = gcd128(uabs128(num), uabs128(den));
    int128 rn = num < 0 ? -static_cast<int128>(uabs128(num) / g)
                        : static_cast<int128>(uabs128(num) / g);
    int128 rd = static_cast<int128>(uabs128(den) / g);
    return Rational::of(narrow64(rn, what), narrow64(rd, what));
}

inline std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

inline void describe_loan(std::string& out, const SimLoan& loan) {
    out += "loan:";
    out += std::to_string(loan.terms.principal.kopecks);
    out += ':';
    out += loan.terms.annual_rate.value().str();
    out += ':';
    out += loan.terms.guarantee_fraction.value().str();
    out += ':';
    out += loan.recovery.kind == RecoveryModel::Kind::ZeroRecovery ? "zero" : "collateral";
    if (loan.recovery.kind == RecoveryModel::Kind::CollateralRecovery) {
        out += ':';
        out += std::to_string(loan.recovery.collateral_value.kopecks);
        out += ':';
        out += loan.recovery.recovery_fraction.value().str();
    }
    out += ';';
}

} // namespace detail

/// One trial of a heterogeneous book: independent per-loan default draws from
/// the (seed, trial_index, loan_index) counter stream, each loan settled with
/// deal-engine semantics.
inline TrialResult run_trial(std::span<const SimLoan> book, const Fraction& default_prob,
                             std::uint64_t seed, std::uint64_t trial_index) {
    if (book.empty())
        throw domain_error("sim: empty loan book");
    std::vector<detail::LoanCash> cash;
    cash.reserve(book.size());
    for (const SimLoan& loan : book)
        cash.push_back(detail::loan_cash(loan));
    return detail::run_trial_cash(cash, default_prob.value(), seed, trial_index);
}

/// One trial of the homogeneous config.
inline TrialResult run_trial(const SimConfig& cfg, std::uint64_t trial_index) {
    validate(cfg);
    std::vector<detail::LoanCash> cash(
        static_cast<std::size_t>(cfg.n_loans),
        detail::loan_cash(SimLoan{cfg.terms, cfg.recovery}));
    return detail::run_trial_cash(cash, cfg.default_prob.value(), cfg.seed, trial_index);
}

/// Full simulation of an explicit book. Trials are pure functions of
/// (book, default_prob, seed, trial_index); the aggregation is a fold in
/// trial-index order, so evaluation order cannot change the report.
inline SimReport run_sim(std::span<const SimLoan> book, const Fraction& default_prob,
                         std::int64_t trials, std::uint64_t seed,
                         std::string_view digest_payload = {}) {
    if (book.empty())
        throw domain_error("sim: empty loan book");
    if (trials < 1)
        throw domain_error("sim: trials must be at least 1");

    std::vector<detail::LoanCash> cash;
    cash.reserve(book.size());
    std::string digest_text;
    for (const SimLoan& loan : book) {
        cash.push_back(detail::loan_cash(loan));
        if (digest_payload.empty())
            detail::describe_loan(digest_text, loan);
    }

    detail::int128 principal = 0;
    detail::int128 pledgeable = 0;
    for (const detail::LoanCash& lc : cash) {
        principal += lc.principal;
        pledgeable += lc.draw;
    }
    std::int64_t principal64 = detail::narrow64(principal, "sim: principal total overflow");

    std::vector<std::int64_t> net(static_cast<std::size_t>(trials)); // cash minus draw
    detail::int128 sum_cash = 0;
    detail::int128 sum_draw = 0;
    detail::int128 sum_net = 0;
    detail::uint128 sum_net_sq = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        TrialResult r = detail::run_trial_cash(cash, default_prob.value(), seed,
                                               static_cast<std::uint64_t>(t));
        std::int64_t n = (r.fund_cash_in - r.guarantee_draw).kopecks;
        net[static_cast<std::size_t>(t)] = n;
        sum_cash += r.fund_cash_in.kopecks;
        sum_draw += r.guarantee_draw.kopecks;
        sum_net += n;
        detail::uint128 sq = detail::uabs128(n) * detail::uabs128(n);
        if (sum_net_sq > ~static_cast<detail::uint128>(0) - sq)
            throw overflow_error("sim: variance accumulator overflow");
        sum_net_sq += sq;
    }

    SimReport rep;
    rep.trials = trials;
    rep.n_loans = static_cast<std::int64_t>(book.size());
    rep.seed = seed;
    detail::int128 total_principal = principal * trials;
    rep.mean_fund_yield = Rate::from_rational(detail::rational_from_int128(
        sum_cash - total_principal, total_principal, "sim: mean fund yield"));
    rep.mean_consolidated_yield = Rate::from_rational(detail::rational_from_int128(
        sum_net - total_principal, total_principal, "sim: mean consolidated yield"));
    rep.mean_municipal_loss = Rate::from_rational(
        detail::rational_from_int128(sum_draw, total_principal, "sim: mean municipal loss"));
    rep.loss_cap = Fraction::from_rational(
        detail::rational_from_int128(pledgeable, principal, "sim: loss cap"));

    // Standard error of the mean consolidated yield from the exact sample
    // variance of per-trial net cash, pinned to 0.01 bp.
    if (trials > 1) {
        if (sum_net_sq > static_cast<detail::uint128>(INT64_MAX) * INT64_MAX / trials)
            throw overflow_error("sim: variance accumulator overflow");
        detail::int128 var_num =
            static_cast<detail::int128>(sum_net_sq) * trials - sum_net * sum_net;
        double se_cash = std::sqrt(static_cast<double>(var_num)) /
                         (static_cast<double>(trials) * std::sqrt(static_cast<double>(trials - 1)));
        double se_yield = se_cash / static_cast<double>(principal64);
        rep.std_error = Rate::from_rational(
            Rational::of(static_cast<std::int64_t>(std::llround(se_yield * 1e6)), 1'000'000));
    } else {
        rep.std_error = Rate::zero();
    }

    // Nearest-rank quantiles of the consolidated yield.
    std::vector<std::int64_t> sorted = net;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t qi = 0; qi < SimReport::quantile_levels.size(); ++qi) {
        std::int64_t rank = (SimReport::quantile_levels[qi] * trials + 99) / 100; // ceil
        rank = std::clamp<std::int64_t>(rank, 1, trials);
        std::int64_t n = sorted[static_cast<std::size_t>(rank - 1)];
        rep.quantiles[qi] =
            Rate::from_rational(detail::rational_from_int128(
                static_cast<detail::int128>(n) - principal, principal, "sim: quantile"));
    }

    // consolidated yield < -cap  <=>  net * cap_den < principal * (cap_den - cap_num)
    const Rational cap = rep.loss_cap.value();
    detail::int128 cap_threshold =
        static_cast<detail::int128>(principal64) * (cap.den() - cap.num());
    for (std::int64_t n : net)
        if (static_cast<detail::int128>(n) * cap.den() < cap_threshold)
            ++rep.trials_below_cap;

    std::string canonical;
    canonical += "p=";
    canonical += default_prob.value().str();
    canonical += ";trials=";
    canonical += std::to_string(trials);
    canonical += ';';
    canonical += digest_payload.empty() ? digest_text : std::string(digest_payload);
    rep.config_digest = detail::hex64(detail::fnv1a64(canonical));
    return rep;
}

/// Full simulation of the homogeneous config.
inline SimReport run_sim(const SimConfig& cfg) {
    validate(cfg);
    std::vector<SimLoan> book(static_cast<std::size_t>(cfg.n_loans),
                              SimLoan{cfg.terms, cfg.recovery});
    std::string digest;
    detail::describe_loan(digest, book.front());
    digest += "n=";
    digest += std::to_string(cfg.n_loans);
    digest += ';';
    return run_sim(book, cfg.default_prob, cfg.trials, cfg.seed, digest);
}

} // namespace fimi
