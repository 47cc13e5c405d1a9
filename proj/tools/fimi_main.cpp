// fimi command-line tool: deal reports, portfolio thresholds, rate solving,
// seeded portfolio simulation and promissory-note ledger replay.
//
// Exit codes: 0 success, 2 input validation, 3 infeasible rate target,
// 4 ledger invariant violation.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fimi/deal.hpp"
#include "fimi/ledger.hpp"
#include "fimi/loan_book.hpp"
#include "fimi/money.hpp"
#include "fimi/portfolio.hpp"
#include "fimi/scenario_config.hpp"
#include "fimi/simulate.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int EXIT_VALIDATION = 2;
constexpr int EXIT_INFEASIBLE = 3;
constexpr int EXIT_LEDGER = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw fimi::parse_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw fimi::parse_error("cannot write '" + path + "'");
    out << content;
}

std::string pad(const std::string& label) {
    std::string s = "  " + label + ":";
    if (s.size() < 30)
        s.append(30 - s.size(), ' ');
    else
        s += ' ';
    return s;
}

std::string pct(const fimi::Rate& r) { return fimi::format_percent(r) + "%"; }
std::string pct(const fimi::Fraction& f) { return fimi::format_percent(f) + "%"; }

/// Rate in basis points at 0.01 bp resolution, as a JSON number.
double bp(const fimi::Rate& r) {
    return static_cast<double>(r.value().round_scaled(1'000'000)) / 100.0;
}

// ---------------------------------------------------------------------------
// deal
// ---------------------------------------------------------------------------

json outcome_json(const fimi::DealOutcome& out) {
    json j;
    j["fund_cash_in"] = fimi::format_money(out.fund_cash_in);
    j["fund_yield_percent"] = fimi::format_percent(out.fund_yield);
    j["guarantee_draw"] = fimi::format_money(out.municipal_guarantee_draw);
    j["municipal_result_percent"] = fimi::format_percent(out.municipal_result);
    if (out.municipal_roi_net)
        j["municipal_roi_net_percent"] = fimi::format_percent(*out.municipal_roi_net);
    j["consolidated_yield_percent"] = fimi::format_percent(out.consolidated_yield);
    return j;
}

void outcome_text(std::string& s, const fimi::DealOutcome& out) {
    s += pad("fund cash in") + fimi::format_money(out.fund_cash_in) + "\n";
    s += pad("fund yield") + pct(out.fund_yield) + "\n";
    s += pad("guarantee draw") + fimi::format_money(out.municipal_guarantee_draw) + "\n";
    s += pad("municipal result") + pct(out.municipal_result) + "\n";
    if (out.municipal_roi_net)
        s += pad("municipal roi, net exposure") + pct(*out.municipal_roi_net) + "\n";
    s += pad("consolidated yield") + pct(out.consolidated_yield) + "\n";
}

int cmd_deal(const fimi::ScenarioConfig& cfg, bool as_json) {
    fimi::LoanTerms terms = cfg.loan_terms();
    fimi::Money interest = fimi::interest_due(terms);
    fimi::Money repayment = fimi::total_repayment(terms);
    fimi::Money face = fimi::guarantee_face(terms);
    fimi::Money net = fimi::net_principal(terms);
    fimi::Money claim = fimi::secured_claim(terms);
    fimi::Money collateral = fimi::required_collateral(terms);
    fimi::Money market_low = fimi::apply_coefficient(net, fimi::Rational::of(3, 2));
    fimi::Money market_high = fimi::apply_coefficient(net, fimi::Rational::of(8, 5));

    fimi::DealOutcome repaid =
        fimi::evaluate_outcome(terms, fimi::DealScenario::full_repayment());
    fimi::DealScenario worst = cfg.default_scenario(terms);
    fimi::DealOutcome defaulted = fimi::evaluate_outcome(terms, worst);
    fimi::Money recovered = defaulted.fund_cash_in - defaulted.municipal_guarantee_draw;
    fimi::DealYieldBounds bounds = fimi::deal_yield_bounds(terms);

    if (as_json) {
        json j;
        j["principal"] = fimi::format_money(terms.principal);
        j["rate_percent"] = fimi::format_percent(terms.annual_rate);
        j["guarantee_percent"] = fimi::format_percent(terms.guarantee_fraction);
        j["sector"] = terms.sector;
        j["interest"] = fimi::format_money(interest);
        j["total_repayment"] = fimi::format_money(repayment);
        j["guarantee_face"] = fimi::format_money(face);
        j["net_principal"] = fimi::format_money(net);
        j["secured_claim"] = fimi::format_money(claim);
        j["required_collateral"] = fimi::format_money(collateral);
        j["market_collateral_low"] = fimi::format_money(market_low);
        j["market_collateral_high"] = fimi::format_money(market_high);
        j["full_repayment"] = outcome_json(repaid);
        json d = outcome_json(defaulted);
        d["collateral_value"] = fimi::format_money(worst.collateral_value);
        d["recovery_percent"] = fimi::format_percent(worst.recovery_fraction);
        d["recovered"] = fimi::format_money(recovered);
        j["default"] = d;
        j["yield_bounds"] = {
            {"net_exposure", {fimi::format_percent(bounds.net_exposure.lower),
                              fimi::format_percent(bounds.net_exposure.upper)}},
            {"on_principal", {fimi::format_percent(bounds.on_principal.lower),
                              fimi::format_percent(bounds.on_principal.upper)}}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    std::string s = "deal\n";
    s += pad("principal") + fimi::format_money(terms.principal) + "\n";
    s += pad("rate") + pct(terms.annual_rate) + "\n";
    s += pad("guarantee fraction") + pct(terms.guarantee_fraction) + "\n";
    s += pad("sector") + terms.sector + "\n";
    s += pad("interest") + fimi::format_money(interest) + "\n";
    s += pad("total repayment") + fimi::format_money(repayment) + "\n";
    s += pad("guarantee face") + fimi::format_money(face) + "\n";
    s += pad("net principal") + fimi::format_money(net) + "\n";
    s += pad("secured claim") + fimi::format_money(claim) + "\n";
    s += pad("required collateral") + fimi::format_money(collateral) + "\n";
    s += pad("market collateral 1.5/1.6") + fimi::format_money(market_low) + " .. " +
         fimi::format_money(market_high) + "\n";
    s += "scenario: full repayment\n";
    outcome_text(s, repaid);
    s += "scenario: default, collateral " + fimi::format_money(worst.collateral_value) +
         ", recovery " + pct(worst.recovery_fraction) + "\n";
    s += pad("recovered") + fimi::format_money(recovered) + "\n";
    outcome_text(s, defaulted);
    s += "yield bounds\n";
    s += pad("net exposure convention") + "[" + pct(bounds.net_exposure.lower) + ", " +
         pct(bounds.net_exposure.upper) + "]\n";
    s += pad("on principal convention") + "[" + pct(bounds.on_principal.lower) + ", " +
         pct(bounds.on_principal.upper) + "]\n";
    std::cout << s;
    return 0;
}

// ---------------------------------------------------------------------------
// portfolio
// ---------------------------------------------------------------------------

int cmd_portfolio(const fimi::ScenarioConfig& cfg, bool as_json) {
    fimi::Rate rate = cfg.rate ? *cfg.rate
                               : throw fimi::parse_error("config: missing required key "
                                                         "'rate_percent'");
    fimi::Fraction pp = cfg.guarantee
                            ? *cfg.guarantee
                            : throw fimi::parse_error("config: missing required key "
                                                      "'guarantee_percent'");
    fimi::Fraction share = cfg.portfolio_default_share();

    fimi::Fraction x0 = fimi::break_even_default(rate);
    fimi::Fraction xcr = fimi::critical_default(rate, pp);
    fimi::Rate at_share = fimi::portfolio_yield(share, rate);
    fimi::Rate loss_cap = -fimi::Rate::from_rational(pp.value());
    fimi::Rate net_upper =
        fimi::Rate::from_rational(rate.value() / pp.complement().value());

    if (as_json) {
        json j;
        j["rate_percent"] = fimi::format_percent(rate);
        j["guarantee_percent"] = fimi::format_percent(pp);
        j["break_even_default_percent"] = fimi::format_percent(x0);
        j["critical_default_percent"] = fimi::format_percent(xcr);
        j["default_share_percent"] = fimi::format_percent(share);
        j["yield_at_share_percent"] = fimi::format_percent(at_share);
        j["yield_bounds"] = {{"net_exposure",
                              {fimi::format_percent(loss_cap), fimi::format_percent(net_upper)}},
                             {"on_principal",
                              {fimi::format_percent(loss_cap), fimi::format_percent(rate)}}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    std::string s = "portfolio\n";
    s += pad("rate") + pct(rate) + "\n";
    s += pad("guarantee fraction") + pct(pp) + "\n";
    s += pad("break-even default") + pct(x0) + "\n";
    s += pad("critical default") + pct(xcr) + "\n";
    s += pad("default share") + pct(share) + "\n";
    s += pad("yield at share") + pct(at_share) + "\n";
    s += pad("net exposure convention") + "[" + pct(loss_cap) + ", " + pct(net_upper) + "]\n";
    s += pad("on principal convention") + "[" + pct(loss_cap) + ", " + pct(rate) + "]\n";
    std::cout << s;
    return 0;
}

// ---------------------------------------------------------------------------
// solve-rate
// ---------------------------------------------------------------------------

int cmd_solve_rate(const std::string& forecast_text, const std::string& target_text,
                   bool as_json) {
    fimi::Rational forecast = fimi::parse_percent(forecast_text);
    if (forecast.is_negative() || forecast >= fimi::Rational(1))
        throw fimi::parse_error("forecast default share must lie in [0, 100)");
    fimi::Fraction share = fimi::Fraction::from_rational(forecast);
    fimi::Rate target = fimi::Rate::from_rational(fimi::parse_percent(target_text));

    fimi::Rate solved = fimi::solve_rate(share, target);
    fimi::Rate verified = fimi::portfolio_yield(share, solved);

    if (as_json) {
        json j;
        j["forecast_default_percent"] = fimi::format_percent(share);
        j["target_yield_percent"] = fimi::format_percent(target);
        j["rate_percent"] = fimi::format_percent(solved);
        j["verified_yield_percent"] = fimi::format_percent(verified);
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::string s = "solve-rate\n";
    s += pad("forecast default") + pct(share) + "\n";
    s += pad("target yield") + pct(target) + "\n";
    s += pad("solved rate") + pct(solved) + "\n";
    s += pad("verified yield") + pct(verified) + "\n";
    std::cout << s;
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const fimi::ScenarioConfig& cfg, const std::optional<std::string>& book_path,
                 std::optional<std::uint64_t> seed_override, bool as_json) {
    fimi::SimReport rep;
    if (book_path) {
        std::vector<fimi::LoanBookRow> rows = fimi::parse_loan_book(read_file(*book_path));
        if (rows.empty())
            throw fimi::parse_error("loan book: no loans");
        std::vector<fimi::SimLoan> loans = fimi::to_sim_loans(
            rows, cfg.recovery_model.value_or(fimi::RecoveryModel::Kind::ZeroRecovery),
            cfg.recovery.value_or(fimi::Fraction::one()));
        fimi::Fraction p = cfg.portfolio_default_share();
        if (!cfg.trials)
            throw fimi::parse_error("config: missing required key 'trials'");
        std::uint64_t seed = seed_override.value_or(cfg.seed.value_or(0));
        rep = fimi::run_sim(loans, p, *cfg.trials, seed);
    } else {
        fimi::SimConfig sim = cfg.sim_config();
        if (seed_override)
            sim.seed = *seed_override;
        rep = fimi::run_sim(sim);
    }

    if (as_json) {
        json j;
        j["mean_fund_yield_bp"] = bp(rep.mean_fund_yield);
        j["mean_consolidated_yield_bp"] = bp(rep.mean_consolidated_yield);
        j["std_error_bp"] = bp(rep.std_error);
        json q;
        for (std::size_t i = 0; i < rep.quantile_levels.size(); ++i) {
            std::string key = "p" + std::string(rep.quantile_levels[i] < 10 ? "0" : "") +
                              std::to_string(rep.quantile_levels[i]);
            q[key] = bp(rep.quantiles[i]);
        }
        j["quantiles_bp"] = q;
        j["municipal_loss_bp"] = bp(rep.mean_municipal_loss);
        j["loss_cap_bp"] = bp(fimi::Rate::from_rational(rep.loss_cap.value()));
        j["trials_below_cap"] = rep.trials_below_cap;
        j["trials"] = rep.trials;
        j["n_loans"] = rep.n_loans;
        j["seed"] = rep.seed;
        j["config_digest"] = rep.config_digest;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    std::string s = "simulation\n";
    s += pad("loans") + std::to_string(rep.n_loans) + "\n";
    s += pad("trials") + std::to_string(rep.trials) + "\n";
    s += pad("seed") + std::to_string(rep.seed) + "\n";
    s += pad("config digest") + rep.config_digest + "\n";
    s += pad("mean fund yield") + pct(rep.mean_fund_yield) + "\n";
    s += pad("mean consolidated yield") + pct(rep.mean_consolidated_yield) + "\n";
    s += pad("std error") + pct(rep.std_error) + "\n";
    s += pad("mean municipal loss") + pct(rep.mean_municipal_loss) + "\n";
    s += pad("loss cap") + pct(rep.loss_cap) + "\n";
    s += pad("trials below loss cap") + std::to_string(rep.trials_below_cap) + " of " +
         std::to_string(rep.trials) + "\n";
    s += "consolidated yield quantiles\n";
    for (std::size_t i = 0; i < rep.quantile_levels.size(); ++i) {
        std::string label = "p" + std::string(rep.quantile_levels[i] < 10 ? "0" : "") +
                            std::to_string(rep.quantile_levels[i]);
        s += pad(label) + pct(rep.quantiles[i]) + "\n";
    }
    std::cout << s;
    return 0;
}

// ---------------------------------------------------------------------------
// ledger
// ---------------------------------------------------------------------------

void account_report(const fimi::VekselLedger& ledger, bool as_json) {
    const fimi::FundAccount& a = ledger.account();
    if (as_json) {
        json j;
        j["events"] = ledger.events().size();
        j["program_allocation"] = fimi::format_money(a.program_allocation);
        j["cash"] = fimi::format_money(a.cash);
        j["notes_outstanding"] = fimi::format_money(a.notes_outstanding);
        j["guarantee_capacity"] = fimi::format_money(a.guarantee_capacity());
        j["interest_income"] = fimi::format_money(a.interest_income);
        j["guarantee_losses"] = fimi::format_money(a.guarantee_losses);
        j["notes_returned"] = fimi::format_money(a.notes_returned);
        j["total_issued"] = fimi::format_money(a.total_issued);
        j["disbursed_principal"] = fimi::format_money(a.disbursed_principal);
        json n;
        n["issued"] = ledger.note_count(fimi::NoteState::Issued);
        n["pledged"] = ledger.note_count(fimi::NoteState::Pledged);
        n["returned"] = ledger.note_count(fimi::NoteState::Returned);
        n["presented"] = ledger.note_count(fimi::NoteState::Presented);
        j["notes"] = n;
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::string s = "ledger account\n";
    s += pad("events") + std::to_string(ledger.events().size()) + "\n";
    s += pad("program allocation") + fimi::format_money(a.program_allocation) + "\n";
    s += pad("cash") + fimi::format_money(a.cash) + "\n";
    s += pad("notes outstanding") + fimi::format_money(a.notes_outstanding) + "\n";
    s += pad("guarantee capacity") + fimi::format_money(a.guarantee_capacity()) + "\n";
    s += pad("interest income") + fimi::format_money(a.interest_income) + "\n";
    s += pad("guarantee losses") + fimi::format_money(a.guarantee_losses) + "\n";
    s += pad("notes returned") + fimi::format_money(a.notes_returned) + "\n";
    s += pad("total notes issued") + fimi::format_money(a.total_issued) + "\n";
    s += pad("disbursed principal") + fimi::format_money(a.disbursed_principal) + "\n";
    for (fimi::NoteState st : {fimi::NoteState::Issued, fimi::NoteState::Pledged,
                               fimi::NoteState::Returned, fimi::NoteState::Presented}) {
        s += pad(std::string("notes ") + fimi::to_string(st)) +
             std::to_string(ledger.note_count(st)) + " (" +
             fimi::format_money(ledger.note_face(st)) + ")\n";
    }
    std::cout << s;
}

int cmd_ledger_replay(const std::string& path, bool as_json) {
    std::vector<fimi::LedgerEvent> events = fimi::VekselLedger::parse(read_file(path));
    fimi::VekselLedger ledger = fimi::VekselLedger::replay(events);
    account_report(ledger, as_json);
    return 0;
}

int cmd_ledger_apply(const std::string& path, const std::vector<std::string>& event_texts,
                     bool as_json) {
    std::string existing;
    {
        std::ifstream in(path, std::ios::binary);
        if (in) {
            std::ostringstream buf;
            buf << in.rdbuf();
            existing = buf.str();
        }
    }
    std::vector<fimi::LedgerEvent> events = fimi::VekselLedger::parse(existing);
    fimi::VekselLedger ledger = fimi::VekselLedger::replay(events);
    for (const std::string& text : event_texts) {
        std::uint64_t seq = ledger.events().size() + 1;
        fimi::LedgerEvent ev =
            fimi::VekselLedger::parse_event(std::to_string(seq) + " " + text);
        ledger.apply(ev);
    }
    write_file(path, ledger.serialize());
    account_report(ledger, as_json);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Municipal microloan guarantee fund toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string format = "text";
    std::string forecast_text;
    std::string target_text;
    std::string book_path;
    std::string ledger_path;
    std::vector<std::string> event_texts;
    std::uint64_t seed_value = 0;

    auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", format, "Output format")
            ->check(CLI::IsMember({"text", "json"}))
            ->capture_default_str();
    };

    CLI::App* deal = app.add_subcommand("deal", "Single-loan outcome report");
    deal->add_option("--config", config_path, "Scenario config file")->required();
    add_format(deal);

    CLI::App* portfolio = app.add_subcommand("portfolio", "Break-even and critical thresholds");
    portfolio->add_option("--config", config_path, "Scenario config file")->required();
    add_format(portfolio);

    CLI::App* solve = app.add_subcommand("solve-rate", "Rate for a target yield at a forecast "
                                                       "default share");
    solve->add_option("--forecast-default", forecast_text,
                      "Forecast default share, percent")
        ->required();
    solve->add_option("--target-yield", target_text, "Target portfolio yield, percent")
        ->required();
    add_format(solve);

    CLI::App* simulate = app.add_subcommand("simulate", "Seeded Monte Carlo portfolio run");
    simulate->add_option("--config", config_path, "Scenario config file")->required();
    simulate->add_option("--book", book_path, "Loan-book CSV overriding the homogeneous book");
    CLI::Option* seed_opt = simulate->add_option("--seed", seed_value, "Seed override");
    add_format(simulate);

    CLI::App* ledger = app.add_subcommand("ledger", "Promissory-note ledger");
    ledger->require_subcommand(1);
    CLI::App* replay = ledger->add_subcommand("replay", "Rebuild the account from a log");
    replay->add_option("--file", ledger_path, "Ledger file")->required();
    add_format(replay);
    CLI::App* apply = ledger->add_subcommand("apply", "Validate and append events");
    apply->add_option("--file", ledger_path, "Ledger file")->required();
    apply->add_option("--event", event_texts, "Event line without seq, e.g. 'allocate 55000000'")
        ->required();
    add_format(apply);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_VALIDATION;
    }

    bool as_json = format == "json";
    try {
        if (deal->parsed())
            return cmd_deal(fimi::parse_scenario_config(read_file(config_path)), as_json);
        if (portfolio->parsed())
            return cmd_portfolio(fimi::parse_scenario_config(read_file(config_path)), as_json);
        if (solve->parsed())
            return cmd_solve_rate(forecast_text, target_text, as_json);
        if (simulate->parsed()) {
            std::optional<std::string> book;
            if (!book_path.empty())
                book = book_path;
            std::optional<std::uint64_t> seed;
            if (seed_opt->count() > 0)
                seed = seed_value;
            return cmd_simulate(fimi::parse_scenario_config(read_file(config_path)), book, seed,
                                as_json);
        }
        if (replay->parsed())
            return cmd_ledger_replay(ledger_path, as_json);
        if (apply->parsed())
            return cmd_ledger_apply(ledger_path, event_texts, as_json);
    } catch (const fimi::infeasible_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_INFEASIBLE;
    } catch (const fimi::ledger_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_LEDGER;
    } catch (const fimi::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_VALIDATION;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
