#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fimi/deal.hpp"
#include "fimi/errors.hpp"
#include "fimi/money.hpp"

namespace fimi {

// ---------------------------------------------------------------------------
// Event-sourced registry of municipal promissory notes and the fund's cash.
//
// The append-only event log is the single source of truth; every balance is
// derived by replay and re-derivable bit for bit. Ledger file format, one
// event per line, single spaces, each line newline-terminated, amounts in
// integer kopecks, rates and fractions in integer parts per million:
//
//   <seq> allocate <amount>
//   <seq> issue <total> <denomination>
//   <seq> pledge <loan_id> <principal> <rate_ppm> <guarantee_ppm>
//   <seq> disburse <loan_id> <principal> <rate_ppm>
//   <seq> repay <loan_id>
//   <seq> default <loan_id> <recovered>
//
// seq is gapless from 1. A disburse is a pledge with no guarantee: loans
// with a zero guarantee fraction move cash but no notes. Parsing followed by
// serialization reproduces a canonical file byte for byte.
// ---------------------------------------------------------------------------

enum class NoteState { Issued, Pledged, Returned, Presented };

inline const char* to_string(NoteState s) {
    switch (s) {
        case NoteState::Issued: return "issued";
        case NoteState::Pledged: return "pledged";
        case NoteState::Returned: return "returned";
        case NoteState::Presented: return "presented";
    }
    return "?";
}

/// A municipal promissory note, payable on presentation. Lifecycle:
/// Issued -> Pledged -> Returned (loan repaid, note retired) or
/// Issued -> Pledged -> Presented (loan defaulted, note offsets budget dues).
struct VekselNote {
    std::uint64_t id = 0;
    Money face_value;
    NoteState state = NoteState::Issued;
    std::string loan_id;               // set when pledged
    std::uint64_t issued_at = 0;       // seq of the issuing event
    std::uint64_t transitioned_at = 0; // seq of the last state change
};

struct AllocateEvent {
    Money amount;
};

struct IssueSeriesEvent {
    Money total;
    Money denomination;
};

struct PledgeEvent {
    std::string loan_id;
    Money principal;
    std::int64_t rate_ppm = 0;      // 150000 = 15%
    std::int64_t guarantee_ppm = 0; // 100000 = 10%, always > 0 here
};

struct DisburseEvent {
    std::string loan_id;
    Money principal;
    std::int64_t rate_ppm = 0;
};

struct RepayEvent {
    std::string loan_id;
};

struct DefaultEvent {
    std::string loan_id;
    Money recovered;
};

using EventPayload = std::variant<AllocateEvent, IssueSeriesEvent, PledgeEvent, DisburseEvent,
                                  RepayEvent, DefaultEvent>;

struct LedgerEvent {
    std::uint64_t seq = 0;
    EventPayload payload;
};

/// Derived balances of the fund. Never stored; always rebuilt from the log.
struct FundAccount {
    Money program_allocation; // budget money earmarked for the program
    Money cash;
    Money notes_outstanding; // face of Issued + Pledged notes
    Money interest_income;
    Money guarantee_losses;  // face of Presented notes
    Money notes_returned;    // face of Returned notes
    Money total_issued;      // face of every note ever issued
    Money disbursed_principal;

    /// Allocation headroom available for further note issuance. Restored in
    /// full once pledged notes come back and retire.
    Money guarantee_capacity() const { return program_allocation - notes_outstanding; }
};

class VekselLedger {
public:
    VekselLedger() = default;

    // -- command API: validate, append, apply ------------------------------

    void allocate(Money amount) {
        apply(LedgerEvent{next_seq(), AllocateEvent{amount}});
    }

    /// Issues total/denomination notes of equal face value. Capped by the
    /// unused allocation; the total must split into whole notes.
    std::vector<std::uint64_t> issue_series(Money total, Money denomination) {
        std::size_t first = notes_.size();
        apply(LedgerEvent{next_seq(), IssueSeriesEvent{total, denomination}});
        std::vector<std::uint64_t> ids;
        for (std::size_t i = first; i < notes_.size(); ++i)
            ids.push_back(notes_[i].id);
        return ids;
    }

    /// Books a loan: pledges issued notes covering guarantee_face(terms)
    /// exactly (lowest note id first) and disburses the principal. A loan
    /// with no guarantee disburses without touching notes.
    std::vector<std::uint64_t> pledge(const std::string& loan_id, const LoanTerms& terms) {
        validate(terms);
        std::int64_t rate_ppm = to_ppm(terms.annual_rate.value(), "lending rate");
        if (terms.guarantee_fraction == Fraction::zero()) {
            apply(LedgerEvent{next_seq(), DisburseEvent{loan_id, terms.principal, rate_ppm}});
            return {};
        }
        std::int64_t pp_ppm = to_ppm(terms.guarantee_fraction.value(), "guarantee fraction");
        apply(LedgerEvent{next_seq(),
                          PledgeEvent{loan_id, terms.principal, rate_ppm, pp_ppm}});
        return active_.at(loan_id).note_ids;
    }

    /// Settles a booked loan with a deal outcome. Repayment returns the
    /// pledged notes and books the interest; default presents them and books
    /// only the recovered cash. A loan settles exactly once.
    void settle(const std::string& loan_id, const DealOutcome& outcome) {
        auto it = active_.find(loan_id);
        if (it == active_.end())
            throw domain_error("settle: loan '" + loan_id + "' is not active");
        const ActiveLoan& loan = it->second;
        if (outcome.scenario == ScenarioKind::FullRepayment) {
            Money expected = loan.principal + loan_interest(loan);
            if (outcome.fund_cash_in != expected)
                throw domain_error("settle: outcome cash " + format_money(outcome.fund_cash_in) +
                                   " does not match booked repayment " + format_money(expected));
            apply(LedgerEvent{next_seq(), RepayEvent{loan_id}});
            return;
        }
        if (outcome.municipal_guarantee_draw != loan.face)
            throw domain_error("settle: outcome draw " +
                               format_money(outcome.municipal_guarantee_draw) +
                               " does not match pledged face " + format_money(loan.face));
        Money recovered = outcome.fund_cash_in - outcome.municipal_guarantee_draw;
        apply(LedgerEvent{next_seq(), DefaultEvent{loan_id, recovered}});
    }

    // -- event application --------------------------------------------------

    /// Validates and applies one event. seq must be exactly the next one.
    /// Conservation is re-checked from scratch after every event.
    void apply(const LedgerEvent& ev) {
        if (ev.seq != next_seq())
            throw ledger_error("expected seq " + std::to_string(next_seq()), ev.seq);
        std::visit([&](const auto& payload) { apply_payload(ev.seq, payload); }, ev.payload);
        events_.push_back(ev);
        check_conservation(ev.seq);
    }

    static VekselLedger replay(std::span<const LedgerEvent> events) {
        VekselLedger l;
        for (const LedgerEvent& ev : events)
            l.apply(ev);
        return l;
    }

    // -- accessors -----------------------------------------------------------

    const FundAccount& account() const noexcept { return acct_; }
    const std::vector<LedgerEvent>& events() const noexcept { return events_; }
    const std::vector<VekselNote>& notes() const noexcept { return notes_; }

    std::size_t note_count(NoteState s) const {
        std::size_t n = 0;
        for (const VekselNote& note : notes_)
            if (note.state == s)
                ++n;
        return n;
    }

    Money note_face(NoteState s) const {
        Money sum;
        for (const VekselNote& note : notes_)
            if (note.state == s)
                sum += note.face_value;
        return sum;
    }

    bool loan_active(const std::string& loan_id) const { return active_.count(loan_id) != 0; }

    // -- serialization -------------------------------------------------------

    static std::string format_event(const LedgerEvent& ev) {
        std::string line = std::to_string(ev.seq);
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, AllocateEvent>) {
                    line += " allocate " + std::to_string(p.amount.kopecks);
                } else if constexpr (std::is_same_v<T, IssueSeriesEvent>) {
                    line += " issue " + std::to_string(p.total.kopecks) + " " +
                            std::to_string(p.denomination.kopecks);
                } else if constexpr (std::is_same_v<T, PledgeEvent>) {
                    line += " pledge " + p.loan_id + " " + std::to_string(p.principal.kopecks) +
                            " " + std::to_string(p.rate_ppm) + " " +
                            std::to_string(p.guarantee_ppm);
                } else if constexpr (std::is_same_v<T, DisburseEvent>) {
                    line += " disburse " + p.loan_id + " " + std::to_string(p.principal.kopecks) +
                            " " + std::to_string(p.rate_ppm);
                } else if constexpr (std::is_same_v<T, RepayEvent>) {
                    line += " repay " + p.loan_id;
                } else {
                    line += " default " + p.loan_id + " " + std::to_string(p.recovered.kopecks);
                }
            },
            ev.payload);
        line += '\n';
        return line;
    }

    static std::string serialize(std::span<const LedgerEvent> events) {
        std::string out;
        for (const LedgerEvent& ev : events)
            out += format_event(ev);
        return out;
    }

    std::string serialize() const { return serialize(events_); }

    /// Parses a canonical ledger file. Purely syntactic; gap and transition
    /// checks happen on replay. Throws parse_error with line and column.
    static std::vector<LedgerEvent> parse(std::string_view text) {
        std::vector<LedgerEvent> events;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t eol = text.find('\n', pos);
            std::string_view line =
                text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                               : eol - pos);
            ++line_no;
            events.push_back(parse_event(line, line_no));
            if (eol == std::string_view::npos)
                break;
            pos = eol + 1;
        }
        return events;
    }

    static LedgerEvent parse_event(std::string_view line, std::size_t line_no = 0) {
        Tokenizer tok{line, line_no};
        std::uint64_t seq = tok.next_u64("seq");
        std::string_view kind = tok.next("event kind");
        LedgerEvent ev;
        ev.seq = seq;
        if (kind == "allocate") {
            ev.payload = AllocateEvent{Money{tok.next_i64("amount")}};
        } else if (kind == "issue") {
            Money total{tok.next_i64("total")};
            Money denom{tok.next_i64("denomination")};
            ev.payload = IssueSeriesEvent{total, denom};
        } else if (kind == "pledge") {
            PledgeEvent p;
            p.loan_id = tok.next_loan_id();
            p.principal = Money{tok.next_i64("principal")};
            p.rate_ppm = tok.next_i64("rate_ppm");
            p.guarantee_ppm = tok.next_i64("guarantee_ppm");
            ev.payload = std::move(p);
        } else if (kind == "disburse") {
            DisburseEvent p;
            p.loan_id = tok.next_loan_id();
            p.principal = Money{tok.next_i64("principal")};
            p.rate_ppm = tok.next_i64("rate_ppm");
            ev.payload = std::move(p);
        } else if (kind == "repay") {
            ev.payload = RepayEvent{tok.next_loan_id()};
        } else if (kind == "default") {
            DefaultEvent p;
            p.loan_id = tok.next_loan_id();
            p.recovered = Money{tok.next_i64("recovered")};
            ev.payload = std::move(p);
        } else {
            throw parse_error("ledger: unknown event kind '" + std::string(kind) + "'", line_no,
                              tok.last_column());
        }
        tok.finish();
        return ev;
    }

private:
    struct ActiveLoan {
        Money principal;
        std::int64_t rate_ppm = 0;
        Money face;
        std::vector<std::uint64_t> note_ids;
    };

    std::uint64_t next_seq() const noexcept {
        return static_cast<std::uint64_t>(events_.size()) + 1;
    }

    static std::int64_t to_ppm(const Rational& v, const char* what) {
        Rational scaled = v * Rational(1'000'000);
        if (!scaled.is_integer())
            throw domain_error(std::string("ledger: ") + what +
                               " is finer than the 1 ppm ledger resolution");
        return scaled.num();
    }

    Money loan_interest(const ActiveLoan& loan) const {
        return apply_rate(loan.principal, Rate::from_rational(Rational::of(loan.rate_ppm, 1'000'000)));
    }

    // -- per-kind application ------------------------------------------------

    void apply_payload(std::uint64_t seq, const AllocateEvent& p) {
        if (p.amount.kopecks <= 0)
            throw ledger_error("allocate: amount must be positive", seq);
        acct_.program_allocation += p.amount;
        acct_.cash += p.amount;
    }

    void apply_payload(std::uint64_t seq, const IssueSeriesEvent& p) {
        if (p.total.is_negative())
            throw ledger_error("issue: negative total", seq);
        if (p.total.is_zero())
            return; // empty series
        if (p.denomination.kopecks <= 0)
            throw ledger_error("issue: denomination must be positive", seq);
        if (p.total.kopecks % p.denomination.kopecks != 0)
            throw ledger_error("issue: denomination does not divide the total", seq);
        if (p.total > acct_.guarantee_capacity())
            throw ledger_error("issue: total " + format_money(p.total) +
                                   " exceeds free allocation " +
                                   format_money(acct_.guarantee_capacity()),
                               seq);
        std::int64_t count = p.total.kopecks / p.denomination.kopecks;
        for (std::int64_t i = 0; i < count; ++i) {
            VekselNote note;
            note.id = next_note_id_++;
            note.face_value = p.denomination;
            note.state = NoteState::Issued;
            note.issued_at = seq;
            note.transitioned_at = seq;
            notes_.push_back(std::move(note));
        }
        acct_.notes_outstanding += p.total;
        acct_.total_issued += p.total;
    }

    void apply_payload(std::uint64_t seq, const PledgeEvent& p) {
        require_new_loan(seq, p.loan_id);
        if (p.principal.kopecks <= 0)
            throw ledger_error("pledge: principal must be positive", seq);
        if (p.rate_ppm < 0)
            throw ledger_error("pledge: negative rate", seq);
        if (p.guarantee_ppm <= 0 || p.guarantee_ppm >= 1'000'000)
            throw ledger_error("pledge: guarantee must be inside (0%, 100%); "
                               "use disburse for unguaranteed loans",
                               seq);
        if (acct_.cash < p.principal)
            throw ledger_error("pledge: cash " + format_money(acct_.cash) +
                                   " cannot disburse " + format_money(p.principal),
                               seq);
        Money face = apply_fraction(p.principal, Fraction::from_ppm(p.guarantee_ppm));

        // Deterministic exact cover: walk Issued notes by ascending id,
        // skipping any note that would overshoot the target face.
        std::vector<std::size_t> picked;
        Money sum;
        for (std::size_t i = 0; i < notes_.size() && sum < face; ++i) {
            if (notes_[i].state != NoteState::Issued)
                continue;
            if (sum + notes_[i].face_value > face)
                continue;
            picked.push_back(i);
            sum += notes_[i].face_value;
        }
        if (sum != face)
            throw ledger_error("pledge: issued notes cannot cover a face of " +
                                   format_money(face) + " exactly",
                               seq);

        ActiveLoan loan;
        loan.principal = p.principal;
        loan.rate_ppm = p.rate_ppm;
        loan.face = face;
        for (std::size_t i : picked) {
            notes_[i].state = NoteState::Pledged;
            notes_[i].loan_id = p.loan_id;
            notes_[i].transitioned_at = seq;
            loan.note_ids.push_back(notes_[i].id);
        }
        acct_.cash -= p.principal;
        acct_.disbursed_principal += p.principal;
        ever_pledged_ += face;
        active_.emplace(p.loan_id, std::move(loan));
    }

    void apply_payload(std::uint64_t seq, const DisburseEvent& p) {
        require_new_loan(seq, p.loan_id);
        if (p.principal.kopecks <= 0)
            throw ledger_error("disburse: principal must be positive", seq);
        if (p.rate_ppm < 0)
            throw ledger_error("disburse: negative rate", seq);
        if (acct_.cash < p.principal)
            throw ledger_error("disburse: cash " + format_money(acct_.cash) +
                                   " cannot disburse " + format_money(p.principal),
                               seq);
        acct_.cash -= p.principal;
        acct_.disbursed_principal += p.principal;
        active_.emplace(p.loan_id, ActiveLoan{p.principal, p.rate_ppm, Money{}, {}});
    }

    void apply_payload(std::uint64_t seq, const RepayEvent& p) {
        ActiveLoan loan = take_active(seq, p.loan_id);
        Money interest = loan_interest(loan);
        acct_.cash += loan.principal + interest;
        acct_.interest_income += interest;
        transition_notes(seq, loan, NoteState::Returned);
        acct_.notes_returned += loan.face;
        acct_.notes_outstanding -= loan.face;
    }

    void apply_payload(std::uint64_t seq, const DefaultEvent& p) {
        auto it = active_.find(p.loan_id);
        if (it == active_.end())
            throw ledger_error(loan_error(p.loan_id), seq);
        if (p.recovered.is_negative())
            throw ledger_error("default: negative recovery", seq);
        Money claim = it->second.principal - it->second.face + loan_interest(it->second);
        if (p.recovered > claim)
            throw ledger_error("default: recovered " + format_money(p.recovered) +
                                   " exceeds the secured claim " + format_money(claim),
                               seq);
        ActiveLoan loan = take_active(seq, p.loan_id);
        acct_.cash += p.recovered;
        transition_notes(seq, loan, NoteState::Presented);
        acct_.guarantee_losses += loan.face;
        acct_.notes_outstanding -= loan.face;
    }

    void require_new_loan(std::uint64_t seq, const std::string& loan_id) {
        if (!valid_loan_id(loan_id))
            throw ledger_error("invalid loan id '" + loan_id + "'", seq);
        if (active_.count(loan_id) || settled_.count(loan_id))
            throw ledger_error("loan '" + loan_id + "' already booked", seq);
    }

    std::string loan_error(const std::string& loan_id) const {
        if (settled_.count(loan_id))
            return "loan '" + loan_id + "' already settled";
        return "loan '" + loan_id + "' is unknown";
    }

    ActiveLoan take_active(std::uint64_t seq, const std::string& loan_id) {
        auto it = active_.find(loan_id);
        if (it == active_.end())
            throw ledger_error(loan_error(loan_id), seq);
        ActiveLoan loan = std::move(it->second);
        active_.erase(it);
        settled_.insert(loan_id);
        return loan;
    }

    void transition_notes(std::uint64_t seq, const ActiveLoan& loan, NoteState target) {
        for (std::uint64_t id : loan.note_ids) {
            VekselNote& note = notes_[static_cast<std::size_t>(id - 1)];
            note.state = target;
            note.transitioned_at = seq;
        }
    }

    /// Full recount of every note against the aggregate balances.
    void check_conservation(std::uint64_t seq) const {
        Money issued, pledged, returned, presented;
        for (const VekselNote& note : notes_) {
            switch (note.state) {
                case NoteState::Issued: issued += note.face_value; break;
                case NoteState::Pledged: pledged += note.face_value; break;
                case NoteState::Returned: returned += note.face_value; break;
                case NoteState::Presented: presented += note.face_value; break;
            }
        }
        if (issued + pledged != acct_.notes_outstanding)
            throw ledger_error("conservation: outstanding face mismatch", seq);
        if (returned != acct_.notes_returned)
            throw ledger_error("conservation: returned face mismatch", seq);
        if (presented != acct_.guarantee_losses)
            throw ledger_error("conservation: presented face mismatch", seq);
        if (acct_.notes_outstanding + acct_.notes_returned + acct_.guarantee_losses !=
            acct_.total_issued)
            throw ledger_error("conservation: issuance total mismatch", seq);
        if (acct_.cash.is_negative())
            throw ledger_error("conservation: negative cash", seq);
        if (acct_.notes_outstanding > acct_.program_allocation)
            throw ledger_error("conservation: outstanding notes exceed the allocation", seq);
        if (acct_.guarantee_losses > ever_pledged_)
            throw ledger_error("conservation: losses exceed notes ever pledged", seq);
    }

    static bool valid_loan_id(std::string_view id) {
        if (id.empty())
            return false;
        for (char c : id) {
            bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
            if (!ok)
                return false;
        }
        return true;
    }

    // Strict single-space tokenizer for ledger lines.
    struct Tokenizer {
        std::string_view line;
        std::size_t line_no;
        std::size_t pos = 0;
        std::size_t token_start = 0;

        std::size_t last_column() const { return token_start + 1; }

        std::string_view next(const char* what) {
            if (pos > 0) {
                if (pos >= line.size() || line[pos] != ' ')
                    throw parse_error("ledger: missing " + std::string(what), line_no, pos + 1);
                ++pos;
            }
            token_start = pos;
            std::size_t end = line.find(' ', pos);
            if (end == std::string_view::npos)
                end = line.size();
            if (end == pos)
                throw parse_error("ledger: missing " + std::string(what), line_no, pos + 1);
            std::string_view token = line.substr(pos, end - pos);
            pos = end;
            return token;
        }

        std::uint64_t next_u64(const char* what) {
            std::string_view t = next(what);
            std::uint64_t v = 0;
            for (char c : t) {
                if (c < '0' || c > '9')
                    throw parse_error("ledger: " + std::string(what) + " is not a number",
                                      line_no, last_column());
                if (v > (UINT64_MAX - static_cast<unsigned>(c - '0')) / 10)
                    throw parse_error("ledger: " + std::string(what) + " out of range", line_no,
                                      last_column());
                v = v * 10 + static_cast<unsigned>(c - '0');
            }
            return v;
        }

        std::int64_t next_i64(const char* what) {
            std::uint64_t v = next_u64(what);
            if (v > static_cast<std::uint64_t>(INT64_MAX))
                throw parse_error("ledger: " + std::string(what) + " out of range", line_no,
                                  last_column());
            return static_cast<std::int64_t>(v);
        }

        std::string next_loan_id() {
            std::string_view t = next("loan id");
            if (!valid_loan_id(t))
                throw parse_error("ledger: invalid loan id '" + std::string(t) + "'", line_no,
                                  last_column());
            return std::string(t);
        }

        void finish() const {
            if (pos != line.size())
                throw parse_error("ledger: trailing characters", line_no, pos + 1);
        }
    };

    std::vector<LedgerEvent> events_;
    std::vector<VekselNote> notes_;
    std::map<std::string, ActiveLoan> active_;
    std::set<std::string> settled_;
    FundAccount acct_;
    Money ever_pledged_;
    std::uint64_t next_note_id_ = 1;
};

} // namespace fimi
