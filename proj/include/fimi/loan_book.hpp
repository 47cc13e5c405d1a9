#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fimi/errors.hpp"
#include "fimi/simulate.hpp"

namespace fimi {

// Loan-book CSV. Mandatory header, integer kopecks for amounts so the file
// carries no rounding, one loan per line:
//
//   loan_id,principal_kopecks,rate_bp,guarantee_bp,collateral_value_kopecks,collateral_coeff_milli,sector
//
// parse -> serialize reproduces a valid file byte for byte.

inline constexpr std::string_view LOAN_BOOK_HEADER =
    "loan_id,principal_kopecks,rate_bp,guarantee_bp,collateral_value_kopecks,"
    "collateral_coeff_milli,sector";

struct LoanBookRow {
    std::string loan_id;
    std::int64_t principal_kopecks = 0;
    std::int64_t rate_bp = 0;
    std::int64_t guarantee_bp = 0;
    std::int64_t collateral_value_kopecks = 0;
    std::int64_t collateral_coeff_milli = 1000;
    std::string sector;

    LoanTerms terms() const {
        LoanTerms t;
        t.principal = Money{principal_kopecks};
        t.annual_rate = Rate::from_basis_points(rate_bp);
        t.guarantee_fraction = Fraction::from_basis_points(guarantee_bp);
        t.collateral_coefficient = Rational::of(collateral_coeff_milli, 1000);
        t.collateral_basis = CollateralBasis::PrincipalNetPlusInterest;
        t.sector = sector;
        return t;
    }
};

namespace detail {

inline const char* loan_book_column(std::size_t index) {
    static constexpr const char* names[] = {
        "loan_id",           "principal_kopecks",      "rate_bp", "guarantee_bp",
        "collateral_value_kopecks", "collateral_coeff_milli", "sector"};
    return names[index];
}

inline std::int64_t loan_book_number(std::string_view field, std::size_t row,
                                     std::size_t column) {
    if (field.empty())
        throw parse_error("loan book: row " + std::to_string(row) + ", column " +
                              loan_book_column(column) + ": empty value",
                          row, column + 1);
    std::int64_t v = 0;
    for (char c : field) {
        if (c < '0' || c > '9')
            throw parse_error("loan book: row " + std::to_string(row) + ", column " +
                                  loan_book_column(column) +
                                  ": expected a non-negative integer, got '" +
                                  std::string(field) + "'",
                              row, column + 1);
        if (v > (INT64_MAX - (c - '0')) / 10)
            throw parse_error("loan book: row " + std::to_string(row) + ", column " +
                                  loan_book_column(column) + ": value out of range",
                              row, column + 1);
        v = v * 10 + (c - '0');
    }
    return v;
}

} // namespace detail

inline std::vector<LoanBookRow> parse_loan_book(std::string_view text) {
    std::vector<LoanBookRow> rows;
    std::set<std::string, std::less<>> ids;
    std::size_t row_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        ++row_no;
        if (!line.empty() && line.back() == '\r')
            throw parse_error("loan book: row " + std::to_string(row_no) +
                                  ": carriage returns are not allowed",
                              row_no, line.size());
        if (!header_seen) {
            if (line != LOAN_BOOK_HEADER)
                throw parse_error("loan book: row 1: header must be '" +
                                      std::string(LOAN_BOOK_HEADER) + "'",
                                  1, 1);
            header_seen = true;
        } else if (line.empty()) {
            throw parse_error("loan book: row " + std::to_string(row_no) + ": empty row",
                              row_no, 1);
        } else {
            std::vector<std::string_view> fields;
            std::size_t f = 0;
            while (true) {
                std::size_t comma = line.find(',', f);
                if (comma == std::string_view::npos) {
                    fields.push_back(line.substr(f));
                    break;
                }
                fields.push_back(line.substr(f, comma - f));
                f = comma + 1;
            }
            if (fields.size() != 7)
                throw parse_error("loan book: row " + std::to_string(row_no) + ": expected 7 " +
                                      "columns, got " + std::to_string(fields.size()),
                                  row_no, 1);
            LoanBookRow row;
            row.loan_id = std::string(fields[0]);
            if (row.loan_id.empty())
                throw parse_error("loan book: row " + std::to_string(row_no) +
                                      ", column loan_id: empty value",
                                  row_no, 1);
            if (!ids.insert(row.loan_id).second)
                throw parse_error("loan book: row " + std::to_string(row_no) +
                                      ", column loan_id: duplicate id '" + row.loan_id + "'",
                                  row_no, 1);
            row.principal_kopecks = detail::loan_book_number(fields[1], row_no, 1);
            row.rate_bp = detail::loan_book_number(fields[2], row_no, 2);
            row.guarantee_bp = detail::loan_book_number(fields[3], row_no, 3);
            row.collateral_value_kopecks = detail::loan_book_number(fields[4], row_no, 4);
            row.collateral_coeff_milli = detail::loan_book_number(fields[5], row_no, 5);
            row.sector = std::string(fields[6]);
            rows.push_back(std::move(row));
        }
        if (eol == std::string_view::npos)
            break;
        pos = eol + 1;
    }
    if (!header_seen)
        throw parse_error("loan book: missing header row", 1, 1);
    return rows;
}

inline std::string serialize_loan_book(std::span<const LoanBookRow> rows) {
    std::string out{LOAN_BOOK_HEADER};
    out += '\n';
    for (const LoanBookRow& r : rows) {
        out += r.loan_id;
        out += ',';
        out += std::to_string(r.principal_kopecks);
        out += ',';
        out += std::to_string(r.rate_bp);
        out += ',';
        out += std::to_string(r.guarantee_bp);
        out += ',';
        out += std::to_string(r.collateral_value_kopecks);
        out += ',';
        out += std::to_string(r.collateral_coeff_milli);
        out += ',';
        out += r.sector;
        out += '\n';
    }
    return out;
}

/// Expands CSV rows into simulation loans. Zero recovery writes defaulted
/// exposures off; collateral recovery realizes each row's collateral value
/// at the given recovery share.
inline std::vector<SimLoan> to_sim_loans(std::span<const LoanBookRow> rows,
                                         RecoveryModel::Kind recovery_kind,
                                         Fraction recovery_fraction = Fraction::one()) {
    std::vector<SimLoan> loans;
    loans.reserve(rows.size());
    for (const LoanBookRow& r : rows) {
        SimLoan loan;
        loan.terms = r.terms();
        validate(loan.terms);
        loan.recovery = recovery_kind == RecoveryModel::Kind::ZeroRecovery
                            ? RecoveryModel::zero()
                            : RecoveryModel::collateral(Money{r.collateral_value_kopecks},
                                                        recovery_fraction);
        loans.push_back(std::move(loan));
    }
    return loans;
}

} // namespace fimi
