#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fimi {

/// Base class for every error thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation left the representable integer range.
class overflow_error : public error {
public:
    using error::error;
};

/// An argument violated a precondition (bad range, bad enum, bad state).
class domain_error : public error {
public:
    using error::error;
};

/// A rate target cannot be met with a non-negative lending rate.
class infeasible_error : public error {
public:
    using error::error;
};

/// Malformed text input. Carries 1-based line and column when known (0 = n/a).
class parse_error : public error {
public:
    parse_error(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : error(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_ = 0;
    std::size_t column_ = 0;
};

/// An event sequence violated a ledger invariant. Carries the offending seq.
class ledger_error : public error {
public:
    ledger_error(const std::string& what, std::uint64_t seq)
        : error("seq " + std::to_string(seq) + ": " + what), seq_(seq) {}

    std::uint64_t seq() const noexcept { return seq_; }

private:
    std::uint64_t seq_ = 0;
};

} // namespace fimi
