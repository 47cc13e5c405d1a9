#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "fimi/errors.hpp"
#include "fimi/rational.hpp"

namespace fimi {

/// An exact amount of money in integer kopecks (1 ruble = 100 kopecks).
///
/// There is no floating point anywhere on a money path. Every product of an
/// amount with a rate or fraction goes through an exact 128-bit rational
/// intermediate and is rounded to the kopeck half-up (ties away from zero).
/// Additive overflow past int64 throws overflow_error instead of wrapping.
struct Money {
    std::int64_t kopecks = 0;

    static constexpr Money from_kopecks(std::int64_t k) { return Money{k}; }

    static constexpr Money from_rubles(std::int64_t rubles) {
        if (rubles > INT64_MAX / 100 || rubles < INT64_MIN / 100)
            throw overflow_error("money: ruble amount out of range");
        return Money{rubles * 100};
    }

    constexpr bool is_zero() const noexcept { return kopecks == 0; }
    constexpr bool is_negative() const noexcept { return kopecks < 0; }

    friend constexpr Money operator+(Money a, Money b) {
        std::int64_t r = 0;
        if (__builtin_add_overflow(a.kopecks, b.kopecks, &r))
            throw overflow_error("money: addition overflow");
        return Money{r};
    }

    friend constexpr Money operator-(Money a, Money b) {
        std::int64_t r = 0;
        if (__builtin_sub_overflow(a.kopecks, b.kopecks, &r))
            throw overflow_error("money: subtraction overflow");
        return Money{r};
    }

    constexpr Money operator-() const {
        if (kopecks == INT64_MIN)
            throw overflow_error("money: negation overflow");
        return Money{-kopecks};
    }

    Money& operator+=(Money o) { return *this = *this + o; }
    Money& operator-=(Money o) { return *this = *this - o; }

    friend constexpr bool operator==(Money, Money) noexcept = default;
    friend constexpr auto operator<=>(Money, Money) noexcept = default;
};

/// An interest rate or yield as an exact dimensionless rational (0.15 = 15%).
/// Integral basis points (1 bp = 0.01%) are the canonical input form; computed
/// yields keep full rational precision. Yields may be negative, lending rates
/// are validated non-negative where they are used as such.
class Rate {
public:
    constexpr Rate() = default;

    static constexpr Rate from_basis_points(std::int64_t bp) {
        return Rate(Rational::of(bp, 10'000));
    }

    static constexpr Rate from_rational(const Rational& v) { return Rate(v); }

    static constexpr Rate zero() { return Rate(); }

    constexpr const Rational& value() const noexcept { return value_; }
    constexpr Rational basis_points() const { return value_ * Rational(10'000); }
    constexpr bool is_negative() const noexcept { return value_.is_negative(); }

    friend constexpr bool operator==(const Rate&, const Rate&) noexcept = default;
    friend constexpr auto operator<=>(const Rate& a, const Rate& b) noexcept {
        return a.value_ <=> b.value_;
    }

    friend constexpr Rate operator+(const Rate& a, const Rate& b) { return Rate(a.value_ + b.value_); }
    friend constexpr Rate operator-(const Rate& a, const Rate& b) { return Rate(a.value_ - b.value_); }
    constexpr Rate operator-() const { return Rate(-value_); }

private:
    explicit constexpr Rate(const Rational& v) : value_(v) {}
    Rational value_;
};

/// A share or probability as an exact rational in [0, 1]. Integral parts per
/// million are the canonical input form (100,000 ppm = 10%).
class Fraction {
public:
    constexpr Fraction() = default;

    static constexpr Fraction from_ppm(std::int64_t ppm) {
        return from_rational(Rational::of(ppm, 1'000'000));
    }

    static constexpr Fraction from_basis_points(std::int64_t bp) {
        return from_rational(Rational::of(bp, 10'000));
    }

    static constexpr Fraction from_rational(const Rational& v) {
        if (v.is_negative() || v > Rational(1))
            throw domain_error("fraction: value outside [0, 1]");
        return Fraction(v);
    }

    static constexpr Fraction zero() { return Fraction(); }
    static constexpr Fraction one() { return Fraction(Rational(1)); }

    constexpr const Rational& value() const noexcept { return value_; }
    constexpr Rational ppm() const { return value_ * Rational(1'000'000); }
    constexpr Fraction complement() const { return Fraction(Rational(1) - value_); }

    friend constexpr bool operator==(const Fraction&, const Fraction&) noexcept = default;
    friend constexpr auto operator<=>(const Fraction& a, const Fraction& b) noexcept {
        return a.value_ <=> b.value_;
    }

private:
    explicit constexpr Fraction(const Rational& v) : value_(v) {}
    Rational value_;
};

namespace detail {

// m * (num/den) rounded to the kopeck, ties away from zero. 128-bit exact.
constexpr Money scale_money(Money m, std::int64_t num, std::int64_t den) {
    int128 n = static_cast<int128>(m.kopecks) * num;
    int128 q = n / den;
    int128 r = n % den;
    if (r != 0 && 2 * uabs128(r) >= static_cast<uint128>(den))
        q += n < 0 ? -1 : 1;
    return Money{narrow64(q, "money: scaled amount out of range")};
}

} // namespace detail

/// m * r with an exact rational intermediate, rounded half-up to the kopeck.
constexpr Money apply_rate(Money m, const Rate& r) {
    return detail::scale_money(m, r.value().num(), r.value().den());
}

/// m * f with an exact rational intermediate, rounded half-up to the kopeck.
constexpr Money apply_fraction(Money m, const Fraction& f) {
    return detail::scale_money(m, f.value().num(), f.value().den());
}

/// m * c for a non-negative exact coefficient (collateral multiples).
constexpr Money apply_coefficient(Money m, const Rational& c) {
    if (c.is_negative())
        throw domain_error("money: negative coefficient");
    return detail::scale_money(m, c.num(), c.den());
}

/// Exact ratio of two amounts, e.g. interest over exposure.
constexpr Rational money_ratio(Money part, Money whole) {
    if (whole.is_zero())
        throw domain_error("money: ratio with zero denominator");
    return Rational::of(part.kopecks, whole.kopecks);
}

// ---------------------------------------------------------------------------
// Canonical text rendering. Money prints as decimal rubles with two fixed
// decimals ("575000.00"), rates and fractions as percent with four decimals
// ("15.0000"). Locale independent by construction.
// ---------------------------------------------------------------------------

inline std::string format_money(Money m) {
    bool neg = m.kopecks < 0;
    detail::uint128 a = detail::uabs128(m.kopecks);
    std::uint64_t rub = static_cast<std::uint64_t>(a / 100);
    unsigned kop = static_cast<unsigned>(a % 100);
    std::string s = neg ? "-" : "";
    s += std::to_string(rub);
    s += '.';
    s += static_cast<char>('0' + kop / 10);
    s += static_cast<char>('0' + kop % 10);
    return s;
}

/// Renders a dimensionless value as percent with four decimals, half-up.
inline std::string format_percent(const Rational& value) {
    // value -> units of 10^-4 percent
    std::int64_t scaled = value.round_scaled(1'000'000);
    bool neg = scaled < 0;
    std::uint64_t a = neg ? static_cast<std::uint64_t>(-(scaled + 1)) + 1
                          : static_cast<std::uint64_t>(scaled);
    std::string frac = std::to_string(a % 10'000);
    frac.insert(0, 4 - frac.size(), '0');
    return (neg ? "-" : "") + std::to_string(a / 10'000) + "." + frac;
}

inline std::string format_percent(const Rate& r) { return format_percent(r.value()); }
inline std::string format_percent(const Fraction& f) { return format_percent(f.value()); }

// ---------------------------------------------------------------------------
// Exact decimal parsing. A value needing more precision than the stated
// number of decimals is rejected, never rounded. Trailing zeros beyond the
// limit are accepted.
// ---------------------------------------------------------------------------

namespace detail {

inline std::int64_t parse_decimal_scaled(std::string_view text, int max_decimals,
                                         const char* what) {
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }
    if (i >= text.size() || text[i] < '0' || text[i] > '9')
        throw parse_error(std::string(what) + ": malformed number '" + std::string(text) + "'");
    uint128 units = 0;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
        units = units * 10 + static_cast<unsigned>(text[i] - '0');
        if (units > static_cast<uint128>(INT64_MAX))
            throw overflow_error(std::string(what) + ": value out of range");
    }
    uint128 scale = 1;
    for (int d = 0; d < max_decimals; ++d)
        scale *= 10;
    uint128 frac = 0;
    uint128 frac_scale = scale;
    if (i < text.size() && text[i] == '.') {
        ++i;
        if (i >= text.size() || text[i] < '0' || text[i] > '9')
            throw parse_error(std::string(what) + ": malformed number '" + std::string(text) + "'");
        for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
            unsigned digit = static_cast<unsigned>(text[i] - '0');
            if (frac_scale == 1) {
                if (digit != 0)
                    throw parse_error(std::string(what) + ": '" + std::string(text) +
                                      "' needs more than " + std::to_string(max_decimals) +
                                      " decimals");
                continue;
            }
            frac_scale /= 10;
            frac += digit * frac_scale;
        }
    }
    if (i != text.size())
        throw parse_error(std::string(what) + ": malformed number '" + std::string(text) + "'");
    int128 v = static_cast<int128>(units * scale + frac);
    return narrow64(neg ? -v : v, what);
}

} // namespace detail

/// Parses decimal rubles with up to two decimals into exact kopecks.
inline Money parse_money(std::string_view text) {
    return Money{detail::parse_decimal_scaled(text, 2, "money")};
}

/// Parses a percent value with up to four decimals into an exact rational
/// (15.0000 -> 3/20). Negative values allowed; callers constrain the sign.
inline Rational parse_percent(std::string_view text) {
    return Rational::of(detail::parse_decimal_scaled(text, 4, "percent"), 1'000'000);
}

/// Parses a non-negative coefficient with up to three decimals (1.5 -> 3/2).
inline Rational parse_coefficient(std::string_view text) {
    std::int64_t milli = detail::parse_decimal_scaled(text, 3, "coefficient");
    if (milli < 0)
        throw parse_error("coefficient: negative value");
    return Rational::of(milli, 1'000);
}

} // namespace fimi
