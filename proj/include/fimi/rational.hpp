#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "fimi/errors.hpp"

namespace fimi {

namespace detail {

using int128 = __int128;
using uint128 = unsigned __int128;

constexpr uint128 uabs128(int128 v) {
    return v < 0 ? static_cast<uint128>(-(v + 1)) + 1 : static_cast<uint128>(v);
}

constexpr uint128 gcd128(uint128 a, uint128 b) {
    while (b != 0) {
        uint128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

constexpr std::int64_t narrow64(int128 v, const char* what) {
    if (v > static_cast<int128>(INT64_MAX) || v < static_cast<int128>(INT64_MIN))
        throw overflow_error(what);
    return static_cast<std::int64_t>(v);
}

} // namespace detail

/// Exact rational number on int64 numerator / positive int64 denominator,
/// always stored reduced. Intermediates run in 128-bit arithmetic; a result
/// whose reduced form does not fit int64 throws overflow_error. No floating
/// point is involved in construction, arithmetic or comparison.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t integer) : num_(integer), den_(1) {}

    static constexpr Rational of(std::int64_t num, std::int64_t den) {
        if (den == 0)
            throw domain_error("rational: zero denominator");
        detail::int128 n = num;
        detail::int128 d = den;
        if (d < 0) {
            n = -n;
            d = -d;
        }
        return normalized(n, d);
    }

    constexpr std::int64_t num() const noexcept { return num_; }
    constexpr std::int64_t den() const noexcept { return den_; }

    constexpr bool is_zero() const noexcept { return num_ == 0; }
    constexpr bool is_negative() const noexcept { return num_ < 0; }
    constexpr bool is_integer() const noexcept { return den_ == 1; }

    friend constexpr Rational operator+(const Rational& a, const Rational& b) {
        detail::int128 n = static_cast<detail::int128>(a.num_) * b.den_ +
                           static_cast<detail::int128>(b.num_) * a.den_;
        detail::int128 d = static_cast<detail::int128>(a.den_) * b.den_;
        return normalized(n, d);
    }

    friend constexpr Rational operator-(const Rational& a, const Rational& b) {
        detail::int128 n = static_cast<detail::int128>(a.num_) * b.den_ -
                           static_cast<detail::int128>(b.num_) * a.den_;
        detail::int128 d = static_cast<detail::int128>(a.den_) * b.den_;
        return normalized(n, d);
    }

    friend constexpr Rational operator*(const Rational& a, const Rational& b) {
        detail::int128 n = static_cast<detail::int128>(a.num_) * b.num_;
        detail::int128 d = static_cast<detail::int128>(a.den_) * b.den_;
        return normalized(n, d);
    }

    friend constexpr Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0)
            throw domain_error("rational: division by zero");
        detail::int128 n = static_cast<detail::int128>(a.num_) * b.den_;
        detail::int128 d = static_cast<detail::int128>(a.den_) * b.num_;
        if (d < 0) {
            n = -n;
            d = -d;
        }
        return normalized(n, d);
    }

    constexpr Rational operator-() const {
        Rational r;
        r.num_ = detail::narrow64(-static_cast<detail::int128>(num_), "rational: negate overflow");
        r.den_ = den_;
        return r;
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend constexpr bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    friend constexpr std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
        detail::int128 lhs = static_cast<detail::int128>(a.num_) * b.den_;
        detail::int128 rhs = static_cast<detail::int128>(b.num_) * a.den_;
        return lhs < rhs ? std::strong_ordering::less
                         : lhs > rhs ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    /// value * scale rounded to the nearest integer, ties away from zero.
    /// This is the single rounding rule of the library.
    constexpr std::int64_t round_scaled(std::int64_t scale) const {
        detail::int128 n = static_cast<detail::int128>(num_) * scale;
        detail::int128 d = den_;
        detail::int128 q = n / d;
        detail::int128 r = n % d;
        if (r != 0) {
            detail::uint128 twice = 2 * detail::uabs128(r);
            if (twice >= detail::uabs128(d))
                q += (n < 0) == (d < 0) ? 1 : -1;
        }
        return detail::narrow64(q, "rational: rounded value out of range");
    }

    /// Nearest integer, ties away from zero.
    constexpr std::int64_t rounded() const { return round_scaled(1); }

    double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    std::string str() const {
        if (den_ == 1)
            return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    static constexpr Rational normalized(detail::int128 n, detail::int128 d) {
        if (n == 0) {
            Rational r;
            r.num_ = 0;
            r.den_ = 1;
            return r;
        }
        detail::uint128 g = detail::gcd128(detail::uabs128(n), detail::uabs128(d));
        bool neg = n < 0;
        detail::uint128 un = detail::uabs128(n) / g;
        detail::uint128 ud = detail::uabs128(d) / g;
        if (un > static_cast<detail::uint128>(INT64_MAX) ||
            ud > static_cast<detail::uint128>(INT64_MAX))
            throw overflow_error("rational: reduced value out of int64 range");
        Rational r;
        r.num_ = neg ? -static_cast<std::int64_t>(un) : static_cast<std::int64_t>(un);
        r.den_ = static_cast<std::int64_t>(ud);
        return r;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace fimi
