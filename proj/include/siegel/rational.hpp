#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <numeric>
#include <stdexcept>
#include <string>

namespace siegel {

using i64 = std::int64_t;
using i128 = __int128;

/// Narrow an exact 128-bit intermediate back to 64 bits, throwing on overflow.
inline i64 narrow_i64(i128 v) {
    if (v > static_cast<i128>(INT64_MAX) || v < static_cast<i128>(INT64_MIN))
        throw std::overflow_error("siegel: 64-bit integer overflow");
    return static_cast<i64>(v);
}

/// Non-negative residue of a modulo m (m > 0).
inline i64 mod_floor(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

/// Exact rational with 64-bit numerator/denominator, always normalized
/// (den > 0, gcd(num, den) == 1). Intermediates are computed in 128 bits.
class Rational {
public:
    constexpr Rational() = default;
    Rational(i64 n) : num_(n), den_(1) {} // NOLINT(google-explicit-constructor)
    Rational(i64 n, i64 d) { assign(n, d); }

    i64 num() const { return num_; }
    i64 den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_integer() const { return den_ == 1; }
    int sign() const { return (num_ > 0) - (num_ < 0); }

    friend Rational operator+(const Rational& x, const Rational& y) {
        return from128(static_cast<i128>(x.num_) * y.den_ + static_cast<i128>(y.num_) * x.den_,
                       static_cast<i128>(x.den_) * y.den_);
    }
    friend Rational operator-(const Rational& x, const Rational& y) {
        return from128(static_cast<i128>(x.num_) * y.den_ - static_cast<i128>(y.num_) * x.den_,
                       static_cast<i128>(x.den_) * y.den_);
    }
    friend Rational operator*(const Rational& x, const Rational& y) {
        return from128(static_cast<i128>(x.num_) * y.num_, static_cast<i128>(x.den_) * y.den_);
    }
    friend Rational operator/(const Rational& x, const Rational& y) {
        if (y.num_ == 0) throw std::domain_error("siegel: rational division by zero");
        return from128(static_cast<i128>(x.num_) * y.den_, static_cast<i128>(x.den_) * y.num_);
    }
    Rational operator-() const { return Rational(-num_, den_); }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& x, const Rational& y) {
        const i128 l = static_cast<i128>(x.num_) * y.den_;
        const i128 r = static_cast<i128>(y.num_) * x.den_;
        return l < r ? std::strong_ordering::less
                     : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    /// Fractional part in [0, 1).
    Rational frac() const { return Rational(mod_floor(num_, den_), den_); }

    std::string to_string() const {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    static Rational from128(i128 n, i128 d) {
        if (d == 0) throw std::domain_error("siegel: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        i128 a = n < 0 ? -n : n, b = d;
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        Rational r;
        r.num_ = narrow_i64(n);
        r.den_ = narrow_i64(d);
        return r;
    }
    void assign(i64 n, i64 d) { *this = from128(n, d); }

    i64 num_ = 0;
    i64 den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

} // namespace siegel
