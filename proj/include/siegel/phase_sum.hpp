#pragma once

#include <complex>
#include <map>
#include <vector>

#include "siegel/rational.hpp"

namespace siegel {

using Complex = std::complex<double>;

/// Exact multiset of phases r in [0, 1) with integer multiplicities, standing
/// for sum mult * e(r). Entries with zero multiplicity are dropped.
class PhaseSum {
public:
    PhaseSum() = default;
    explicit PhaseSum(i64 modulus) : modulus_(modulus) {}

    /// Modulus of the originating sum; all phase denominators divide it.
    i64 modulus() const { return modulus_; }
    void set_modulus(i64 m) { modulus_ = m; }

    /// Add e(r) with multiplicity (r is reduced mod 1).
    void add(const Rational& r, i64 mult = 1);
    void add(i64 num, i64 den, i64 mult = 1) { add(Rational(mod_floor(num, den), den), mult); }

    const std::map<Rational, i64>& phases() const { return phases_; }
    /// Sum of multiplicities (equals the number of summands, counting cancellation).
    i64 term_count() const;

    /// Complex value, summed once in increasing phase order with compensation.
    Complex value() const;

    /// Multiset with counts[j] copies of j/den.
    static PhaseSum from_histogram(const std::vector<i64>& counts, i64 den);

    /// Sumset: e(r) e(s) = e(r + s).
    friend PhaseSum convolve(const PhaseSum& x, const PhaseSum& y);

    friend bool operator==(const PhaseSum& x, const PhaseSum& y) { return x.phases_ == y.phases_; }

private:
    std::map<Rational, i64> phases_;
    i64 modulus_ = 1;
};

/// Compensated value of sum_j counts[j] e(j/den) in increasing j.
Complex histogram_value(const std::vector<i64>& counts, i64 den);

} // namespace siegel
