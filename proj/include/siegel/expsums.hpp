#pragma once

#include <array>
#include <vector>

#include "siegel/forms.hpp"
#include "siegel/phase_sum.hpp"

namespace siegel {

// ---- quadratic Gauss sums G(a, b, c) = sum_{n mod c} e((a n^2 + b n) / c) ----

/// Multiplicities of the phases j/c, j = 0..c-1, computed by the factorized
/// path: split off (a, c), then CRT over the prime-power factors of the rest.
std::vector<i64> gauss_histogram(i64 a, i64 b, i64 c);
/// Same multiset by direct summation over n = 0..c-1.
std::vector<i64> gauss_histogram_direct(i64 a, i64 b, i64 c);

PhaseSum gauss_sum(i64 a, i64 b, i64 c);
PhaseSum gauss_sum_direct(i64 a, i64 b, i64 c);

// ---- symplectic pairs and completion ----

/// Bottom block row (C D) of an element of Sp(2, Z).
struct SymplecticPair {
    Mat2 C, D;
    friend bool operator==(const SymplecticPair&, const SymplecticPair&) = default;
};

struct SymplecticCompletion {
    Mat2 A, B;
};

/// tA C, tB D symmetric and tA D - tC B = I.
bool is_symplectic(const Mat2& A, const Mat2& B, const Mat2& C, const Mat2& D);

/// gcd of the six 2x2 minors of the 2x4 matrix (C D).
i64 minors_gcd(const Mat2& C, const Mat2& D);

/// Some (A, B) with (A B; C D) in Sp(2, Z). Throws DomainError if C tD is not
/// symmetric or (C D) is not primitive.
SymplecticCompletion symplectic_complete(const SymplecticPair& pair);

/// Classes D mod C*Lambda with C tD symmetric and (C D) primitive, one
/// representative each, in a canonical order.
std::vector<SymplecticPair> enumerate_D_classes(const Mat2& C);
std::vector<SymplecticPair> enumerate_D_classes(const Mat2& C, const ElementaryDivisorDecomposition& e);

/// Canonical key of the class of D mod C*Lambda: the entries of C^{-1} D mod 1.
std::array<Rational, 3> d_class_key(const Mat2& C, const Mat2& D);

// ---- Kitaoka's Kloosterman sum ----

/// Phase tr(A C^{-1} Q + C^{-1} D T) mod 1 of one coset.
Rational kloosterman_phase(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& A,
                           const Mat2& C, const Mat2& D);

/// Per-class phase data for C = diag(c1, c2): the phase of a class is
/// (coeff . (q.a, q.b, q.c, t.a, t.b, t.c)) / den mod 1, with A from
/// symplectic_complete.
class DiagonalKloostermanTable {
public:
    DiagonalKloostermanTable(i64 c1, i64 c2);
    i64 c1() const { return c1_; }
    i64 c2() const { return c2_; }
    i64 den() const { return den_; }
    std::size_t size() const { return coeff_.size(); }
    /// Histogram over numerators mod den.
    std::vector<i64> histogram(const HalfIntegralForm& Q, const HalfIntegralForm& T) const;
    PhaseSum sum(const HalfIntegralForm& Q, const HalfIntegralForm& T) const;

private:
    i64 c1_, c2_, den_;
    std::vector<std::array<i64, 6>> coeff_;
};

/// K(Q, T; C) via the elementary-divisor reduction
/// K(Q, T; U^{-1} diag V^{-1}) = K(Q[tU], T[V]; diag).
PhaseSum kitaoka_kloosterman(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C);

/// K(Q, T; C) by completing every class from enumerate_D_classes(C) directly.
PhaseSum kitaoka_kloosterman_direct(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C);

/// Shape of the Kloosterman envelope c1^2 c2^{1/2 + eps} (c2, t4')^{1/2},
/// with t4' the (2,2) entry of T[V] for C = U^{-1} diag(c1, c2) V^{-1}.
double kloosterman_envelope_shape(const HalfIntegralForm& T, const Mat2& C, double eps);

} // namespace siegel
