#pragma once

// Slow, independent references used by the tests and the acceptance runner.

#include <optional>

#include "siegel/forms.hpp"
#include "siegel/phase_sum.hpp"

namespace siegel {

/// A coset representative M = (A B; C D) in Sp(2, Z). theta(M), the lattice
/// of S in Lambda with M (1 S; 0 1) M^{-1} a translation, is {S : S tC = 0}:
/// all of Lambda for rank 0, the line {S : S[V] = (0 0; 0 *)} for rank 1
/// (V with first column along the row space of C), and {0} for rank 2.
struct CosetData {
    Mat2 A, B, C, D;
    int rank() const;
    /// Throws DomainError unless M is symplectic and C = 0 mod N.
    void validate(i64 N = 1) const;
};

struct OracleParams {
    double y = 0.0;    // Im Z = y I in the integration coordinates; 0 picks a default
    int quad_n = 0;    // lattice points per unit length; 0 picks a default
    double radius = 0; // window radius for the non-compact directions; 0 picks a default
    bool truncation_check = true;
    int workers = 1;
};

struct OracleResult {
    Complex value;
    double truncation_estimate = 0; // |I(R) - I(0.75 R)|
    double y = 0, radius = 0;
    int quad_n = 0;
    double amplification = 0; // exp(2 pi tr(T Y)), size of the cancelling integrand
};

/// h_Q(M, T) = int_{Sym(R)/theta(M)} e(tr(Q M<Z>)) det(CZ + D)^{-k} e(-tr(T Z)) dX
/// by a lattice trapezoid rule: the compact directions are sampled on the
/// torus, the non-compact ones carry a smooth window of radius R.
OracleResult h_bruteforce(int k, const HalfIntegralForm& Q, const HalfIntegralForm& T, const CosetData& M,
                          const OracleParams& params = {});

/// #{ U : |u_ij| <= box, U Q tU = T }.
i64 delta_bruteforce(const HalfIntegralForm& Q, const HalfIntegralForm& T, i64 box);

/// Number of classes D mod C Lambda with C tD symmetric and (C D) primitive,
/// found by scanning |d_ij| <= box_multiplier * max(|det C|, max row sum of |C|).
i64 dclasses_bruteforce(const Mat2& C, i64 box_multiplier);

/// One representative per class from the same box scan.
std::vector<Mat2> dclass_reps_bruteforce(const Mat2& C, i64 box_multiplier);

/// Some A with (A B; C D) symplectic found by searching |a_ij| <= box (B is then
/// determined); nullopt if none exists in the box.
std::optional<CosetData> complete_bruteforce(const Mat2& C, const Mat2& D, i64 box);

/// K(Q, T; C) from dclass_reps_bruteforce and complete_bruteforce.
Complex kloosterman_bruteforce(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C,
                               i64 box_multiplier);

} // namespace siegel
