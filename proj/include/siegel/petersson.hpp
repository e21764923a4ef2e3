#pragma once

#include <functional>
#include <string>

#include "siegel/forms.hpp"
#include "siegel/oracle.hpp"
#include "siegel/phase_sum.hpp"

namespace siegel {

/// Truncation of the infinite coset sums. Groups whose a-priori bound is below
/// prune_tol are skipped and their bound is added to the tail instead.
struct TruncationParams {
    i64 c1_max_rank1 = 96;
    i64 s4_max = 96;
    i64 c1_max_rank2 = 12;
    i64 c2_max_rank2 = 256;
    double U_trace_cap = 12.0; // on trace(A[U]), A the reduced form attached to (c1, c2, V)
    // U caps start at U_trace_cap; when the summed bound on the skipped U
    // exceeds rank2_tail_target, every group is extended to a common per-term
    // bound level (never past U_trace_max)
    double U_trace_max = 1e6;
    double rank2_tail_target = 1e-7;
    double quadrature_tol = 1e-12;
    double prune_tol = 1e-15;
    int workers = 1;
    // envelope constants (heuristic); 0 means "compute / use built-in"
    double kloosterman_kappa = 1.85; // max |K| / shape over det NC <= 36 is 2 cos(pi/8)
    double kloosterman_eps = 0.1;
    double bessel_envelope = 0.0;

    /// Throws DomainError unless every cap and tolerance is positive.
    void validate() const;
    /// Every cap doubled (tolerances and envelope constants unchanged).
    TruncationParams doubled() const;
};

struct PartialSum {
    Complex value;
    double tail_estimate = 0; // heuristic
    i64 terms_used = 0;       // coset groups actually evaluated
    i64 terms_pruned = 0;
};

struct PeterssonResult {
    Complex A;
    i64 delta = 0;
    Complex E;
    PartialSum sigma0, sigma1, sigma2;
    TruncationParams params;
    double tail_total() const { return sigma1.tail_estimate + sigma2.tail_estimate; }
};

/// pi^{1/2} (4 pi)^{3-2k} Gamma(k - 3/2) Gamma(k - 2) (det Q)^{3/2 - k}.
double normalization_constant(int k, const HalfIntegralForm& Q);

/// Throws DomainError unless k is even and >= 4.
void check_weight(int k);

PartialSum sigma0(const HalfIntegralForm& Q, const HalfIntegralForm& T);

// ---- rank 1 ----

/// Coset with C = U^{-1} diag(N c1, 0) tV and D = U^{-1} (d1 d2; 0 d4) V^{-1}.
struct Rank1Coset {
    i64 c1 = 1;
    Unimodular U, V;
    i64 d1 = 0, d2 = 0, d4 = 1;
};

/// Exact phase of the coset in Lemma 4.2, a rational mod 1 with denominator
/// dividing 2 N c1 s4. Requires p4 = s4 (otherwise the term vanishes).
Rational rank1_phase(i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const Rank1Coset& c);

/// h_Q(M, T) for the coset above, in closed form.
Complex rank1_term(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const Rank1Coset& c);

/// The full symplectic matrix of the coset (A, B from symplectic_complete).
CosetData rank1_coset_matrix(i64 N, const Rank1Coset& c);

/// All cosets of one (c1, s4) group in summation order: V from the primitive
/// w with T[w] = s4, U from the primitive u with Q[u] = s4 up to sign.
void for_each_rank1_coset(i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, i64 c1, i64 s4,
                          const std::function<void(const Rank1Coset&)>& fn);

/// Sum of rank1_term over one (c1, s4) group, through an exact phase histogram.
Complex rank1_group(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, i64 c1, i64 s4);

PartialSum sigma1(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const TruncationParams& p);

// ---- rank 2 ----

/// 8 pi^2 (|T|/|Q|)^{k/2 - 3/4} |det NC|^{-3/2} K(Q, T; NC) * kernel_integral(k, s1, s2).
Complex rank2_term(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C,
                   double quadrature_tol = 1e-12);

/// A-priori bound for |rank2_term|: the Kloosterman envelope with constant
/// kappa times kernel_bound.
double rank2_bound(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C,
                   const TruncationParams& p);

/// Every U in GL(2, Z) with B[u1] + B[u2] <= X for a positive-definite form B
/// (u1, u2 the columns of U), in a fixed order.
std::vector<Unimodular> gl2_with_trace_at_most(const HalfIntegralForm& B, i64 X);

/// One generated rank-2 C = U^{-1} U1^{-1} diag(c1, c2) V^{-1}.
struct Rank2Coset {
    i64 c1, c2;
    Unimodular V, U1, U;
    Mat2 C;
    double trace; // trace(A[U])
};

/// All C with c1 <= c1_max, c1 | c2 <= c2_max, V over coset_reps_P(c2/c1) and
/// trace(A[U]) <= trace_cap, where A = T[V diag(c1, c2)^{-1} U1] is reduced.
void for_each_rank2_coset(const HalfIntegralForm& T, i64 c1_max, i64 c2_max, double trace_cap,
                          const std::function<void(const Rank2Coset&)>& fn);

PartialSum sigma2(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const TruncationParams& p);

PeterssonResult petersson_geometric(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T,
                                    const TruncationParams& p);

} // namespace siegel
