#pragma once

#include <vector>

#include "siegel/forms.hpp"

namespace siegel {

/// J_{n + 1/2}(x) for n >= -1 and x > 0.
double bessel_j_half(int n, double x);

/// J_{k - 3/2}(x), the order attached to weight k (k >= 3).
double bessel_half(int k, double x);

/// Ascending series for J_nu(x) with a fixed number of terms, summed with
/// compensation. Accurate only while the terms do not cancel badly.
double bessel_series(double nu, double x, int terms = 30);

struct BesselBounds {
    double pow_bound;   // x^{k - 3/2}
    double decay_bound; // x^{-1/2}
};
BesselBounds bessel_bounds(int k, double x);

/// sup_{x > 0} sqrt(x) |J_{k-3/2}(x)|, located by a grid sweep plus golden
/// section refinement (cached per k).
double bessel_decay_sup(int k);

/// Envelope constant E with |J_{k-3/2}(x)| <= E min(x^{k-3/2}, x^{-1/2}).
/// The power part holds with constant 1 since (x/2)^nu / Gamma(nu+1) <= x^nu.
double bessel_envelope(int k);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes, weights;
};
const GaussLegendreRule& gauss_legendre(int n);

/// s1^2 >= s2^2 are the eigenvalues of P = T (NC)^{-1} Q t(NC)^{-1}.
struct EigenPair {
    double s1 = 0, s2 = 0;
    double detP = 0, traceP = 0;
    Rational detP_exact, traceP_exact;
};
EigenPair eigen_pair(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& NC);

struct KernelIntegralResult {
    double value = 0;
    double error = 0; // last change under panel doubling
    int panels = 0;   // 0 or -1: closed-form series (small arguments, or one small argument), no quadrature
};

/// int_0^1 J(4 pi s1 u) J(4 pi s2 u) u (1 - u^2)^{-1/2} du with J = J_{k-3/2},
/// after u = sin(theta); panels are doubled until the change is <= tol.
/// Throws ConvergenceError after max_doublings.
KernelIntegralResult kernel_integral_ex(int k, double s1, double s2, double tol = 1e-10, int max_doublings = 14);
double kernel_integral(int k, double s1, double s2, double tol = 1e-10);

/// The three explicit bounds for |kernel_integral| (nu = k - 3/2, E = bessel_envelope(k)):
///   a = (2 pi)^{2 nu} / Gamma(nu+1)^2 * detP^{nu/2}
///   b = E^2 / 8 * detP^{-1/4}
///   c = (2 pi)^nu E / (Gamma(nu+1) sqrt(4 pi)) * s2^nu * s1^{-1/2}
struct KernelBoundParts {
    double a, b, c;
    double min() const;
};
/// E defaults to bessel_envelope(k) when envelope <= 0.
KernelBoundParts kernel_bound_parts(int k, const EigenPair& p, double envelope = 0);
double kernel_bound(int k, const EigenPair& p, double envelope = 0);

} // namespace siegel
