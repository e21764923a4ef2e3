#include "siegel/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "siegel/simd.hpp"

namespace siegel {

namespace {

constexpr double kPi = std::numbers::pi;

// (x/2)^nu / Gamma(nu + 1) for nu = n + 1/2 (n >= 0), without logarithms.
double leading_term(int n, double x) {
    const double h = 0.5 * x;
    double v = std::sqrt(h) / (0.5 * std::sqrt(kPi)); // (x/2)^{1/2} / Gamma(3/2)
    for (int m = 1; m <= n; ++m) v *= h / (m + 0.5);
    return v;
}

double series_half(int n, double x) {
    const double nu = n + 0.5;
    const double q = -0.25 * x * x;
    simd::Neumaier acc;
    double term = 1.0;
    acc.add(term);
    for (int j = 1; j < 500; ++j) {
        term *= q / (j * (nu + j));
        acc.add(term);
        if (std::abs(term) < 1e-18 * std::abs(acc.value())) break;
    }
    return leading_term(n, x) * acc.value();
}

double recurrence_half(int n, double x) {
    const double f = std::sqrt(2.0 / (kPi * x));
    double jm = f * std::cos(x); // J_{-1/2}
    if (n == -1) return jm;
    double j = f * std::sin(x); // J_{1/2}
    for (int m = 0; m < n; ++m) {
        const double next = (2.0 * (m + 0.5) / x) * j - jm;
        jm = j;
        j = next;
    }
    return j;
}

// int_0^{pi/2} J(a1 sin t) J(a2 sin t) sin t dt from the power series of both
// factors, integrated termwise (Wallis). Empty when rounding in the
// alternating sums could exceed err_max.
std::optional<double> kernel_series(int k, double a1, double a2, double err_max) {
    const int n = k - 2;
    const double nu = n + 0.5;
    auto coeffs = [nu](double a) {
        std::vector<double> c{1.0};
        const double q = -0.25 * a * a;
        double mx = 1.0;
        for (int j = 1; j < 200; ++j) {
            c.push_back(c.back() * q / (j * (nu + j)));
            mx = std::max(mx, std::abs(c.back()));
            if (std::abs(c.back()) < 1e-20 * mx && j > 2) break;
        }
        return c;
    };
    const auto u = coeffs(a1), v = coeffs(a2);
    // W(e) = int_0^{pi/2} sin^e, e = 2 nu + 1 + 2m is even
    double W = 0.5 * kPi;
    for (int e = 2; e <= 2 * n + 2; e += 2) W *= (e - 1.0) / e;
    double sum = 0, abs_sum = 0;
    for (std::size_t m = 0; m + 2 <= u.size() + v.size(); ++m) {
        double cm = 0, am = 0;
        for (std::size_t i = std::max<std::size_t>(m + 1, v.size()) - v.size(); i <= std::min(m, u.size() - 1); ++i) {
            cm += u[i] * v[m - i];
            am += std::abs(u[i] * v[m - i]);
        }
        sum += W * cm;
        abs_sum += W * am;
        const double e = 2.0 * n + 2 + 2.0 * m;
        W *= (e + 1) / (e + 2);
    }
    const double lead = leading_term(n, a1) * leading_term(n, a2);
    if (lead * abs_sum * 1e-15 > err_max) return std::nullopt;
    return lead * sum;
}

// Same integral for a2 small and a1 large: expand J(a2 sin t) and integrate
// each power against J(a1 sin t) with Sonine's finite integral
//   int J_nu(z sin t) sin^{nu+1} t cos^{2l} t dt = 2^{l-1/2} Gamma(l+1/2) z^{-l-1/2} J_{nu+l+1/2}(z)
// after writing sin^{2j} = (1 - cos^2)^j.
std::optional<double> kernel_sonine(int k, double a1, double a2, double err_max) {
    const int n = k - 2;
    const double nu = n + 0.5;
    std::vector<double> u{1.0};
    const double q = -0.25 * a2 * a2;
    for (int j = 1; j < 60; ++j) {
        u.push_back(u.back() * q / (j * (nu + j)));
        if (std::abs(u.back()) < 1e-19) break;
    }
    if (std::abs(u.back()) >= 1e-19) return std::nullopt;
    const std::size_t L = u.size();
    std::vector<double> S(L);
    double g = std::sqrt(kPi) * std::sqrt(0.5 / a1); // 2^{l-1/2} Gamma(l+1/2) a1^{-l-1/2} at l = 0
    for (std::size_t l = 0; l < L; ++l) {
        S[l] = g * std::cyl_bessel_j(static_cast<double>(k - 1 + static_cast<int>(l)), a1);
        g *= 2.0 * (static_cast<double>(l) + 0.5) / a1;
    }
    double sum = 0, abs_sum = 0;
    for (std::size_t j = 0; j < L; ++j) {
        double M = 0, aM = 0, binom = 1;
        for (std::size_t l = 0; l <= j; ++l) {
            const double t = (l % 2 ? -binom : binom) * S[l];
            M += t;
            aM += std::abs(t);
            binom = binom * static_cast<double>(j - l) / static_cast<double>(l + 1);
        }
        sum += u[j] * M;
        abs_sum += std::abs(u[j]) * aM;
    }
    const double lead = leading_term(n, a2);
    if (lead * abs_sum * 1e-14 > err_max) return std::nullopt;
    return lead * sum;
}

} // namespace

double bessel_j_half(int n, double x) {
    if (n < -1) throw DomainError("bessel_j_half: order below -1/2");
    if (!(x > 0)) throw DomainError("bessel_j_half: x must be positive");
    if (n >= 1 && x < n + 0.5) return series_half(n, x);
    return recurrence_half(n, x);
}

double bessel_half(int k, double x) {
    if (k < 3) throw DomainError("bessel_half: k must be >= 3");
    return bessel_j_half(k - 2, x);
}

double bessel_series(double nu, double x, int terms) {
    const double q = -0.25 * x * x;
    simd::Neumaier acc;
    double term = 1.0;
    acc.add(term);
    for (int j = 1; j < terms; ++j) {
        term *= q / (j * (nu + j));
        acc.add(term);
    }
    return std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0) * acc.value();
}

BesselBounds bessel_bounds(int k, double x) {
    if (!(x > 0)) throw DomainError("bessel_bounds: x must be positive");
    return {std::pow(x, k - 1.5), 1.0 / std::sqrt(x)};
}

double bessel_decay_sup(int k) {
    static std::mutex mu;
    static std::map<int, double> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(k); it != cache.end()) return it->second;

    auto f = [k](double x) { return std::sqrt(x) * std::abs(bessel_half(k, x)); };
    const double nu = k - 1.5;
    const double hi = 4.0 * nu + 60.0;
    double best = 0, arg = 0;
    for (double x = 1e-3; x <= hi; x += 1e-3) {
        const double v = f(x);
        if (v > best) {
            best = v;
            arg = x;
        }
    }
    double a = std::max(1e-3, arg - 2e-3), b = arg + 2e-3;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 80; ++i) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (f(c) > f(d)) b = d; else a = c;
    }
    best = std::max(best, f(0.5 * (a + b)));
    cache.emplace(k, best);
    return best;
}

double bessel_envelope(int k) { return std::max(1.0, bessel_decay_sup(k) * (1.0 + 1e-9)); }

const GaussLegendreRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussLegendreRule> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
    GaussLegendreRule r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int m = 2; m <= n; ++m) {
                const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[static_cast<std::size_t>(i)] = x;
        r.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

EigenPair eigen_pair(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& NC) {
    if (!Q.is_positive_definite() || !T.is_positive_definite())
        throw DomainError("eigen_pair: Q and T must be positive definite");
    const i64 det = NC.det();
    if (det == 0) throw DomainError("eigen_pair: NC is singular");
    const Mat2 adj = NC.adjugate();
    // 4 det^2 P as an integer matrix
    const Mat2 P4 = T.doubled() * adj * Q.doubled() * adj.transpose();
    const i128 d2 = static_cast<i128>(det) * det;
    EigenPair e;
    e.traceP_exact = Rational(P4.trace(), narrow_i64(4 * d2));
    e.detP_exact = Rational(narrow_i64(static_cast<i128>(T.det4()) * Q.det4()), narrow_i64(16 * d2));
    e.traceP = e.traceP_exact.to_double();
    e.detP = e.detP_exact.to_double();
    const i128 t = P4.trace();
    const i128 d = static_cast<i128>(P4.a) * P4.d - static_cast<i128>(P4.b) * P4.c;
    i128 disc = t * t - 4 * d;
    if (disc < 0) disc = 0;
    const long double mu1 = (static_cast<long double>(t) + std::sqrt(static_cast<long double>(disc))) / 2;
    const long double mu2 = static_cast<long double>(d) / mu1;
    const long double scale = 4.0L * static_cast<long double>(d2);
    e.s1 = static_cast<double>(std::sqrt(mu1 / scale));
    e.s2 = static_cast<double>(std::sqrt(mu2 / scale));
    return e;
}

KernelIntegralResult kernel_integral_ex(int k, double s1, double s2, double tol, int max_doublings) {
    if (k < 3) throw DomainError("kernel_integral: k must be >= 3");
    if (!(s1 > 0) || !(s2 > 0)) throw DomainError("kernel_integral: s1, s2 must be positive");
    const double a1 = 4.0 * kPi * s1, a2 = 4.0 * kPi * s2;
    if (a1 + a2 < 40)
        if (auto v = kernel_series(k, std::max(a1, a2), std::min(a1, a2), 0.01 * tol)) return {*v, 0.01 * tol, 0};
    if (std::min(a1, a2) < 8)
        if (auto v = kernel_sonine(k, std::max(a1, a2), std::min(a1, a2), 0.01 * tol)) return {*v, 0.01 * tol, -1};
    const auto& gl = gauss_legendre(16);
    std::vector<double> w, v;
    auto eval = [&](int panels) {
        const double h = 0.5 * kPi / panels;
        const std::size_t m = gl.nodes.size();
        w.resize(static_cast<std::size_t>(panels) * m);
        v.resize(w.size());
        for (int p = 0; p < panels; ++p) {
            const double mid = (p + 0.5) * h;
            for (std::size_t i = 0; i < m; ++i) {
                const double th = mid + 0.5 * h * gl.nodes[i];
                const double s = std::sin(th);
                const std::size_t idx = static_cast<std::size_t>(p) * m + i;
                w[idx] = 0.5 * h * gl.weights[i];
                v[idx] = bessel_half(k, a1 * s) * bessel_half(k, a2 * s) * s;
            }
        }
        return simd::dot(w.data(), v.data(), w.size());
    };
    int panels = 2 + static_cast<int>(std::ceil(2.0 * (s1 + s2)));
    double prev = eval(panels);
    for (int i = 0; i < max_doublings; ++i) {
        panels *= 2;
        const double cur = eval(panels);
        const double err = std::abs(cur - prev);
        if (err <= tol) return {cur, err, panels};
        prev = cur;
    }
    throw ConvergenceError("kernel_integral: no convergence after panel doubling");
}

double kernel_integral(int k, double s1, double s2, double tol) { return kernel_integral_ex(k, s1, s2, tol).value; }

double KernelBoundParts::min() const { return std::min({a, b, c}); }

KernelBoundParts kernel_bound_parts(int k, const EigenPair& p, double envelope) {
    const double nu = k - 1.5;
    const double E = envelope > 0 ? envelope : bessel_envelope(k);
    const double g = std::tgamma(nu + 1.0);
    KernelBoundParts r;
    r.a = std::pow(2.0 * kPi, 2.0 * nu) / (g * g) * std::pow(p.detP, 0.5 * nu);
    r.b = E * E / 8.0 * std::pow(p.detP, -0.25);
    r.c = std::pow(2.0 * kPi, nu) * E / (g * std::sqrt(4.0 * kPi)) * std::pow(p.s2, nu) / std::sqrt(p.s1);
    return r;
}

double kernel_bound(int k, const EigenPair& p, double envelope) { return kernel_bound_parts(k, p, envelope).min(); }

} // namespace siegel
