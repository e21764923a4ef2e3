#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "siegel/specfun.hpp"

using namespace siegel;

namespace {

using quad = __float128;

quad qabs(quad x) { return x < 0 ? -x : x; }

quad qsqrt(quad h) {
    quad s = std::sqrt(static_cast<double>(h));
    for (int i = 0; i < 4; ++i) s = s - (s * s - h) / (2 * s);
    return s;
}

// J_{n+1/2}(x) from the ascending series in binary128.
double reference_bessel(int n, double x) {
    const quad pi = static_cast<quad>(3.141592653589793) + static_cast<quad>(1.2246467991473532e-16);
    const quad h = static_cast<quad>(x) / 2;
    quad lead = qsqrt(h) / (qsqrt(pi) / 2);
    for (int m = 1; m <= n; ++m) lead *= h / (m + static_cast<quad>(0.5));
    const quad nu = n + static_cast<quad>(0.5);
    const quad q = -h * h;
    quad term = 1, sum = 1;
    for (int j = 1; j < 400; ++j) {
        term *= q / (j * (nu + j));
        sum += term;
        if (qabs(term) < static_cast<quad>(1e-36) * qabs(sum)) break;
    }
    return static_cast<double>(lead * sum);
}

} // namespace

TEST_CASE("bessel_half closed-form examples") {
    const double pi = std::numbers::pi;
    CHECK(bessel_j_half(0, pi / 2) == doctest::Approx(2 / pi).epsilon(1e-15));
    CHECK(bessel_j_half(1, pi) == doctest::Approx(std::sqrt(2.0) / pi).epsilon(1e-14));
    CHECK(bessel_half(3, pi) == doctest::Approx(std::sqrt(2.0) / pi).epsilon(1e-14));
    // small x: leading term of the series
    for (int k = 3; k <= 12; ++k) {
        const double nu = k - 1.5, x = 1e-4;
        const double lead = std::pow(x / 2, nu) / std::tgamma(nu + 1);
        CHECK(bessel_half(k, x) == doctest::Approx(lead).epsilon(1e-8));
    }
    CHECK_THROWS_AS(bessel_half(4, 0.0), DomainError);
    CHECK_THROWS_AS(bessel_half(2, 1.0), DomainError);
}

TEST_CASE("bessel_half matches a binary128 series for x <= 20") {
    // Relative error, measured against max(|J|, 1e-2 * sqrt(2/(pi x))) so that
    // points next to a zero of J are judged by the local amplitude.
    double worst = 0;
    for (int k = 3; k <= 12; ++k)
        for (double x = 0.01; x <= 20.0; x += 0.0173) {
            const double ref = reference_bessel(k - 2, x);
            const double scale = std::max(std::abs(ref), 1e-2 * std::sqrt(2.0 / (std::numbers::pi * x)));
            worst = std::max(worst, std::abs(bessel_half(k, x) - ref) / scale);
        }
    MESSAGE("worst scaled relative error: " << worst);
    CHECK(worst < 1e-12);
}

TEST_CASE("30-term double series agrees where it does not cancel") {
    for (int k = 3; k <= 12; ++k)
        for (double x = 0.05; x <= 4.0; x += 0.05) {
            const double s = bessel_series(k - 1.5, x, 30);
            CHECK(std::abs(bessel_half(k, x) - s) <= 1e-12 * std::abs(s));
        }
}

TEST_CASE("three-term recurrence holds") {
    for (int n = 0; n <= 10; ++n)
        for (double x = 0.1; x <= 50.0; x += 0.37) {
            const double lhs = bessel_j_half(n + 1, x);
            const double rhs = (2.0 * (n + 0.5) / x) * bessel_j_half(n, x) - bessel_j_half(n - 1, x);
            const double scale = std::max({1.0, std::abs(bessel_j_half(n, x)) * 2.0 * (n + 0.5) / x});
            CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
        }
}

TEST_CASE("bessel_bounds and envelope") {
    auto b = bessel_bounds(3, 1.0);
    CHECK(b.pow_bound == 1.0);
    CHECK(b.decay_bound == 1.0);
    b = bessel_bounds(4, 4.0);
    CHECK(b.pow_bound == doctest::Approx(32.0));
    CHECK(b.decay_bound == doctest::Approx(0.5));
    CHECK(bessel_envelope(3) == 1.0);
    for (int k = 3; k <= 14; ++k) {
        const double E = bessel_envelope(k);
        int violations = 0;
        for (double lx = -3; lx <= 3; lx += 0.001) {
            const double x = std::pow(10.0, lx);
            const auto bb = bessel_bounds(k, x);
            if (std::abs(bessel_half(k, x)) > E * std::min(bb.pow_bound, bb.decay_bound)) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("gauss_legendre integrates polynomials exactly") {
    for (int n : {1, 2, 5, 16, 32}) {
        const auto& r = gauss_legendre(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0;
            for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
            const double exact = (d % 2 == 1) ? 0.0 : 2.0 / (d + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("eigen_pair") {
    const HalfIntegralForm one{1, 0, 1};
    auto e = eigen_pair(one, one, Mat2::identity());
    CHECK(e.s1 == doctest::Approx(1.0));
    CHECK(e.s2 == doctest::Approx(1.0));
    e = eigen_pair(one, one, Mat2::diag(1, 2));
    CHECK(e.s1 * e.s1 == doctest::Approx(1.0));
    CHECK(e.s2 * e.s2 == doctest::Approx(0.25));
    CHECK(e.detP_exact == Rational(1, 4));
    CHECK(e.traceP_exact == Rational(5, 4));

    std::mt19937_64 rng(41);
    std::uniform_int_distribution<i64> ent(-6, 6), pos(1, 6);
    for (int i = 0; i < 300; ++i) {
        const HalfIntegralForm q{pos(rng), ent(rng), pos(rng)}, t{pos(rng), ent(rng), pos(rng)};
        const Mat2 c{ent(rng), ent(rng), ent(rng), ent(rng)};
        if (!q.is_positive_definite() || !t.is_positive_definite() || c.det() == 0) continue;
        e = eigen_pair(q, t, c);
        const double det = q.determinant().to_double() * t.determinant().to_double() /
                           (static_cast<double>(c.det()) * static_cast<double>(c.det()));
        CHECK(e.s1 * e.s1 * e.s2 * e.s2 == doctest::Approx(det).epsilon(1e-12));
        CHECK(e.s1 * e.s1 + e.s2 * e.s2 == doctest::Approx(e.traceP).epsilon(1e-12));
        CHECK(e.s1 >= e.s2);
    }
    CHECK_THROWS_AS(eigen_pair(one, one, Mat2{1, 2, 2, 4}), DomainError);
    CHECK_THROWS_AS(eigen_pair(HalfIntegralForm{1, 2, 1}, one, Mat2::identity()), DomainError);
}

TEST_CASE("kernel_integral") {
    // independent reference: composite Simpson in u = sin(theta), 10x finer than needed
    auto reference = [](int k, double s1, double s2) {
        const int m = 200000;
        const double h = 0.5 * std::numbers::pi / m;
        double sum = 0;
        for (int i = 0; i <= m; ++i) {
            const double th = i * h;
            const double s = std::sin(th);
            const double f = th == 0 ? 0.0
                                     : bessel_half(k, 4 * std::numbers::pi * s1 * s) *
                                           bessel_half(k, 4 * std::numbers::pi * s2 * s) * s;
            sum += f * ((i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2));
        }
        return sum * h / 3;
    };
    CHECK(kernel_integral(4, 1, 1) == doctest::Approx(reference(4, 1, 1)).epsilon(1e-9));
    CHECK(kernel_integral(6, 0.7, 2.3) == doctest::Approx(reference(6, 0.7, 2.3)).epsilon(1e-9));
    CHECK(std::abs(kernel_integral(4, 1e-6, 1e-6)) < 1e-20);

    for (double s1 : {0.01, 0.3, 1.0, 4.5, 20.0})
        for (double s2 : {0.02, 0.5, 2.0, 9.0}) {
            CHECK(kernel_integral(6, s1, s2) == kernel_integral(6, s2, s1));
            const auto r = kernel_integral_ex(4, s1, s2);
            CHECK(r.error <= 1e-10);
            CHECK(kernel_integral_ex(4, s1, s2, 1e-10).value ==
                  doctest::Approx(kernel_integral_ex(4, s1, s2, 1e-13).value).epsilon(1e-8));
        }
    CHECK_THROWS_AS(kernel_integral(4, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(kernel_integral_ex(4, 50.0, 50.0, 1e-10, 0), ConvergenceError);

    // small arguments go through the termwise power series
    int series = 0;
    for (int k : {4, 6, 10})
        for (double s1 : {0.003, 0.05, 0.2, 0.45, 0.9})
            for (double s2 : {0.001, 0.03, 0.3, 0.7}) {
                const auto r = kernel_integral_ex(k, s1, s2, 1e-12);
                series += r.panels == 0;
                CHECK(std::abs(r.value - reference(k, s1, s2)) <= 1e-11);
            }
    CHECK(series > 30);

    // one argument small, the other large
    int sonine = 0;
    for (int k : {4, 6, 10})
        for (double s1 : {3.5, 8.0, 25.0})
            for (double s2 : {0.0005, 0.02, 0.1, 0.4}) {
                const auto r = kernel_integral_ex(k, s1, s2, 1e-12);
                sonine += r.panels == -1;
                CHECK(std::abs(r.value - reference(k, s1, s2)) <= 1e-11);
                CHECK(r.value == kernel_integral_ex(k, s2, s1, 1e-12).value);
            }
    CHECK(sonine > 25);
}

TEST_CASE("kernel_bound dominates the kernel integral") {
    for (int k : {4, 6, 10}) {
        int violations = 0;
        for (double l1 = -3; l1 <= 1.3; l1 += 0.1)
            for (double l2 = -3; l2 <= l1; l2 += 0.1) {
                EigenPair p;
                p.s1 = std::pow(10.0, l1);
                p.s2 = std::pow(10.0, l2);
                p.detP = p.s1 * p.s1 * p.s2 * p.s2;
                p.traceP = p.s1 * p.s1 + p.s2 * p.s2;
                if (std::abs(kernel_integral(k, p.s1, p.s2)) > kernel_bound(k, p)) ++violations;
            }
        CHECK(violations == 0);
    }
}

TEST_CASE("kernel_bound arithmetic and monotonicity") {
    EigenPair p;
    p.s1 = p.s2 = 1;
    p.detP = 1;
    p.traceP = 2;
    const auto parts = kernel_bound_parts(4, p);
    const double E = bessel_envelope(4);
    CHECK(parts.a == doctest::Approx(std::pow(2 * std::numbers::pi, 5) / std::pow(std::tgamma(3.5), 2)));
    CHECK(parts.b == doctest::Approx(E * E / 8));
    CHECK(kernel_bound(4, p) == parts.min());

    p.detP = 1e-8;
    p.s1 = p.s2 = 1e-2;
    p.traceP = 2e-4;
    CHECK(kernel_bound(4, p) == doctest::Approx(kernel_bound_parts(4, p).a));
    CHECK(kernel_bound(4, p) == doctest::Approx(parts.a * std::pow(1e-8, 1.25)));

    for (int k : {4, 6, 10}) {
        double prev = INFINITY;
        for (double s1 = 1.0; s1 < 100; s1 *= 1.3) {
            EigenPair q;
            q.s1 = s1;
            q.s2 = 1.0 / s1;
            q.detP = 1;
            q.traceP = s1 * s1 + 1 / (s1 * s1);
            const double b = kernel_bound(k, q);
            CHECK(b <= prev);
            prev = b;
        }
    }
}
