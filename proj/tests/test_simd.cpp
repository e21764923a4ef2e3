#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "siegel/phase_sum.hpp"
#include "siegel/simd.hpp"

using namespace siegel;

TEST_CASE("scalar kernels on small inputs") {
    const double t[] = {0.0, 0.25, 0.5, -0.25};
    const double w[] = {1.0, 2.0, 3.0, 4.0};
    const auto z = simd::scalar::phase_accumulate(t, w, 4);
    CHECK(std::abs(z - std::complex<double>(1.0 - 3.0, 2.0 - 4.0)) < 1e-14);
    const double x[] = {1e16, 1.0, -1e16, 1.0};
    CHECK(simd::scalar::compensated_sum(x, 4) == 2.0);
    CHECK(simd::scalar::dot(w, w, 4) == 30.0);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (!simd::avx2_available()) {
        MESSAGE("AVX2 not available; equivalence test skipped");
        return;
    }
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ph(-3.0, 3.0), wt(-5.0, 5.0);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 4099u}) {
        std::vector<double> t(n), w(n), x(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = ph(rng);
            w[i] = wt(rng);
            x[i] = wt(rng) * std::pow(10.0, static_cast<double>(i % 9));
        }
        const auto zs = simd::scalar::phase_accumulate(t.data(), w.data(), n);
        const auto zv = simd::avx2::phase_accumulate(t.data(), w.data(), n);
        double scale = 1.0;
        for (double v : w) scale += std::abs(v);
        CHECK(std::abs(zs - zv) <= 1e-12 * scale);

        const double ss = simd::scalar::compensated_sum(x.data(), n);
        const double sv = simd::avx2::compensated_sum(x.data(), n);
        CHECK(std::abs(ss - sv) <= 1e-12 * std::max(1.0, std::abs(ss)));

        const double ds = simd::scalar::dot(w.data(), x.data(), n);
        const double dv = simd::avx2::dot(w.data(), x.data(), n);
        CHECK(std::abs(ds - dv) <= 1e-12 * std::max(1.0, std::abs(ds)));
    }
}

TEST_CASE("avx2 sincos is accurate at quadrant boundaries") {
    if (!simd::avx2_available()) return;
    std::vector<double> t, w;
    for (int i = -40; i <= 40; ++i) {
        t.push_back(i / 8.0);
        t.push_back(i / 8.0 + 1e-9);
        t.push_back(i / 8.0 - 1e-9);
    }
    w.assign(t.size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::fill(w.begin(), w.end(), 0.0);
        w[i] = 1.0;
        const auto z = simd::avx2::phase_accumulate(t.data(), w.data(), t.size());
        const double x = 2.0 * std::numbers::pi * t[i];
        CHECK(std::abs(z - std::complex<double>(std::cos(x), std::sin(x))) < 1e-14);
    }
}

TEST_CASE("dispatch switches between variants and PhaseSum values agree") {
    PhaseSum s(97);
    for (i64 j = 0; j < 97; ++j) s.add(j * j, 97);
    simd::set_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    const Complex a = s.value();
    if (simd::avx2_available()) {
        simd::set_isa(simd::Isa::avx2);
        CHECK(simd::active_isa() == simd::Isa::avx2);
        CHECK(std::abs(s.value() - a) < 1e-12);
    } else {
        CHECK_THROWS(simd::set_isa(simd::Isa::avx2));
    }
    // quadratic Gauss sum over a prime 97 = 1 mod 4 equals sqrt(97)
    CHECK(std::abs(a - Complex(std::sqrt(97.0), 0)) < 1e-10);
}
