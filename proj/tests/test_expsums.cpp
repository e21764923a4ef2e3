#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "siegel/expsums.hpp"
#include "siegel/oracle.hpp"

using namespace siegel;

namespace {

HalfIntegralForm random_form(std::mt19937_64& rng, i64 bound) {
    std::uniform_int_distribution<i64> ent(-bound, bound), pos(1, bound);
    for (;;) {
        HalfIntegralForm f{pos(rng), ent(rng), pos(rng)};
        if (f.is_positive_definite()) return f;
    }
}

Mat2 random_nonsingular(std::mt19937_64& rng, i64 bound, i64 max_det) {
    std::uniform_int_distribution<i64> ent(-bound, bound);
    for (;;) {
        const Mat2 c{ent(rng), ent(rng), ent(rng), ent(rng)};
        const i64 d = std::abs(c.det());
        if (d != 0 && d <= max_det) return c;
    }
}

} // namespace

TEST_CASE("gauss_sum examples") {
    CHECK(std::abs(gauss_sum(0, 0, 7).value() - Complex(7, 0)) < 1e-12);
    CHECK(std::abs(gauss_sum(1, 0, 4).value() - Complex(2, 2)) < 1e-12);
    CHECK(std::abs(gauss_sum(2, 1, 4).value()) < 1e-12);
    CHECK(gauss_sum(2, 1, 4) == gauss_sum_direct(2, 1, 4));
    CHECK(gauss_sum(1, 0, 4).term_count() == 4);
    const auto g = gauss_sum(3, 5, 12);
    for (const auto& [r, m] : g.phases()) CHECK(12 % r.den() == 0);
    CHECK_THROWS_AS(gauss_sum(1, 1, 0), DomainError);
}

TEST_CASE("gauss factorized path matches direct summation as multisets") {
    for (i64 c = 1; c <= 60; ++c)
        for (i64 a = 0; a < c; ++a)
            for (i64 b = 0; b < c; ++b) REQUIRE(gauss_histogram(a, b, c) == gauss_histogram_direct(a, b, c));
}

TEST_CASE("gauss vanishing rule and bound") {
    for (i64 c = 1; c <= 80; ++c)
        for (i64 a = 0; a < c; ++a)
            for (i64 b = 0; b < c; ++b) {
                const i64 g = std::gcd(a, c);
                const double v = std::abs(gauss_sum(a, b, c).value());
                if (b % g != 0) CHECK(v < 1e-9);
                CHECK(v <= 2.0 * std::sqrt(static_cast<double>(g * c)) + 1e-9);
            }
}

TEST_CASE("symplectic_complete") {
    auto c1 = symplectic_complete({Mat2::identity(), Mat2{0, 0, 0, 0}});
    CHECK(is_symplectic(c1.A, c1.B, Mat2::identity(), Mat2{0, 0, 0, 0}));
    CHECK(c1.A == Mat2{0, 0, 0, 0});
    CHECK(c1.B == Mat2{-1, 0, 0, -1});

    const Mat2 C = Mat2::diag(1, 2), D = Mat2::diag(0, 1);
    auto c2 = symplectic_complete({C, D});
    CHECK(is_symplectic(c2.A, c2.B, C, D));

    CHECK_THROWS_AS(symplectic_complete({Mat2::diag(2, 2), Mat2::diag(2, 2)}), DomainError);
    CHECK_THROWS_AS(symplectic_complete({Mat2::identity(), Mat2{0, 1, 0, 0}}), DomainError);
}

TEST_CASE("every enumerated D class completes symplectically") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 60; ++i) {
        const Mat2 C = random_nonsingular(rng, 5, 30);
        for (const auto& p : enumerate_D_classes(C)) {
            const auto comp = symplectic_complete(p);
            CHECK(is_symplectic(comp.A, comp.B, p.C, p.D));
        }
    }
}

TEST_CASE("D classes agree with box enumeration") {
    CHECK(enumerate_D_classes(Mat2::identity()).size() == 1);
    CHECK(dclasses_bruteforce(Mat2::identity(), 2) == 1);
    CHECK(enumerate_D_classes(Mat2::diag(1, 2)).size() == static_cast<std::size_t>(dclasses_bruteforce(Mat2::diag(1, 2), 2)));
    CHECK(enumerate_D_classes(Mat2::diag(2, 2)).size() == static_cast<std::size_t>(dclasses_bruteforce(Mat2::diag(2, 2), 2)));
    CHECK_THROWS_AS(dclasses_bruteforce(Mat2{1, 2, 2, 4}, 2), DomainError);

    std::mt19937_64 rng(22);
    for (int i = 0; i < 25; ++i) {
        const Mat2 C = random_nonsingular(rng, 3, 8);
        const auto classes = enumerate_D_classes(C);
        std::set<std::array<Rational, 3>> keys;
        for (const auto& p : classes) keys.insert(d_class_key(C, p.D));
        CHECK(keys.size() == classes.size());
        CHECK(static_cast<i64>(classes.size()) == dclasses_bruteforce(C, 2));
    }
}

TEST_CASE("D class count is invariant under C -> U C V") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<i64> sh(-3, 3);
    for (int i = 0; i < 40; ++i) {
        const Mat2 C = random_nonsingular(rng, 6, 40);
        const Mat2 U = Mat2{1, sh(rng), 0, 1} * Mat2{1, 0, sh(rng), 1};
        const Mat2 V = Mat2{0, 1, 1, 0} * Mat2{1, sh(rng), 0, 1};
        CHECK(enumerate_D_classes(C).size() == enumerate_D_classes(U * C * V).size());
    }
}

TEST_CASE("kitaoka_kloosterman") {
    std::mt19937_64 rng(24);
    for (int i = 0; i < 10; ++i) {
        const auto q = random_form(rng, 6), t = random_form(rng, 6);
        CHECK(std::abs(kitaoka_kloosterman(q, t, Mat2::identity()).value() - Complex(1, 0)) < 1e-12);
    }
    const HalfIntegralForm one{1, 0, 1};
    const auto k12 = kitaoka_kloosterman(one, one, Mat2::diag(1, 2));
    CHECK(std::abs(k12.value() - kloosterman_bruteforce(one, one, Mat2::diag(1, 2), 2)) < 1e-12);

    // diagonal-table path, direct completion path and box enumeration agree
    for (int i = 0; i < 40; ++i) {
        const Mat2 C = random_nonsingular(rng, 4, 12);
        const auto q = random_form(rng, 5), t = random_form(rng, 5);
        const auto fast = kitaoka_kloosterman(q, t, C);
        CHECK(fast == kitaoka_kloosterman_direct(q, t, C));
        if (std::abs(C.det()) <= 6) CHECK(std::abs(fast.value() - kloosterman_bruteforce(q, t, C, 2)) < 1e-9);
    }
}

TEST_CASE("Kloosterman phase is independent of the completion") {
    std::mt19937_64 rng(25);
    std::uniform_int_distribution<i64> s(-3, 3);
    for (int i = 0; i < 30; ++i) {
        const Mat2 C = random_nonsingular(rng, 4, 20);
        const auto q = random_form(rng, 5), t = random_form(rng, 5);
        for (const auto& p : enumerate_D_classes(C)) {
            const auto comp = symplectic_complete(p);
            const i64 a = s(rng), b = s(rng), d = s(rng);
            const Mat2 S{a, b, b, d};
            // left translation by (1 S; 0 1) gives another completion
            const Mat2 A2 = comp.A + S * p.C, B2 = comp.B + S * p.D;
            REQUIRE(is_symplectic(A2, B2, p.C, p.D));
            CHECK(kloosterman_phase(q, t, comp.A, p.C, p.D) == kloosterman_phase(q, t, A2, p.C, p.D));
        }
    }
}

TEST_CASE("Kloosterman symmetry K(Q,T;C) = K(T,Q;tC)") {
    std::mt19937_64 rng(26);
    for (int i = 0; i < 40; ++i) {
        const Mat2 C = random_nonsingular(rng, 6, 36);
        const auto q = random_form(rng, 6), t = random_form(rng, 6);
        const Complex x = kitaoka_kloosterman(q, t, C).value();
        const Complex y = kitaoka_kloosterman(t, q, C.transpose()).value();
        CHECK(std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x)));
    }
}
