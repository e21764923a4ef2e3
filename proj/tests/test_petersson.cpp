#include "doctest.h"

#include <cmath>
#include <map>
#include <numbers>

#include "siegel/expsums.hpp"
#include "siegel/oracle.hpp"
#include "siegel/petersson.hpp"

using namespace siegel;

namespace {

const double pi = std::numbers::pi;

TruncationParams small_caps() {
    TruncationParams p;
    p.c1_max_rank1 = 4;
    p.s4_max = 4;
    p.c1_max_rank2 = 2;
    p.c2_max_rank2 = 4;
    p.U_trace_cap = 6;
    p.U_trace_max = 6;
    return p;
}

} // namespace

TEST_CASE("normalization constant") {
    const HalfIntegralForm one{1, 0, 1}, two{1, 0, 2};
    CHECK(normalization_constant(3, one) == doctest::Approx(1 / (128 * pi * pi)).epsilon(1e-14));
    CHECK(normalization_constant(4, one) == doctest::Approx(0.75 * pi / std::pow(4 * pi, 5)).epsilon(1e-14));
    for (int k : {4, 6, 10})
        CHECK(normalization_constant(k, two) / normalization_constant(k, one) ==
              doctest::Approx(std::pow(2.0, 1.5 - k)).epsilon(1e-14));
}

TEST_CASE("sigma0 counts GL2 equivalences") {
    const HalfIntegralForm one{1, 0, 1}, two{1, 0, 2}, hex{1, 1, 1}, gen{2, 1, 3};
    CHECK(sigma0(one, one).value == Complex(8, 0));
    CHECK(sigma0(one, two).value == Complex(0, 0));
    CHECK(sigma0(two, two).value == Complex(4, 0));
    CHECK(sigma0(hex, hex).value == Complex(12, 0));
    CHECK(sigma0(gen, gen.act(Mat2{2, 1, 1, 1})).value == Complex(2, 0));
    CHECK(sigma0(gen, gen).tail_estimate == 0);
}

TEST_CASE("weights must be even and at least 4") {
    const HalfIntegralForm one{1, 0, 1};
    for (int k : {1, 2, 3, 5, 7}) {
        CHECK_THROWS_AS(check_weight(k), DomainError);
        CHECK_THROWS_AS(petersson_geometric(k, 1, one, one, small_caps()), DomainError);
    }
    CHECK_NOTHROW(check_weight(4));
    CHECK_THROWS_AS(petersson_geometric(4, 0, one, one, small_caps()), DomainError);
    CHECK_THROWS_AS(petersson_geometric(4, 1, HalfIntegralForm{1, 3, 1}, one, small_caps()), DomainError);
    auto bad = small_caps();
    bad.U_trace_max = 1;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("doubled caps") {
    const auto p = small_caps(), d = p.doubled();
    CHECK(d.c1_max_rank1 == 8);
    CHECK(d.s4_max == 8);
    CHECK(d.c1_max_rank2 == 4);
    CHECK(d.c2_max_rank2 == 8);
    CHECK(d.U_trace_cap == 12);
    CHECK(d.U_trace_max == 12);
    CHECK(d.prune_tol == p.prune_tol);
}

TEST_CASE("rank 1: phase denominator divides 2 N c1 s4") {
    const HalfIntegralForm Q{2, 1, 3}, T{3, 1, 2};
    for (i64 N : {1, 3})
        for (i64 c1 : {1, 2, 5})
            for (i64 s4 : {2, 3, 4}) {
                int seen = 0;
                for_each_rank1_coset(N, Q, T, c1, s4, [&](const Rank1Coset& c) {
                    const Rational ph = rank1_phase(N, Q, T, c);
                    CHECK((2 * N * c1 * s4) % ph.den() == 0);
                    CHECK(ph.num() >= 0);
                    CHECK(ph.num() < ph.den());
                    ++seen;
                });
                if (s4 == 2 || s4 == 3) CHECK(seen > 0);
            }
}

TEST_CASE("rank 1: coset matrices are symplectic with the right C") {
    const HalfIntegralForm Q{1, 0, 1}, T{1, 1, 2};
    for (i64 N : {1, 2})
        for_each_rank1_coset(N, Q, T, 3, 2, [&](const Rank1Coset& c) {
            const auto M = rank1_coset_matrix(N, c);
            CHECK_NOTHROW(M.validate(N));
            CHECK(M.rank() == 1);
        });
}

TEST_CASE("rank 1: group histogram equals the sum of single terms") {
    for (auto [Q, T] : {std::pair{HalfIntegralForm{1, 0, 1}, HalfIntegralForm{1, 0, 1}},
                        std::pair{HalfIntegralForm{2, 1, 3}, HalfIntegralForm{3, 1, 2}},
                        std::pair{HalfIntegralForm{1, 1, 1}, HalfIntegralForm{1, 0, 2}}})
        for (int k : {4, 10})
            for (i64 N : {1, 2})
                for (i64 c1 : {1, 3})
                    for (i64 s4 : {1, 2, 3}) {
                        Complex direct = 0;
                        for_each_rank1_coset(N, Q, T, c1, s4,
                                             [&](const Rank1Coset& c) { direct += rank1_term(k, N, Q, T, c); });
                        const Complex grouped = rank1_group(k, N, Q, T, c1, s4);
                        CHECK(std::abs(grouped - direct) <= 1e-12 * (1 + std::abs(direct)));
                    }
}

TEST_CASE("rank 1: closed form agrees with the integral on a few cosets") {
    const HalfIntegralForm Q{1, 0, 1}, T{1, 1, 1};
    int checked = 0;
    for_each_rank1_coset(2, Q, T, 1, 1, [&](const Rank1Coset& c) {
        if (checked >= 3 || c.d4 != 1) return;
        const auto r = h_bruteforce(6, Q, T, rank1_coset_matrix(2, c));
        CHECK(std::abs(r.value - rank1_term(6, 2, Q, T, c)) < 1e-6);
        ++checked;
    });
    CHECK(checked == 3);
}

TEST_CASE("rank 2: generated C cover a box exactly once") {
    const HalfIntegralForm T{1, 0, 1};
    std::map<Mat2, int> hits;
    for_each_rank2_coset(T, 3, 18, 40.0, [&](const Rank2Coset& c) {
        CHECK(c.C.det() != 0);
        CHECK(std::abs(c.C.det()) == c.c1 * c.c2);
        if (std::abs(c.C.a) <= 3 && std::abs(c.C.b) <= 3 && std::abs(c.C.c) <= 3 && std::abs(c.C.d) <= 3)
            ++hits[c.C];
    });
    int total = 0;
    for (i64 a = -3; a <= 3; ++a)
        for (i64 b = -3; b <= 3; ++b)
            for (i64 c = -3; c <= 3; ++c)
                for (i64 d = -3; d <= 3; ++d) {
                    const Mat2 C{a, b, c, d};
                    if (C.det() == 0) continue;
                    ++total;
                    CHECK(hits[C] == 1);
                }
    CHECK(hits.size() == static_cast<std::size_t>(total));
}

TEST_CASE("rank 2: traces are ordered and bounded by the cap") {
    const HalfIntegralForm T{2, 1, 3};
    int n = 0;
    for_each_rank2_coset(T, 2, 4, 5.0, [&](const Rank2Coset& c) {
        CHECK(c.trace <= 5.0 + 1e-12);
        CHECK(c.c2 % c.c1 == 0);
        ++n;
    });
    CHECK(n > 0);
}

TEST_CASE("rank 2: the grouped sum equals a sum of independent single terms") {
    const HalfIntegralForm Q{1, 0, 1}, T{1, 1, 1};
    auto p = small_caps();
    p.prune_tol = 1e-300;
    for (int k : {6, 10})
        for (i64 N : {1, 2}) {
            Complex direct = 0;
            for_each_rank2_coset(T, p.c1_max_rank2, p.c2_max_rank2, p.U_trace_cap,
                                 [&](const Rank2Coset& c) { direct += rank2_term(k, N, Q, T, c.C); });
            const auto s = sigma2(k, N, Q, T, p);
            CHECK(std::abs(s.value - direct) <= 1e-10 * (1 + std::abs(direct)));
            CHECK(s.tail_estimate > 0);
        }
}

TEST_CASE("rank 2: the a-priori bound dominates every term") {
    const HalfIntegralForm Q{2, 1, 2}, T{1, 0, 2};
    const TruncationParams p;
    int violations = 0;
    for (int k : {4, 6, 10})
        for_each_rank2_coset(T, 2, 6, 6.0, [&](const Rank2Coset& c) {
            if (std::abs(rank2_term(k, 1, Q, T, c.C)) > rank2_bound(k, 1, Q, T, c.C, p)) ++violations;
        });
    CHECK(violations == 0);
}

TEST_CASE("rank 2: the 8 pi^2 term matches the integral for C = 1") {
    const HalfIntegralForm Q{1, 0, 1}, T{1, 1, 1};
    OracleParams op;
    op.radius = 10;
    op.quad_n = 8;
    const CosetData M{Mat2{0, 0, 0, 0}, Mat2{-1, 0, 0, -1}, Mat2{1, 0, 0, 1}, Mat2{0, 0, 0, 0}};
    const auto r = h_bruteforce(6, Q, T, M, op);
    const Complex v = rank2_term(6, 1, Q, T, Mat2::identity());
    CHECK(std::abs(r.value - v) <= 1e-4 * std::abs(v));
}

TEST_CASE("geometric side: assembly, delta and worker independence") {
    const HalfIntegralForm Q{1, 0, 1}, T{1, 0, 1};
    auto p = small_caps();
    const auto a = petersson_geometric(10, 3, Q, T, p);
    CHECK(a.delta == 8);
    CHECK(a.A == a.sigma0.value + a.sigma1.value + a.sigma2.value);
    CHECK(a.E == a.A - Complex(8, 0));
    CHECK(a.tail_total() == a.sigma1.tail_estimate + a.sigma2.tail_estimate);
    p.workers = 3;
    const auto b = petersson_geometric(10, 3, Q, T, p);
    CHECK(a.A == b.A);
    CHECK(a.tail_total() == b.tail_total());
    CHECK(petersson_geometric(10, 5, Q, T, small_caps()).delta == 8);
}
