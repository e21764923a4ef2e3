#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <numeric>

#include "siegel/oracle.hpp"
#include "siegel/simd.hpp"

namespace siegel {

namespace {

bool symplectic(const Mat2& A, const Mat2& B, const Mat2& C, const Mat2& D) {
    const Mat2 ac = A.transpose() * C, bd = B.transpose() * D;
    return ac.b == ac.c && bd.b == bd.c && A.transpose() * D - C.transpose() * B == Mat2::identity();
}

i64 gcd_minors(const Mat2& C, const Mat2& D) {
    const i64 m[6] = {C.a * C.d - C.b * C.c, C.a * D.c - D.a * C.c, C.a * D.d - D.b * C.c,
                      C.b * D.c - D.a * C.d, C.b * D.d - D.b * C.d, D.a * D.d - D.b * D.c};
    i64 g = 0;
    for (i64 x : m) g = std::gcd(g, x);
    return g;
}

} // namespace

int CosetData::rank() const {
    if (C == Mat2{0, 0, 0, 0}) return 0;
    return C.det() != 0 ? 2 : 1;
}

void CosetData::validate(i64 N) const {
    if (!symplectic(A, B, C, D)) throw DomainError("coset matrix is not symplectic");
    if (C.a % N != 0 || C.b % N != 0 || C.c % N != 0 || C.d % N != 0)
        throw DomainError("lower-left block is not divisible by N");
}

i64 delta_bruteforce(const HalfIntegralForm& Q, const HalfIntegralForm& T, i64 box) {
    i64 n = 0;
    for (i64 a = -box; a <= box; ++a)
        for (i64 b = -box; b <= box; ++b)
            for (i64 c = -box; c <= box; ++c)
                for (i64 d = -box; d <= box; ++d) {
                    const i64 det = a * d - b * c;
                    if (det != 1 && det != -1) continue;
                    // U Q tU with rows (a, b), (c, d)
                    const i64 t1 = Q.a * a * a + Q.b * a * b + Q.c * b * b;
                    const i64 t4 = Q.a * c * c + Q.b * c * d + Q.c * d * d;
                    const i64 t2 = 2 * Q.a * a * c + Q.b * (a * d + b * c) + 2 * Q.c * b * d;
                    if (t1 == T.a && t2 == T.b && t4 == T.c) ++n;
                }
    return n;
}

std::vector<Mat2> dclass_reps_bruteforce(const Mat2& C, i64 box_multiplier) {
    const i64 det = C.det();
    if (det == 0) throw DomainError("C is singular");
    const i64 adet = std::abs(det), sgn = det > 0 ? 1 : -1;
    const i64 rows = std::max(std::abs(C.a) + std::abs(C.b), std::abs(C.c) + std::abs(C.d));
    const i64 box = box_multiplier * std::max(adet, rows);
    const Mat2 adj{C.d, -C.b, -C.c, C.a};
    std::map<std::array<i64, 3>, Mat2> seen;
    for (i64 d1 = -box; d1 <= box; ++d1)
        for (i64 d2 = -box; d2 <= box; ++d2)
            for (i64 d3 = -box; d3 <= box; ++d3)
                for (i64 d4 = -box; d4 <= box; ++d4) {
                    const Mat2 D{d1, d2, d3, d4};
                    // C tD symmetric
                    if (C.a * d3 + C.b * d4 != C.c * d1 + C.d * d2) continue;
                    if (gcd_minors(C, D) != 1) continue;
                    const Mat2 R = adj * D; // det * C^{-1} D
                    const std::array<i64, 3> key = {mod_floor(sgn * R.a, adet), mod_floor(sgn * R.b, adet),
                                                    mod_floor(sgn * R.d, adet)};
                    seen.emplace(key, D);
                }
    std::vector<Mat2> out;
    for (const auto& [k, d] : seen) out.push_back(d);
    return out;
}

i64 dclasses_bruteforce(const Mat2& C, i64 box_multiplier) {
    return static_cast<i64>(dclass_reps_bruteforce(C, box_multiplier).size());
}

std::optional<CosetData> complete_bruteforce(const Mat2& C, const Mat2& D, i64 box) {
    const i64 det = C.det();
    if (det == 0) throw DomainError("C is singular");
    const Mat2 adjCt = C.transpose().adjugate();
    for (i64 a1 = -box; a1 <= box; ++a1)
        for (i64 a2 = -box; a2 <= box; ++a2)
            for (i64 a3 = -box; a3 <= box; ++a3)
                for (i64 a4 = -box; a4 <= box; ++a4) {
                    const Mat2 A{a1, a2, a3, a4};
                    const Mat2 num = adjCt * (A.transpose() * D - Mat2::identity());
                    if (num.a % det || num.b % det || num.c % det || num.d % det) continue;
                    const Mat2 B{num.a / det, num.b / det, num.c / det, num.d / det};
                    if (symplectic(A, B, C, D)) return CosetData{A, B, C, D};
                }
    return std::nullopt;
}

Complex kloosterman_bruteforce(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C,
                               i64 box_multiplier) {
    const i64 det = C.det();
    const Mat2 adj{C.d, -C.b, -C.c, C.a};
    const Mat2 Qd{2 * Q.a, Q.b, Q.b, 2 * Q.c}, Td{2 * T.a, T.b, T.b, 2 * T.c};
    simd::ComplexNeumaier acc;
    for (const auto& D : dclass_reps_bruteforce(C, box_multiplier)) {
        std::optional<CosetData> m;
        for (i64 box = 2; !m && box <= 8; box += 2) m = complete_bruteforce(C, D, box);
        if (!m) throw std::runtime_error("kloosterman_bruteforce: no completion found in the search box");
        const i64 num = (m->A * adj * Qd).trace() + (adj * D * Td).trace();
        const Rational r = Rational(num, 2 * det).frac();
        acc.add(std::polar(1.0, 2.0 * std::numbers::pi * r.to_double()));
    }
    return acc.value();
}

} // namespace siegel
