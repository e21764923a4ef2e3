#include "siegel/expsums.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace siegel {

namespace {

std::vector<i64> direct_hist(i64 a, i64 b, i64 c) {
    std::vector<i64> h(static_cast<std::size_t>(c), 0);
    for (i64 n = 0; n < c; ++n) {
        const i128 v = static_cast<i128>(a) * n * n + static_cast<i128>(b) * n;
        i128 r = v % c;
        if (r < 0) r += c;
        ++h[static_cast<std::size_t>(r)];
    }
    return h;
}

// Reinterpret a histogram over Z/u as one over Z/c (u | c): j/u = (j c/u)/c.
std::vector<i64> embed(const std::vector<i64>& h, i64 c) {
    const i64 u = static_cast<i64>(h.size());
    const i64 s = c / u;
    std::vector<i64> out(static_cast<std::size_t>(c), 0);
    for (i64 j = 0; j < u; ++j) out[static_cast<std::size_t>(j * s)] = h[static_cast<std::size_t>(j)];
    return out;
}

std::vector<i64> conv(const std::vector<i64>& x, const std::vector<i64>& y) {
    const std::size_t c = x.size();
    std::vector<i64> z(c, 0);
    for (std::size_t i = 0; i < c; ++i) {
        if (x[i] == 0) continue;
        for (std::size_t j = 0; j < c; ++j)
            if (y[j] != 0) z[(i + j) % c] += x[i] * y[j];
    }
    return z;
}

i64 first_prime_power(i64 m) {
    for (i64 p = 2; p * p <= m; ++p)
        if (m % p == 0) {
            i64 q = 1;
            while (m % p == 0) {
                m /= p;
                q *= p;
            }
            return q;
        }
    return m;
}

// gcd(a, m) == 1; G(a, b, uv) = G(av, b, u) G(au, b, v) for coprime u, v.
std::vector<i64> coprime_hist(i64 a, i64 b, i64 m) {
    const i64 u = first_prime_power(m);
    if (u == m) return direct_hist(a, b, m);
    const i64 v = m / u;
    const auto hu = coprime_hist(mod_floor(static_cast<i64>(static_cast<i128>(a) * v % u), u), mod_floor(b, u), u);
    const auto hv = coprime_hist(mod_floor(static_cast<i64>(static_cast<i128>(a) * u % v), v), mod_floor(b, v), v);
    return conv(embed(hu, m), embed(hv, m));
}

} // namespace

std::vector<i64> gauss_histogram_direct(i64 a, i64 b, i64 c) {
    if (c < 1) throw DomainError("gauss sum modulus must be >= 1");
    return direct_hist(mod_floor(a, c), mod_floor(b, c), c);
}

std::vector<i64> gauss_histogram(i64 a, i64 b, i64 c) {
    if (c < 1) throw DomainError("gauss sum modulus must be >= 1");
    a = mod_floor(a, c);
    b = mod_floor(b, c);
    const i64 g = std::gcd(a, c);
    const i64 m = c / g;
    if (b % g == 0) {
        // G(a, b, c) = g G(a/g, b/g, c/g)
        auto h = embed(coprime_hist(a / g, b / g, m), c);
        for (auto& x : h) x *= g;
        return h;
    }
    // n = n0 + m j: phases (a n0^2 + b n0)/c + b j/g; the second factor sums to zero
    std::vector<i64> s1(static_cast<std::size_t>(c), 0), s2(static_cast<std::size_t>(c), 0);
    for (i64 n0 = 0; n0 < m; ++n0) {
        const i128 v = (static_cast<i128>(a) * n0 * n0 + static_cast<i128>(b) * n0) % c;
        ++s1[static_cast<std::size_t>(v)];
    }
    for (i64 j = 0; j < g; ++j) ++s2[static_cast<std::size_t>(static_cast<i128>(b) * j * m % c)];
    return conv(s1, s2);
}

PhaseSum gauss_sum(i64 a, i64 b, i64 c) { return PhaseSum::from_histogram(gauss_histogram(a, b, c), c); }

PhaseSum gauss_sum_direct(i64 a, i64 b, i64 c) {
    return PhaseSum::from_histogram(gauss_histogram_direct(a, b, c), c);
}

bool is_symplectic(const Mat2& A, const Mat2& B, const Mat2& C, const Mat2& D) {
    return (A.transpose() * C).is_symmetric() && (B.transpose() * D).is_symmetric() &&
           A.transpose() * D - C.transpose() * B == Mat2::identity();
}

i64 minors_gcd(const Mat2& C, const Mat2& D) {
    const i64 r0[4] = {C.a, C.b, D.a, D.b};
    const i64 r1[4] = {C.c, C.d, D.c, D.d};
    i64 g = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            g = std::gcd(g, narrow_i64(static_cast<i128>(r0[i]) * r1[j] - static_cast<i128>(r0[j]) * r1[i]));
    return g;
}

SymplecticCompletion symplectic_complete(const SymplecticPair& pair) {
    const Mat2& C = pair.C;
    const Mat2& D = pair.D;
    if (!(C * D.transpose()).is_symmetric()) throw DomainError("C tD is not symmetric");
    if (minors_gcd(C, D) != 1) throw DomainError("(C D) is not primitive; no symplectic completion");

    // Integer left inverse X of K = [tD; -tC] by row reduction with L K = [H; 0].
    i128 K[4][2] = {{D.a, D.c}, {D.b, D.d}, {-C.a, -C.c}, {-C.b, -C.d}};
    i128 L[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    auto combine = [&](int p, int r, int col) {
        const i64 x = narrow_i64(K[p][col]), y = narrow_i64(K[r][col]);
        if (y == 0) return;
        const auto eg = ext_gcd(x, y);
        const i128 s = eg.x, t = eg.y, u = -y / eg.g, v = x / eg.g;
        for (int j = 0; j < 2; ++j) {
            const i128 kp = K[p][j], kr = K[r][j];
            K[p][j] = s * kp + t * kr;
            K[r][j] = u * kp + v * kr;
        }
        for (int j = 0; j < 4; ++j) {
            const i128 lp = L[p][j], lr = L[r][j];
            L[p][j] = s * lp + t * lr;
            L[r][j] = u * lp + v * lr;
        }
    };
    for (int r = 1; r < 4; ++r) combine(0, r, 0);
    for (int r = 2; r < 4; ++r) combine(1, r, 1);
    const i128 h00 = K[0][0], h01 = K[0][1], h11 = K[1][1];
    if (!((h00 == 1 || h00 == -1) && (h11 == 1 || h11 == -1)))
        throw std::logic_error("symplectic_complete: reduction did not reach a unimodular block");
    const i128 hi00 = h00, hi01 = -h01 * h00 * h11, hi11 = h11;
    i128 X[2][4];
    for (int j = 0; j < 4; ++j) {
        X[0][j] = hi00 * L[0][j] + hi01 * L[1][j];
        X[1][j] = hi11 * L[1][j];
    }
    const Mat2 A0{narrow_i64(X[0][0]), narrow_i64(X[0][1]), narrow_i64(X[1][0]), narrow_i64(X[1][1])};
    const Mat2 B0{narrow_i64(X[0][2]), narrow_i64(X[0][3]), narrow_i64(X[1][2]), narrow_i64(X[1][3])};

    // A0 tB0 - B0 tA0 = [[0, w], [-w, 0]]; shifting by X' = [[0, 0], [-w, 0]] fixes it.
    const i64 w = (A0 * B0.transpose() - B0 * A0.transpose()).b;
    const Mat2 Xp{0, 0, -w, 0};
    SymplecticCompletion out{A0 + Xp * C, B0 + Xp * D};
    if (!is_symplectic(out.A, out.B, C, D)) throw std::logic_error("symplectic_complete: verification failed");
    return out;
}

std::vector<SymplecticPair> enumerate_D_classes(const Mat2& C, const ElementaryDivisorDecomposition& e) {
    const i64 c1 = e.c1, c2 = e.c2, ratio = c2 / c1;
    const Mat2 delta = Mat2::diag(c1, c2);
    const Mat2 Ui = e.U.inverse().matrix();
    const Mat2 Vt = e.V.matrix().transpose();
    std::vector<SymplecticPair> out;
    for (i64 d1 = 0; d1 < c1; ++d1)
        for (i64 d2 = 0; d2 < c1; ++d2)
            for (i64 d4 = 0; d4 < c2; ++d4) {
                const Mat2 Dp{d1, d2, ratio * d2, d4};
                if (minors_gcd(delta, Dp) != 1) continue;
                out.push_back({C, Ui * Dp * Vt});
            }
    return out;
}

std::vector<SymplecticPair> enumerate_D_classes(const Mat2& C) {
    return enumerate_D_classes(C, elementary_divisors(C));
}

std::array<Rational, 3> d_class_key(const Mat2& C, const Mat2& D) {
    const i64 det = C.det();
    if (det == 0) throw DomainError("C is singular");
    const Mat2 R = C.adjugate() * D; // det * C^{-1} D
    if (!R.is_symmetric()) throw DomainError("C^{-1} D is not symmetric");
    return {Rational(R.a, det).frac(), Rational(R.b, det).frac(), Rational(R.d, det).frac()};
}

Rational kloosterman_phase(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& A,
                           const Mat2& C, const Mat2& D) {
    const i64 det = C.det();
    const Mat2 adj = C.adjugate();
    const i64 num = (A * adj * Q.doubled()).trace() + (adj * D * T.doubled()).trace();
    return Rational(num, 2 * det).frac();
}

DiagonalKloostermanTable::DiagonalKloostermanTable(i64 c1, i64 c2) : c1_(c1), c2_(c2) {
    if (c1 < 1 || c2 % c1 != 0) throw DomainError("diagonal Kloosterman table needs 0 < c1 | c2");
    den_ = narrow_i64(2 * static_cast<i128>(c1) * c2);
    const Mat2 delta = Mat2::diag(c1, c2);
    const ElementaryDivisorDecomposition e{c1, c2, Unimodular(), Unimodular()};
    const Mat2 adj = delta.adjugate();
    for (const auto& p : enumerate_D_classes(delta, e)) {
        const auto comp = symplectic_complete(p);
        const Mat2 G = comp.A * adj;
        const Mat2 H = adj * p.D;
        std::array<i64, 6> k = {2 * G.a, G.b + G.c, 2 * G.d, 2 * H.a, H.b + H.c, 2 * H.d};
        for (auto& x : k) x = mod_floor(x, den_);
        coeff_.push_back(k);
    }
}

std::vector<i64> DiagonalKloostermanTable::histogram(const HalfIntegralForm& Q, const HalfIntegralForm& T) const {
    const i64 v[6] = {mod_floor(Q.a, den_), mod_floor(Q.b, den_), mod_floor(Q.c, den_),
                      mod_floor(T.a, den_), mod_floor(T.b, den_), mod_floor(T.c, den_)};
    std::vector<i64> h(static_cast<std::size_t>(den_), 0);
    if (den_ < (i64{1} << 28)) { // 6 den^2 fits comfortably in i64
        for (const auto& k : coeff_) {
            const i64 n = k[0] * v[0] + k[1] * v[1] + k[2] * v[2] + k[3] * v[3] + k[4] * v[4] + k[5] * v[5];
            ++h[static_cast<std::size_t>(n % den_)];
        }
        return h;
    }
    for (const auto& k : coeff_) {
        i128 n = 0;
        for (int i = 0; i < 6; ++i) n += static_cast<i128>(k[static_cast<std::size_t>(i)]) * v[i];
        ++h[static_cast<std::size_t>(n % den_)];
    }
    return h;
}

PhaseSum DiagonalKloostermanTable::sum(const HalfIntegralForm& Q, const HalfIntegralForm& T) const {
    return PhaseSum::from_histogram(histogram(Q, T), den_);
}

namespace {

// small tables are kept for the life of the process
std::shared_ptr<const DiagonalKloostermanTable> diagonal_table(i64 c1, i64 c2) {
    if (c1 * c2 > 64) return std::make_shared<const DiagonalKloostermanTable>(c1, c2);
    static std::mutex mu;
    static std::map<std::pair<i64, i64>, std::shared_ptr<const DiagonalKloostermanTable>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{c1, c2}];
    if (!slot) slot = std::make_shared<const DiagonalKloostermanTable>(c1, c2);
    return slot;
}

} // namespace

PhaseSum kitaoka_kloosterman(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C) {
    if (C.det() == 0) throw DomainError("Kloosterman sum needs a nonsingular C");
    const auto e = elementary_divisors(C);
    PhaseSum s = diagonal_table(e.c1, e.c2)->sum(Q.act(e.U.matrix()), T.congruent(e.V.matrix()));
    s.set_modulus(2 * std::abs(C.det()));
    return s;
}

PhaseSum kitaoka_kloosterman_direct(const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C) {
    if (C.det() == 0) throw DomainError("Kloosterman sum needs a nonsingular C");
    PhaseSum s(2 * std::abs(C.det()));
    for (const auto& p : enumerate_D_classes(C)) {
        const auto comp = symplectic_complete(p);
        s.add(kloosterman_phase(Q, T, comp.A, p.C, p.D));
    }
    return s;
}

double kloosterman_envelope_shape(const HalfIntegralForm& T, const Mat2& C, double eps) {
    const auto e = elementary_divisors(C);
    const i64 t4 = T.congruent(e.V.matrix()).c;
    const double c1 = static_cast<double>(e.c1), c2 = static_cast<double>(e.c2);
    return c1 * c1 * std::pow(c2, 0.5 + eps) * std::sqrt(static_cast<double>(std::gcd(e.c2, t4)));
}

} // namespace siegel
