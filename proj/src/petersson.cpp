#include "siegel/petersson.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <tuple>

#include "siegel/expsums.hpp"
#include "siegel/parallel.hpp"
#include "siegel/simd.hpp"
#include "siegel/specfun.hpp"

namespace siegel {

namespace {

constexpr double kPi = std::numbers::pi;

void check_forms(const HalfIntegralForm& Q, const HalfIntegralForm& T) {
    if (!Q.is_positive_definite() || !T.is_positive_definite())
        throw DomainError("Q and T must be positive definite");
}

void check_level(i64 N) {
    if (N < 1) throw DomainError("level N must be >= 1");
}

// Canonical sign for "up to sign": first nonzero coordinate positive.
bool canonical_sign(const Vec2& u) { return u[0] > 0 || (u[0] == 0 && u[1] > 0); }

// Tail from two rings of bounds beyond the evaluated box: ring1 + ring2 + a
// geometric continuation with ratio ring2 / ring1.
double ring_tail(double ring1, double ring2) {
    if (ring2 <= 0) return ring1;
    if (ring1 <= 0) return INFINITY;
    const double r = ring2 / ring1;
    if (r >= 0.9) return INFINITY;
    return ring1 + ring2 / (1.0 - r);
}

Complex sum_in_order(const std::vector<Complex>& v) {
    simd::ComplexNeumaier acc;
    for (const auto& z : v) acc.add(z);
    return acc.value();
}

double sum_in_order(const std::vector<double>& v) {
    simd::Neumaier acc;
    for (double x : v) acc.add(x);
    return acc.value();
}

i64 mul_mod(i64 a, i64 b, i64 m) { return static_cast<i64>(static_cast<i128>(a) * b % m); }

} // namespace

// ---------------------------------------------------------------- params

void TruncationParams::validate() const {
    if (c1_max_rank1 < 1 || s4_max < 1 || c1_max_rank2 < 1 || c2_max_rank2 < 1)
        throw DomainError("truncation caps must be positive integers");
    if (!(U_trace_cap > 0) || !(quadrature_tol > 0) || !(prune_tol > 0))
        throw DomainError("U_trace_cap, quadrature_tol and prune_tol must be positive");
    if (!(U_trace_max >= U_trace_cap) || !(rank2_tail_target > 0))
        throw DomainError("need U_trace_max >= U_trace_cap and rank2_tail_target > 0");
    if (workers < 1) throw DomainError("workers must be >= 1");
    if (!(kloosterman_kappa > 0) || !(kloosterman_eps >= 0) || bessel_envelope < 0)
        throw DomainError("envelope constants must be positive");
}

TruncationParams TruncationParams::doubled() const {
    TruncationParams p = *this;
    p.c1_max_rank1 *= 2;
    p.s4_max *= 2;
    p.c1_max_rank2 *= 2;
    p.c2_max_rank2 *= 2;
    p.U_trace_cap *= 2;
    p.U_trace_max *= 2;
    return p;
}

// ---------------------------------------------------------------- rank 0

double normalization_constant(int k, const HalfIntegralForm& Q) {
    if (k < 3) throw DomainError("normalization_constant: k must be >= 3");
    if (!Q.is_positive_definite()) throw DomainError("normalization_constant: Q must be positive definite");
    const double detQ = Q.determinant().to_double();
    return std::sqrt(kPi) * std::pow(4 * kPi, 3 - 2 * k) * std::tgamma(k - 1.5) * std::tgamma(k - 2.0) *
           std::pow(detQ, 1.5 - k);
}

void check_weight(int k) {
    if (k % 2 != 0) throw DomainError("weight k must be even: the rank-1 closed form carries (-1)^{k/2}");
    if (k < 4) throw DomainError("weight k must be >= 4");
}

PartialSum sigma0(const HalfIntegralForm& Q, const HalfIntegralForm& T) {
    check_forms(Q, T);
    PartialSum s;
    s.value = Complex(static_cast<double>(delta(Q, T)), 0.0);
    s.terms_used = 1;
    return s;
}

// ---------------------------------------------------------------- rank 1

namespace {

struct Rank1Data {
    i64 m, p1, p2, p4, s1, s2, s4;
};

Rank1Data rank1_data(i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const Rank1Coset& c) {
    check_level(N);
    if (c.c1 < 1) throw DomainError("rank 1: c1 must be >= 1");
    if (c.d4 != 1 && c.d4 != -1) throw DomainError("rank 1: d4 must be +-1");
    const i64 m = N * c.c1;
    if (std::gcd(c.d1, m) != 1) throw DomainError("rank 1: d1 must be a unit mod N c1");
    const auto P = Q.act(c.U);
    const auto S = T.act(c.V.inverse());
    return {m, P.a, P.b, P.c, S.a, S.b, S.c};
}

// numerator of the phase over 2 m s4 (mod 2 m s4), a1 = d1^{-1} mod m
i64 rank1_numerator(const Rank1Data& r, i64 d1, i64 a1, i64 d2, i64 d4) {
    const i64 den = 2 * r.m * r.s4;
    const i128 inner = static_cast<i128>(a1) * r.s4 * d2 * d2 - (static_cast<i128>(a1) * d4 * r.p2 - r.s2) * d2 +
                       static_cast<i128>(a1) * r.p1 + static_cast<i128>(d1) * r.s1;
    // the d4 p2 s2 term enters with a minus sign (fitted against h_bruteforce)
    i128 num = 2 * static_cast<i128>(r.s4) * inner - static_cast<i128>(d4) * r.p2 * r.s2;
    num %= den;
    if (num < 0) num += den;
    return static_cast<i64>(num);
}

// k-dependent amplitude of one coset, without the phase
double rank1_amplitude(int k, i64 m, i64 s4, const HalfIntegralForm& Q, const HalfIntegralForm& T) {
    const double dQ = Q.determinant().to_double(), dT = T.determinant().to_double();
    const double x = 4 * kPi * std::sqrt(dT * dQ) / (static_cast<double>(m) * static_cast<double>(s4));
    const double sign = (k / 2) % 2 == 0 ? 1.0 : -1.0;
    return sign * std::sqrt(2.0) * kPi * std::pow(dQ, 0.75 - 0.5 * k) * std::pow(dT, 0.5 * k - 0.75) /
           std::sqrt(static_cast<double>(s4)) * std::pow(static_cast<double>(m), -1.5) * bessel_half(k, x);
}

} // namespace

Rational rank1_phase(i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const Rank1Coset& c) {
    const auto r = rank1_data(N, Q, T, c);
    if (r.p4 != r.s4) throw DomainError("rank1_phase: p4 != s4");
    const i64 a1 = mod_inverse(mod_floor(c.d1, r.m), r.m);
    return Rational(rank1_numerator(r, c.d1, a1, c.d2, c.d4), 2 * r.m * r.s4);
}

Complex rank1_term(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const Rank1Coset& c) {
    check_weight(k);
    check_forms(Q, T);
    const auto r = rank1_data(N, Q, T, c);
    if (r.p4 != r.s4) return 0.0;
    const Rational ph = rank1_phase(N, Q, T, c);
    return rank1_amplitude(k, r.m, r.s4, Q, T) *
           std::polar(1.0, 2 * kPi * static_cast<double>(ph.num()) / static_cast<double>(ph.den()));
}

CosetData rank1_coset_matrix(i64 N, const Rank1Coset& c) {
    check_level(N);
    const Mat2 Ui = c.U.inverse().matrix(), Vi = c.V.inverse().matrix();
    const Mat2 Cp{N * c.c1, 0, 0, 0}, Dp{c.d1, c.d2, 0, c.d4};
    const Mat2 C = Ui * Cp * c.V.matrix().transpose();
    const Mat2 D = Ui * Dp * Vi;
    const auto comp = symplectic_complete({C, D});
    return {comp.A, comp.B, C, D};
}

void for_each_rank1_coset(i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, i64 c1, i64 s4,
                          const std::function<void(const Rank1Coset&)>& fn) {
    check_level(N);
    const i64 m = N * c1;
    for (const Vec2& w : primitive_vectors_with_value(T, s4)) {
        const Unimodular V = complete_column(Vec2{w[1], -w[0]}, 0);
        for (const Vec2& u : primitive_vectors_with_value(Q, s4)) {
            if (!canonical_sign(u)) continue;
            const Unimodular U = complete_row(u, 1);
            for (i64 d4 : {1, -1})
                for (i64 d1 = 0; d1 < m; ++d1) {
                    if (std::gcd(d1, m) != 1) continue;
                    for (i64 d2 = 0; d2 < m; ++d2) fn(Rank1Coset{c1, U, V, d1, d2, d4});
                }
        }
    }
}

Complex rank1_group(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, i64 c1, i64 s4) {
    const i64 m = N * c1, den = 2 * m * s4;
    std::vector<i64> counts(static_cast<std::size_t>(den), 0);
    std::vector<std::pair<i64, i64>> units;
    for (i64 d1 = 0; d1 < m; ++d1)
        if (std::gcd(d1, m) == 1) units.emplace_back(d1, mod_inverse(d1, m));
    for (const Vec2& w : primitive_vectors_with_value(T, s4)) {
        const Unimodular V = complete_column(Vec2{w[1], -w[0]}, 0);
        const auto S = T.act(V.inverse());
        for (const Vec2& u : primitive_vectors_with_value(Q, s4)) {
            if (!canonical_sign(u)) continue;
            const auto P = Q.act(complete_row(u, 1));
            const Rank1Data r{m, P.a, P.b, P.c, S.a, S.b, S.c};
            for (i64 d4 : {1, -1})
                for (auto [d1, a1] : units) {
                    // phase numerator is quadratic in d2: walk it by differences
                    const i64 base = rank1_numerator(r, d1, a1, 0, d4);
                    // f(d2+1) - f(d2) = 2 s4 (a1 s4 (2 d2 + 1) - (a1 d4 p2 - s2))
                    const i64 lin = mod_floor(2 * s4 * mod_floor(-(mul_mod(a1 * d4, r.p2, den)) + r.s2 + mul_mod(a1, s4, den), den), den);
                    const i64 quad = mod_floor(4 * mul_mod(a1, s4 * s4, den), den);
                    i64 f = base, step = lin;
                    for (i64 d2 = 0; d2 < m; ++d2) {
                        ++counts[static_cast<std::size_t>(f)];
                        f += step;
                        if (f >= den) f -= den;
                        step += quad;
                        if (step >= den) step -= den;
                    }
                }
        }
    }
    return rank1_amplitude(k, m, s4, Q, T) * histogram_value(counts, den);
}

namespace {

struct Rank1Bounds {
    int k;
    i64 N;
    double base, x0, nu, gamma, E;
    std::vector<i64> nT, nQ; // indexed by s4

    double bessel(double x) const { return std::min(std::pow(0.5 * x, nu) / gamma, E / std::sqrt(x)); }

    // |group| <= amplitude * #w * #u * 2 phi(m) * max |Gauss sum over d2|
    double group(i64 c1, i64 s4) const {
        const i64 cnt = nT[static_cast<std::size_t>(s4)] * nQ[static_cast<std::size_t>(s4)];
        if (cnt == 0) return 0;
        const i64 m = N * c1;
        const double md = static_cast<double>(m), sd = static_cast<double>(s4);
        const double gauss = 2 * std::sqrt(static_cast<double>(std::gcd(s4, m)) * md);
        return base / std::sqrt(sd) * std::pow(md, -1.5) * bessel(x0 / (md * sd)) * static_cast<double>(cnt) * 2 *
               static_cast<double>(euler_phi(m)) * gauss;
    }
};

} // namespace

PartialSum sigma1(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const TruncationParams& p) {
    check_weight(k);
    check_level(N);
    check_forms(Q, T);
    p.validate();
    const double dQ = Q.determinant().to_double(), dT = T.determinant().to_double();
    Rank1Bounds b;
    b.k = k;
    b.N = N;
    b.base = std::sqrt(2.0) * kPi * std::pow(dQ, 0.75 - 0.5 * k) * std::pow(dT, 0.5 * k - 0.75);
    b.x0 = 4 * kPi * std::sqrt(dT * dQ);
    b.nu = k - 1.5;
    b.gamma = std::tgamma(b.nu + 1);
    b.E = p.bessel_envelope > 0 ? p.bessel_envelope : bessel_envelope(k);
    const i64 s4_far = 4 * p.s4_max, c1_far = 4 * p.c1_max_rank1;
    b.nT.assign(static_cast<std::size_t>(s4_far + 1), 0);
    b.nQ.assign(static_cast<std::size_t>(s4_far + 1), 0);
    for (i64 s = 1; s <= s4_far; ++s) {
        b.nT[static_cast<std::size_t>(s)] = repr_count(s, T);
        b.nQ[static_cast<std::size_t>(s)] = repr_count(s, Q) / 2;
    }

    PartialSum out;
    std::vector<std::pair<i64, i64>> items;
    std::vector<double> pruned;
    for (i64 c1 = 1; c1 <= p.c1_max_rank1; ++c1)
        for (i64 s4 = 1; s4 <= p.s4_max; ++s4) {
            const double g = b.group(c1, s4);
            if (g == 0) continue;
            if (g < p.prune_tol) {
                pruned.push_back(g);
                continue;
            }
            items.emplace_back(c1, s4);
        }
    const auto values = parallel_map<Complex>(items.size(), p.workers, [&](std::size_t i) {
        return rank1_group(k, N, Q, T, items[i].first, items[i].second);
    });
    out.value = sum_in_order(values);
    out.terms_used = static_cast<i64>(items.size());
    out.terms_pruned = static_cast<i64>(pruned.size());

    // rings (caps, 2 caps] and (2 caps, 4 caps] in both directions
    double ring[2] = {0, 0};
    for (i64 c1 = 1; c1 <= c1_far; ++c1)
        for (i64 s4 = 1; s4 <= s4_far; ++s4) {
            const int level = (c1 <= p.c1_max_rank1 && s4 <= p.s4_max)               ? 0
                              : (c1 <= 2 * p.c1_max_rank1 && s4 <= 2 * p.s4_max) ? 1
                                                                                  : 2;
            if (level > 0) ring[level - 1] += b.group(c1, s4);
        }
    out.tail_estimate = sum_in_order(pruned) + ring_tail(ring[0], ring[1]);
    return out;
}

// ---------------------------------------------------------------- rank 2

Complex rank2_term(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C,
                   double quadrature_tol) {
    check_weight(k);
    check_level(N);
    check_forms(Q, T);
    if (C.det() == 0) throw DomainError("rank2_term: C must be nonsingular");
    const Mat2 NC{N * C.a, N * C.b, N * C.c, N * C.d};
    const double det = std::abs(static_cast<double>(NC.det()));
    const Complex K = kitaoka_kloosterman(Q, T, NC).value();
    const auto e = eigen_pair(Q, T, NC);
    const double ratio = T.determinant().to_double() / Q.determinant().to_double();
    return 8 * kPi * kPi * std::pow(ratio, 0.5 * k - 0.75) * std::pow(det, -1.5) * K *
           kernel_integral(k, e.s1, e.s2, quadrature_tol);
}

double rank2_bound(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const Mat2& C,
                   const TruncationParams& p) {
    const Mat2 NC{N * C.a, N * C.b, N * C.c, N * C.d};
    const double det = std::abs(static_cast<double>(NC.det()));
    const double ratio = T.determinant().to_double() / Q.determinant().to_double();
    const auto e = eigen_pair(Q, T, NC);
    return 8 * kPi * kPi * std::pow(ratio, 0.5 * k - 0.75) * std::pow(det, -1.5) * p.kloosterman_kappa *
           kloosterman_envelope_shape(T, NC, p.kloosterman_eps) * kernel_bound(k, e, p.bessel_envelope);
}

std::vector<Unimodular> gl2_with_trace_at_most(const HalfIntegralForm& B, i64 X) {
    if (!B.is_positive_definite()) throw DomainError("gl2_with_trace_at_most: form must be positive definite");
    std::vector<Unimodular> out;
    const i64 mB = form_minimum(B);
    const i64 R = X - mB; // room left for the first column
    if (R < mB) return out;
    const double d4 = static_cast<double>(B.det4());
    const i64 b0 = static_cast<i64>(std::floor(std::sqrt(4.0 * static_cast<double>(B.c) * R / d4))) + 1;
    const i64 b1 = static_cast<i64>(std::floor(std::sqrt(4.0 * static_cast<double>(B.a) * R / d4))) + 1;
    for (i64 x0 = -b0; x0 <= b0; ++x0)
        for (i64 x1 = -b1; x1 <= b1; ++x1) {
            const Vec2 x{x0, x1};
            if (std::gcd(x0, x1) != 1) continue;
            const i64 bx = B.value(x);
            if (bx > R) continue;
            const i64 room = X - bx;
            const auto eg = ext_gcd(x0, x1); // x0 s + x1 t = 1
            for (i64 sg : {1, -1}) {
                const Vec2 y0{-eg.y * sg, eg.x * sg}; // det [x y0] = sg
                // B[y0 + t x] = bx t^2 + polar(x, y0) t + B[y0] <= room
                const double qa = static_cast<double>(bx), qb = static_cast<double>(B.polar(x, y0)),
                             qc = static_cast<double>(B.value(y0) - room);
                const double disc = qb * qb - 4 * qa * qc;
                if (disc < 0) continue;
                const double sq = std::sqrt(disc);
                i64 t0 = static_cast<i64>(std::floor((-qb - sq) / (2 * qa))) - 1;
                i64 t1 = static_cast<i64>(std::ceil((-qb + sq) / (2 * qa))) + 1;
                for (i64 t = t0; t <= t1; ++t) {
                    const Vec2 y{y0[0] + t * x0, y0[1] + t * x1};
                    if (B.value(y) > room) continue;
                    out.emplace_back(Mat2{x0, y[0], x1, y[1]});
                }
            }
        }
    return out;
}

namespace {

struct Rank2Group {
    i64 c1, c2;
    Unimodular V, U1;
    HalfIntegralForm B; // T[V diag(c2/c1, 1) U1], reduced; A = B / c2^2
};

template <class Fn>
void for_each_rank2_group(const HalfIntegralForm& T, i64 c1_max, i64 c2_max, Fn&& fn) {
    for (i64 c1 = 1; c1 <= c1_max; ++c1)
        for (i64 c2 = c1; c2 <= c2_max; c2 += c1) {
            const i64 n = c2 / c1;
            for (const Unimodular& V : coset_reps_P(n)) {
                const auto B0 = T.congruent(V.matrix() * Mat2::diag(n, 1));
                const auto red = gauss_reduce(B0); // red.reduced = B0[tU]
                fn(Rank2Group{c1, c2, V, red.U.transpose(), red.reduced});
            }
        }
}

std::vector<Rank2Group> rank2_groups(const HalfIntegralForm& T, i64 c1_max, i64 c2_max) {
    std::vector<Rank2Group> out;
    for_each_rank2_group(T, c1_max, c2_max, [&](const Rank2Group& g) { out.push_back(g); });
    return out;
}

i64 trace_cap_int(double cap, i64 c2) {
    return static_cast<i64>(std::floor(cap * static_cast<double>(c2) * static_cast<double>(c2) + 1e-9));
}

Mat2 rank2_C(const Rank2Group& g, const Unimodular& U) {
    const Unimodular W = g.U1 * U;
    return W.inverse().matrix() * Mat2::diag(g.c1, g.c2) * g.V.inverse().matrix();
}

} // namespace

void for_each_rank2_coset(const HalfIntegralForm& T, i64 c1_max, i64 c2_max, double trace_cap,
                          const std::function<void(const Rank2Coset&)>& fn) {
    if (!T.is_positive_definite()) throw DomainError("for_each_rank2_coset: T must be positive definite");
    for (const auto& g : rank2_groups(T, c1_max, c2_max)) {
        const double c22 = static_cast<double>(g.c2) * static_cast<double>(g.c2);
        for (const Unimodular& U : gl2_with_trace_at_most(g.B, trace_cap_int(trace_cap, g.c2))) {
            const Mat2 Uu = U.matrix();
            const double tr = static_cast<double>(g.B.value(Uu.col(0)) + g.B.value(Uu.col(1))) / c22;
            fn(Rank2Coset{g.c1, g.c2, g.V, g.U1, U, rank2_C(g, U), tr});
        }
    }
}

namespace {

// Bound data shared by every C of one (c1, c2, V) group: det NC, det P and the
// Kloosterman envelope (with the group's V) do not depend on U.
struct Rank2GroupBound {
    int k;
    double detP, base, lam, N2, E;
    double rho; // density of U with trace(A[U]) <= X, about 12 X / sqrt(det A)

    double kernel(double s1) const {
        EigenPair e;
        e.s1 = std::max(s1, std::pow(detP, 0.25));
        e.s2 = std::sqrt(detP) / e.s1;
        e.detP = detP;
        e.traceP = e.s1 * e.s1 + e.s2 * e.s2;
        return kernel_bound(k, e, E);
    }
    // trace P >= lambda_min(Q) trace(A[U]) / N^2 and s1^2 >= trace P / 2
    double at_trace(double t) const { return base * kernel(std::sqrt(0.5 * lam * t / N2)); }
};

// int_t^inf at_trace(s) ds on a geometric grid t_lo e^{i h}, read back by
// log-log interpolation; one table serves every group with the same bound data
struct TailTable {
    static constexpr int n = 400;
    static constexpr double h = 60.0 / n;
    double log_lo = 0;
    std::vector<double> F, g;

    TailTable(const Rank2GroupBound& gb, double t_lo) : log_lo(std::log(t_lo)), F(n + 1, 0.0), g(n + 1, 0.0) {
        g[n] = gb.at_trace(t_lo * std::exp(n * h));
        double prev = g[n] * t_lo * std::exp(n * h);
        for (int i = n - 1; i >= 0; --i) {
            const double t = t_lo * std::exp(i * h);
            g[static_cast<std::size_t>(i)] = gb.at_trace(t);
            const double cur = g[static_cast<std::size_t>(i)] * t;
            F[static_cast<std::size_t>(i)] = F[static_cast<std::size_t>(i + 1)] + 0.5 * h * (cur + prev);
            prev = cur;
        }
    }
    double from(double t0) const {
        const double x = std::max(0.0, (std::log(t0) - log_lo) / h);
        const int i = static_cast<int>(x);
        if (i >= n) return 0;
        const double f = x - i, a = F[static_cast<std::size_t>(i)], b = F[static_cast<std::size_t>(i + 1)];
        if (a > 0 && b > 0) return std::exp((1 - f) * std::log(a) + f * std::log(b));
        return (1 - f) * a + f * b;
    }
    // smallest trace with at_trace <= beta, roughly (at_trace is decreasing)
    double cut(double beta) const {
        if (g[0] <= beta) return std::exp(log_lo);
        const auto it = std::lower_bound(g.begin(), g.end(), beta, std::greater<>());
        if (it == g.end()) return std::exp(log_lo + n * h);
        const auto i = static_cast<std::size_t>(it - g.begin());
        const double a = std::log(g[i - 1]), b = std::log(std::max(g[i], 1e-300));
        const double f = b < a ? (a - std::log(beta)) / (a - b) : 1.0;
        return std::exp(log_lo + h * (static_cast<double>(i - 1) + f));
    }
};

} // namespace

PartialSum sigma2(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T, const TruncationParams& p) {
    check_weight(k);
    check_level(N);
    check_forms(Q, T);
    p.validate();
    const double dQ = Q.determinant().to_double(), dT = T.determinant().to_double();
    const double pref = 8 * kPi * kPi * std::pow(dT / dQ, 0.5 * k - 0.75);
    const double lam = 0.5 * (static_cast<double>(Q.a + Q.c) -
                              std::hypot(static_cast<double>(Q.a - Q.c), static_cast<double>(Q.b)));
    const double E = p.bessel_envelope > 0 ? p.bessel_envelope : bessel_envelope(k);
    const double Nd = static_cast<double>(N);

    // Kloosterman tables for diag(N c1, N c2), built on first use
    std::mutex table_mu;
    std::map<std::pair<i64, i64>, std::shared_ptr<const DiagonalKloostermanTable>> tables;
    auto table = [&](i64 c1, i64 c2) {
        std::lock_guard lock(table_mu);
        auto& slot = tables[{c1, c2}];
        if (!slot) slot = std::make_shared<const DiagonalKloostermanTable>(N * c1, N * c2);
        return slot;
    };

    // the kernel depends on (det P, trace P) only, and both repeat across groups
    std::mutex kernel_mu;
    std::map<std::array<i64, 4>, double> kernel_memo;
    auto kernel = [&](const EigenPair& e) {
        const std::array<i64, 4> key{e.detP_exact.num(), e.detP_exact.den(), e.traceP_exact.num(),
                                     e.traceP_exact.den()};
        {
            std::lock_guard lock(kernel_mu);
            if (auto it = kernel_memo.find(key); it != kernel_memo.end()) return it->second;
        }
        const double v = kernel_integral(k, e.s1, e.s2, p.quadrature_tol);
        std::lock_guard lock(kernel_mu);
        kernel_memo.emplace(key, v);
        return v;
    };

    std::mutex tail_mu;
    std::map<std::tuple<i64, i64, i64>, std::shared_ptr<const TailTable>> tail_tables;

    // pass 1: bound data per group. Ring groups only add to the ring sums and
    // are not kept (there are ~15 of them per inside group).
    struct Plan {
        std::optional<Rank2GroupBound> gb;
        std::shared_ptr<const TailTable> tail;
        double t_min = 0;
        bool inside = false;
    };
    auto plan = [&](const Rank2Group& g) {
        Plan pl;
        const double c1 = static_cast<double>(N * g.c1), c2 = static_cast<double>(N * g.c2);
        const double detNC = c1 * c2;
        const double c2g = static_cast<double>(g.c2);
        const double detA = static_cast<double>(g.B.det4()) / 4.0 / (c2g * c2g * c2g * c2g);
        const i64 t4 = T.congruent(g.V).c;
        const double shape = c1 * c1 * std::pow(c2, 0.5 + p.kloosterman_eps) *
                             std::sqrt(static_cast<double>(std::gcd(N * g.c2, t4)));
        pl.gb = Rank2GroupBound{k, dQ * dT / (detNC * detNC),
                                pref * std::pow(detNC, -1.5) * p.kloosterman_kappa * shape,
                                lam, Nd * Nd, E, 12.5 / std::sqrt(detA)};
        // B is reduced, so trace(B[U]) >= B.a + B.c >= 2 sqrt(det B)
        const double t_lo = 2 * std::sqrt(detA);
        pl.t_min = std::max(t_lo, static_cast<double>(g.B.a + g.B.c) / (c2g * c2g));
        // the bound depends on V only through the gcd in the shape
        const std::tuple<i64, i64, i64> key{g.c1, g.c2, std::gcd(N * g.c2, t4)};
        {
            std::lock_guard lock(tail_mu);
            auto& slot = tail_tables[key];
            if (!slot) slot = std::make_shared<const TailTable>(*pl.gb, t_lo);
            pl.tail = slot;
        }
        pl.inside = g.c1 <= p.c1_max_rank2 && g.c2 <= p.c2_max_rank2;
        return pl;
    };
    std::vector<Rank2Group> groups;
    std::vector<Plan> plans;
    simd::Neumaier ring1, ring2;
    for_each_rank2_group(T, 4 * p.c1_max_rank2, 4 * p.c2_max_rank2, [&](const Rank2Group& g) {
        Plan pl = plan(g);
        if (pl.inside) {
            groups.push_back(g);
            plans.push_back(std::move(pl));
            return;
        }
        const double all = pl.gb->rho * pl.tail->from(pl.t_min);
        if (g.c1 <= 2 * p.c1_max_rank2 && g.c2 <= 2 * p.c2_max_rank2) ring1.add(all);
        else ring2.add(all);
    });

    // U caps: every group is cut where its per-term bound falls to a common
    // level beta, which buys the most tail per enumerated term. beta is the
    // largest level (not below prune_tol) whose summed U tail meets the target.
    auto cap_at = [&](const Plan& pl, double beta) {
        double cap = std::min(p.U_trace_max, std::max(p.U_trace_cap, pl.tail->cut(beta)));
        return std::min(cap, std::max(pl.t_min, pl.tail->cut(p.prune_tol)));
    };
    auto u_tail = [&](double beta) {
        simd::Neumaier s;
        for (const auto& pl : plans)
            s.add(pl.gb->rho * pl.tail->from(std::max(cap_at(pl, beta), pl.t_min)));
        return s.value();
    };
    double beta = std::numeric_limits<double>::infinity();
    if (u_tail(beta) > p.rank2_tail_target) {
        double lo = std::log(p.prune_tol), hi = lo;
        for (const auto& pl : plans)
            hi = std::max(hi, std::log(std::max(pl.gb->at_trace(pl.t_min), p.prune_tol)));
        if (u_tail(std::exp(lo)) > p.rank2_tail_target) {
            hi = lo;
        } else {
            for (int i = 0; i < 50 && hi - lo > 1e-3; ++i) {
                const double mid = 0.5 * (lo + hi);
                (u_tail(std::exp(mid)) <= p.rank2_tail_target ? lo : hi) = mid;
            }
        }
        beta = std::exp(lo);
    }

    struct GroupResult {
        Complex value;
        double pruned = 0, tail = 0;
        i64 used = 0, npruned = 0;
    };
    auto work = [&](std::size_t gi) {
        const auto& g = groups[gi];
        const auto& pl = plans[gi];
        GroupResult r;
        const auto& gb = *pl.gb;
        const double cap = cap_at(pl, beta);
        r.tail = gb.rho * pl.tail->from(std::max(cap, pl.t_min));
        // whole group negligible: skip the enumeration
        const double group_max = gb.base * gb.kernel(0) * gb.rho * cap;
        if (group_max < p.prune_tol) {
            r.pruned = group_max;
            r.npruned = 1;
            return r;
        }
        const double detNC = static_cast<double>(N * g.c1) * static_cast<double>(N * g.c2);
        simd::ComplexNeumaier acc;
        simd::Neumaier pruned;
        const auto tab = table(g.c1, g.c2);
        const auto Tv = T.congruent(g.V);
        std::map<std::array<i64, 3>, Complex> K_memo;       // K depends on Q[W] mod den only
        for (const Unimodular& U : gl2_with_trace_at_most(g.B, trace_cap_int(cap, g.c2))) {
            const Mat2 C = rank2_C(g, U);
            const Mat2 NC{N * C.a, N * C.b, N * C.c, N * C.d};
            const auto e = eigen_pair(Q, T, NC);
            const double bound = gb.base * kernel_bound(k, e, E);
            if (bound < p.prune_tol) {
                pruned.add(bound);
                ++r.npruned;
                continue;
            }
            const Unimodular W = g.U1 * U;
            const auto QW = Q.act(W);
            const i64 den = tab->den();
            auto [kt, kfresh] = K_memo.try_emplace({mod_floor(QW.a, den), mod_floor(QW.b, den), mod_floor(QW.c, den)});
            if (kfresh) kt->second = histogram_value(tab->histogram(QW, Tv), den);
            const Complex K = kt->second;
            acc.add(pref * std::pow(detNC, -1.5) * K * kernel(e));
            ++r.used;
        }
        r.value = acc.value();
        r.pruned = pruned.value();
        return r;
    };
    const auto results = parallel_map<GroupResult>(groups.size(), p.workers, work);

    PartialSum out;
    simd::ComplexNeumaier acc;
    simd::Neumaier tail;
    for (const auto& r : results) {
        acc.add(r.value);
        tail.add(r.pruned);
        tail.add(r.tail);
        out.terms_used += r.used;
        out.terms_pruned += r.npruned;
    }
    out.value = acc.value();
    out.tail_estimate = tail.value() + ring_tail(ring1.value(), ring2.value());
    return out;
}

// ---------------------------------------------------------------- assembly

PeterssonResult petersson_geometric(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T,
                                    const TruncationParams& p) {
    check_weight(k);
    check_level(N);
    check_forms(Q, T);
    p.validate();
    PeterssonResult r;
    r.params = p;
    r.sigma0 = sigma0(Q, T);
    r.sigma1 = sigma1(k, N, Q, T, p);
    r.sigma2 = sigma2(k, N, Q, T, p);
    r.delta = static_cast<i64>(r.sigma0.value.real());
    r.A = r.sigma0.value + r.sigma1.value + r.sigma2.value;
    r.E = r.A - Complex(static_cast<double>(r.delta), 0.0);
    return r;
}

} // namespace siegel
