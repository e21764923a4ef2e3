#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "siegel/oracle.hpp"
#include "siegel/parallel.hpp"
#include "siegel/simd.hpp"

namespace siegel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using C = Complex;

// Smooth step: 1 on [0, r0], 0 beyond r, C-infinity in between.
double window(double x, double r0, double r) {
    const double a = (std::abs(x) - r0) / (r - r0);
    if (a <= 0) return 1.0;
    if (a >= 1) return 0.0;
    auto f = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
    const double p = f(1 - a), q = f(a);
    return p / (p + q);
}

struct Integrand {
    int k;
    double qa, qb, qc, ta, tb, tc;
    double A[4], B[4], Cm[4], D[4];

    Integrand(int k_, const HalfIntegralForm& Q, const HalfIntegralForm& T, const CosetData& M) : k(k_) {
        qa = static_cast<double>(Q.a); qb = static_cast<double>(Q.b); qc = static_cast<double>(Q.c);
        ta = static_cast<double>(T.a); tb = static_cast<double>(T.b); tc = static_cast<double>(T.c);
        auto load = [](double* dst, const Mat2& m) {
            dst[0] = static_cast<double>(m.a); dst[1] = static_cast<double>(m.b);
            dst[2] = static_cast<double>(m.c); dst[3] = static_cast<double>(m.d);
        };
        load(A, M.A); load(B, M.B); load(Cm, M.C); load(D, M.D);
    }

    C det_cz_d(C z1, C z2, C z4) const {
        const C p11 = Cm[0] * z1 + Cm[1] * z2 + D[0], p12 = Cm[0] * z2 + Cm[1] * z4 + D[1];
        const C p21 = Cm[2] * z1 + Cm[3] * z2 + D[2], p22 = Cm[2] * z2 + Cm[3] * z4 + D[3];
        return p11 * p22 - p12 * p21;
    }

    // exponent 2 pi i (tr(Q M<Z>) - tr(T Z)) and det(CZ + D)
    void parts(C z1, C z2, C z4, C& expo, C& det) const {
        const C p11 = Cm[0] * z1 + Cm[1] * z2 + D[0], p12 = Cm[0] * z2 + Cm[1] * z4 + D[1];
        const C p21 = Cm[2] * z1 + Cm[3] * z2 + D[2], p22 = Cm[2] * z2 + Cm[3] * z4 + D[3];
        const C n11 = A[0] * z1 + A[1] * z2 + B[0], n12 = A[0] * z2 + A[1] * z4 + B[1];
        const C n21 = A[2] * z1 + A[3] * z2 + B[2], n22 = A[2] * z2 + A[3] * z4 + B[3];
        det = p11 * p22 - p12 * p21;
        const C inv = 1.0 / det;
        const C w11 = (n11 * p22 - n12 * p21) * inv, w12 = (n12 * p11 - n11 * p12) * inv;
        const C w21 = (n21 * p22 - n22 * p21) * inv, w22 = (n22 * p11 - n21 * p12) * inv;
        const C trqw = qa * w11 + 0.5 * qb * (w12 + w21) + qc * w22;
        const C trtz = ta * z1 + tb * z2 + tc * z4;
        expo = C(0, kTwoPi) * (trqw - trtz);
    }

    C operator()(C z1, C z2, C z4) const {
        C expo, det;
        parts(z1, z2, z4, expo, det);
        C p = 1.0;
        const C inv = 1.0 / det;
        for (int i = 0; i < k; ++i) p *= inv;
        return std::exp(expo) * p;
    }

    // log |f|
    double log_abs(C z1, C z2, C z4) const {
        C expo, det;
        parts(z1, z2, z4, expo, det);
        return expo.real() - k * std::log(std::abs(det));
    }
};

C reduce(const std::vector<C>& v) {
    simd::ComplexNeumaier acc;
    for (const C& z : v) acc.add(z);
    return acc.value();
}

C integrate_rank0(const Integrand& f, double y, int n) {
    const double h = 1.0 / n;
    simd::ComplexNeumaier acc;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) acc.add(f(C(i * h, y), C(j * h, 0), C(l * h, y)));
    return acc.value() * (h * h * h);
}

C integrate_rank2(const Integrand& f, double y, int n, double R, int workers) {
    const double h = 1.0 / n;
    const int m = static_cast<int>(std::ceil(R * n));
    std::vector<double> w(static_cast<std::size_t>(2 * m + 1));
    for (int i = -m; i <= m; ++i) w[static_cast<std::size_t>(i + m)] = window(i * h, 0.5 * R, R);
    auto slab = [&](std::size_t s) {
        const int i = static_cast<int>(s) - m;
        const double w1 = w[s];
        simd::ComplexNeumaier acc;
        if (w1 == 0) return C(0);
        const C z1(i * h, y);
        for (int j = -m; j <= m; ++j) {
            const double w2 = w1 * w[static_cast<std::size_t>(j + m)];
            if (w2 == 0) continue;
            const C z2(j * h, 0);
            for (int l = -m; l <= m; ++l) {
                const double w4 = w[static_cast<std::size_t>(l + m)];
                if (w4 == 0) continue;
                acc.add(w2 * w4 * f(z1, z2, C(l * h, y)));
            }
        }
        return acc.value();
    };
    return reduce(parallel_map<C>(static_cast<std::size_t>(2 * m + 1), workers, slab)) * (h * h * h);
}

struct Rank1Frame {
    Mat2 Vi;       // X = tVi X' Vi
    double center; // x1' where det(CZ + D) vanishes for y -> 0
};

C integrate_rank1(const Integrand& f, const Rank1Frame& fr, double y, int n, double R, int workers) {
    const double a = static_cast<double>(fr.Vi.a), b = static_cast<double>(fr.Vi.b);
    const double c = static_cast<double>(fr.Vi.c), d = static_cast<double>(fr.Vi.d);
    auto to_z = [&](C z1p, C z2p, C z4p, C& z1, C& z2, C& z4) {
        z1 = a * a * z1p + 2 * a * c * z2p + c * c * z4p;
        z2 = a * b * z1p + (a * d + b * c) * z2p + c * d * z4p;
        z4 = b * b * z1p + 2 * b * d * z2p + d * d * z4p;
    };
    auto F = [&](double x1, double x2, double x4) {
        C z1, z2, z4;
        to_z(C(x1, y), C(x2, 0), C(x4, y), z1, z2, z4);
        return f(z1, z2, z4);
    };
    auto logF = [&](double x1, double x2, double x4) {
        C z1, z2, z4;
        to_z(C(x1, y), C(x2, 0), C(x4, y), z1, z2, z4);
        return f.log_abs(z1, z2, z4);
    };

    const double h = 1.0 / n;
    const int m = static_cast<int>(std::ceil(R * n));
    const double drop = std::log(1e18);
    auto slab = [&](std::size_t s) {
        const double x1 = fr.center + (static_cast<int>(s) - m) * h;
        const double w1 = window(x1 - fr.center, 0.5 * R, R);
        if (w1 == 0) return C(0);
        // log|f| is an exact quadratic in x2'; locate its ridge at a few x4'.
        double lo = INFINITY, hi = -INFINITY;
        for (double x4 : {0.0, 0.25, 0.5, 0.75}) {
            const double fm = logF(x1, -1, x4), f0 = logF(x1, 0, x4), fp = logF(x1, 1, x4);
            const double alpha = -(fp + fm - 2 * f0) / 2; // log|f| = f0 - alpha (x-mu)^2 + ...
            const double beta = (fp - fm) / 2;
            if (!(alpha > 0)) throw ConvergenceError("h_bruteforce: integrand does not decay in x2'");
            const double mu = beta / (2 * alpha);
            const double peak = f0 + alpha * mu * mu;
            // keep |f| >= e^{-drop} times the peak, plus a unit of slack
            const double half = std::sqrt(std::max(0.0, peak - (peak - drop)) / alpha) + 1.0;
            lo = std::min(lo, mu - half);
            hi = std::max(hi, mu + half);
        }
        const int j0 = static_cast<int>(std::floor(lo * n)), j1 = static_cast<int>(std::ceil(hi * n));
        if (j1 - j0 > 50'000'000) throw ConvergenceError("h_bruteforce: x2' range too large");
        simd::ComplexNeumaier acc;
        for (int j = j0; j <= j1; ++j)
            for (int l = 0; l < n; ++l) acc.add(F(x1, j * h, l * h));
        return acc.value() * w1;
    };
    return reduce(parallel_map<C>(static_cast<std::size_t>(2 * m + 1), workers, slab)) * (h * h * h);
}

Rank1Frame rank1_frame(const CosetData& M, const Integrand& f) {
    // primitive direction of the row space of C
    Vec2 z = M.C.a != 0 || M.C.b != 0 ? Vec2{M.C.a, M.C.b} : Vec2{M.C.c, M.C.d};
    const i64 g = std::gcd(z[0], z[1]);
    z = {z[0] / g, z[1] / g};
    const Unimodular V = complete_column(z, 0);
    Rank1Frame fr{V.inverse().matrix(), 0.0};
    // det(CZ + D) is affine in z1' alone; find its zero
    const double a = static_cast<double>(fr.Vi.a), c = static_cast<double>(fr.Vi.c);
    const double b = static_cast<double>(fr.Vi.b), d = static_cast<double>(fr.Vi.d);
    auto det_at = [&](double x1) {
        const C z1p(x1, 0);
        return f.det_cz_d(a * a * z1p, a * b * z1p, b * b * z1p);
    };
    const C d0 = det_at(0), d1 = det_at(1) - d0;
    (void)c; (void)d;
    fr.center = -(d0 / d1).real();
    return fr;
}

double trace_TY(const HalfIntegralForm& T, const Mat2& Vi, double y) {
    // tr(T tVi Vi) y
    const double a = static_cast<double>(Vi.a), b = static_cast<double>(Vi.b);
    const double c = static_cast<double>(Vi.c), d = static_cast<double>(Vi.d);
    const double y1 = a * a + c * c, y2 = a * b + c * d, y4 = b * b + d * d;
    return y * (static_cast<double>(T.a) * y1 + static_cast<double>(T.b) * y2 + static_cast<double>(T.c) * y4);
}

} // namespace

OracleResult h_bruteforce(int k, const HalfIntegralForm& Q, const HalfIntegralForm& T, const CosetData& M,
                          const OracleParams& params) {
    if (k < 3) throw DomainError("h_bruteforce: k must be >= 3");
    if (!Q.is_positive_definite() || !T.is_positive_definite())
        throw DomainError("h_bruteforce: Q and T must be positive definite");
    M.validate();
    const Integrand f(k, Q, T, M);
    const int rank = M.rank();

    OracleResult r;
    Mat2 frame = Mat2::identity();
    Rank1Frame fr{};
    if (rank == 1) {
        fr = rank1_frame(M, f);
        frame = fr.Vi;
    }
    const double trT1 = trace_TY(T, frame, 1.0);
    r.y = params.y > 0 ? params.y : std::min(0.5, std::log(1e5) / (kTwoPi * trT1));
    r.amplification = std::exp(kTwoPi * trace_TY(T, frame, r.y));
    if (r.amplification > 1e6) throw DomainError("h_bruteforce: y too large (amplification above 1e6)");

    const HalfIntegralForm Tp = T.act(frame);
    const int band = static_cast<int>(std::ceil(2 * std::sqrt(static_cast<double>(Tp.a * Tp.c)) + std::abs(Tp.b)));
    r.quad_n = params.quad_n > 0 ? params.quad_n : std::max(12, 2 * band + 8);
    r.radius = params.radius;
    if (r.radius <= 0) r.radius = rank == 1 ? (k <= 4 ? 32.0 : 24.0) : (k <= 4 ? 16.0 : (k <= 6 ? 12.0 : 10.0));

    auto run = [&](double R) -> C {
        switch (rank) {
        case 0: return integrate_rank0(f, r.y, r.quad_n);
        case 1: return integrate_rank1(f, fr, r.y, r.quad_n, R, params.workers);
        default: return integrate_rank2(f, r.y, r.quad_n, R, params.workers);
        }
    };
    r.value = run(r.radius);
    if (rank > 0 && params.truncation_check) r.truncation_estimate = std::abs(r.value - run(0.75 * r.radius));
    return r;
}

} // namespace siegel
