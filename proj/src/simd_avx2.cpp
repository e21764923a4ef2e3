#include <immintrin.h>

#include <array>
#include <numbers>

#include "siegel/simd.hpp"

namespace siegel::simd::avx2 {

namespace {

// Taylor coefficients of sin and cos on |theta| <= pi/4 (truncation < 1e-16).
constexpr std::array<double, 9> kSin = {
    1.0,
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
    1.0 / 355687428096000.0,
};
constexpr std::array<double, 10> kCos = {
    1.0,
    -1.0 / 2.0,
    1.0 / 24.0,
    -1.0 / 720.0,
    1.0 / 40320.0,
    -1.0 / 3628800.0,
    1.0 / 479001600.0,
    -1.0 / 87178291200.0,
    1.0 / 20922789888000.0,
    -1.0 / 6402373705728000.0,
};

inline __m256d vabs(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

// cos(2 pi t), sin(2 pi t) for four lanes.
inline void sincos_turns(__m256d t, __m256d& c, __m256d& s) {
    const int rnd = _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC;
    t = _mm256_sub_pd(t, _mm256_round_pd(t, rnd));
    const __m256d q = _mm256_round_pd(_mm256_mul_pd(t, _mm256_set1_pd(4.0)), rnd);
    const __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(0.25), t);
    const __m256d x = _mm256_mul_pd(r, _mm256_set1_pd(2.0 * std::numbers::pi));
    const __m256d x2 = _mm256_mul_pd(x, x);

    __m256d ps = _mm256_set1_pd(kSin.back());
    for (int i = static_cast<int>(kSin.size()) - 2; i >= 0; --i)
        ps = _mm256_fmadd_pd(ps, x2, _mm256_set1_pd(kSin[static_cast<std::size_t>(i)]));
    ps = _mm256_mul_pd(ps, x);
    __m256d pc = _mm256_set1_pd(kCos.back());
    for (int i = static_cast<int>(kCos.size()) - 2; i >= 0; --i)
        pc = _mm256_fmadd_pd(pc, x2, _mm256_set1_pd(kCos[static_cast<std::size_t>(i)]));

    const __m128i qi = _mm256_cvtpd_epi32(q);
    const __m256i q64 = _mm256_cvtepi32_epi64(qi);
    const __m256i one = _mm256_set1_epi64x(1), two = _mm256_set1_epi64x(2);
    const __m256i zero = _mm256_setzero_si256();
    const __m256d swap = _mm256_castsi256_pd(
        _mm256_xor_si256(_mm256_cmpeq_epi64(_mm256_and_si256(q64, one), zero), _mm256_set1_epi64x(-1)));
    const __m256i negc = _mm256_slli_epi64(_mm256_and_si256(_mm256_add_epi64(q64, one), two), 62);
    const __m256i negs = _mm256_slli_epi64(_mm256_and_si256(q64, two), 62);

    const __m256d cc = _mm256_blendv_pd(pc, ps, swap);
    const __m256d ss = _mm256_blendv_pd(ps, pc, swap);
    c = _mm256_xor_pd(cc, _mm256_castsi256_pd(negc));
    s = _mm256_xor_pd(ss, _mm256_castsi256_pd(negs));
}

struct VecNeumaier {
    __m256d sum = _mm256_setzero_pd(), comp = _mm256_setzero_pd();
    void add(__m256d x) {
        const __m256d t = _mm256_add_pd(sum, x);
        const __m256d big = _mm256_cmp_pd(vabs(sum), vabs(x), _CMP_GE_OQ);
        const __m256d a = _mm256_add_pd(_mm256_sub_pd(sum, t), x);
        const __m256d b = _mm256_add_pd(_mm256_sub_pd(x, t), sum);
        comp = _mm256_add_pd(comp, _mm256_blendv_pd(b, a, big));
        sum = t;
    }
    double reduce() const {
        alignas(32) double s[4], c[4];
        _mm256_store_pd(s, sum);
        _mm256_store_pd(c, comp);
        Neumaier acc;
        for (int i = 0; i < 4; ++i) acc.add(s[i]);
        for (int i = 0; i < 4; ++i) acc.add(c[i]);
        return acc.value();
    }
};

} // namespace

std::complex<double> phase_accumulate(const double* t, const double* w, std::size_t n) {
    VecNeumaier re, im;
    std::size_t i = 0;
    auto step = [&](__m256d tv, __m256d wv) {
        __m256d c, s;
        sincos_turns(tv, c, s);
        re.add(_mm256_mul_pd(wv, c));
        im.add(_mm256_mul_pd(wv, s));
    };
    for (; i + 4 <= n; i += 4) step(_mm256_loadu_pd(t + i), _mm256_loadu_pd(w + i));
    if (i < n) {
        alignas(32) double tb[4] = {0, 0, 0, 0}, wb[4] = {0, 0, 0, 0};
        for (std::size_t j = 0; i + j < n; ++j) {
            tb[j] = t[i + j];
            wb[j] = w[i + j];
        }
        step(_mm256_load_pd(tb), _mm256_load_pd(wb));
    }
    return {re.reduce(), im.reduce()};
}

double compensated_sum(const double* x, std::size_t n) {
    VecNeumaier acc;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc.add(_mm256_loadu_pd(x + i));
    alignas(32) double tb[4] = {0, 0, 0, 0};
    for (std::size_t j = 0; i + j < n; ++j) tb[j] = x[i + j];
    acc.add(_mm256_load_pd(tb));
    return acc.reduce();
}

double dot(const double* a, const double* b, std::size_t n) {
    VecNeumaier acc;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc.add(_mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    alignas(32) double ta[4] = {0, 0, 0, 0}, tb[4] = {0, 0, 0, 0};
    for (std::size_t j = 0; i + j < n; ++j) {
        ta[j] = a[i + j];
        tb[j] = b[i + j];
    }
    acc.add(_mm256_mul_pd(_mm256_load_pd(ta), _mm256_load_pd(tb)));
    return acc.reduce();
}

} // namespace siegel::simd::avx2
