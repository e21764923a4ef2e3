#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "siegel/simd.hpp"

namespace siegel::simd {

namespace {

bool cpu_has_avx2() {
#if defined(SIEGEL_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    const bool have = cpu_has_avx2();
    if (const char* env = std::getenv("SIEGEL_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && have) return Isa::avx2;
    }
    return have ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

} // namespace

bool avx2_available() {
    static const bool have = cpu_has_avx2();
    return have;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2_available())
        throw std::runtime_error("AVX2 kernels are not available on this build/CPU");
    current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#if defined(SIEGEL_HAVE_AVX2)
#define SIEGEL_DISPATCH(fn, ...) \
    (active_isa() == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define SIEGEL_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

std::complex<double> phase_accumulate(const double* t, const double* w, std::size_t n) {
    return SIEGEL_DISPATCH(phase_accumulate, t, w, n);
}

double compensated_sum(const double* x, std::size_t n) { return SIEGEL_DISPATCH(compensated_sum, x, n); }

double dot(const double* a, const double* b, std::size_t n) { return SIEGEL_DISPATCH(dot, a, b, n); }

} // namespace siegel::simd
