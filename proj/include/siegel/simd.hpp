#pragma once

// Small numeric kernels with a scalar reference implementation and an AVX2
// variant. The variant is chosen once at runtime (CPU detection, overridable
// with SIEGEL_SIMD=scalar|avx2) and can be forced from code for testing.

#include <complex>
#include <cstddef>
#include <string_view>

namespace siegel::simd {

enum class Isa { scalar, avx2 };

/// True when the AVX2 variant is compiled in and the CPU supports AVX2+FMA.
bool avx2_available();
Isa active_isa();
/// Force a variant. Requesting avx2 on a machine without it throws.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);

/// sum_i w[i] * e(t[i]) with e(t) = exp(2 pi i t); t given in turns, any range
/// but most accurate for |t| <= 1/2. Compensated (Neumaier) accumulation.
std::complex<double> phase_accumulate(const double* t, const double* w, std::size_t n);

/// Neumaier-compensated sum of x[0..n).
double compensated_sum(const double* x, std::size_t n);

/// Compensated dot product sum a[i] * b[i].
double dot(const double* a, const double* b, std::size_t n);

namespace scalar {
std::complex<double> phase_accumulate(const double* t, const double* w, std::size_t n);
double compensated_sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
} // namespace scalar

namespace avx2 {
std::complex<double> phase_accumulate(const double* t, const double* w, std::size_t n);
double compensated_sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
} // namespace avx2

/// Neumaier accumulator used by the scalar kernels and by deterministic reducers.
struct Neumaier {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        if ((sum >= 0 ? sum : -sum) >= (x >= 0 ? x : -x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

struct ComplexNeumaier {
    Neumaier re, im;
    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

} // namespace siegel::simd
