#include <cmath>
#include <numbers>

#include "siegel/simd.hpp"

namespace siegel::simd::scalar {

std::complex<double> phase_accumulate(const double* t, const double* w, std::size_t n) {
    ComplexNeumaier acc;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * std::numbers::pi * t[i];
        acc.add({w[i] * std::cos(x), w[i] * std::sin(x)});
    }
    return acc.value();
}

double compensated_sum(const double* x, std::size_t n) {
    Neumaier acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(x[i]);
    return acc.value();
}

double dot(const double* a, const double* b, std::size_t n) {
    Neumaier acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
    return acc.value();
}

} // namespace siegel::simd::scalar
