#include "siegel/phase_sum.hpp"

#include <numeric>

#include "siegel/simd.hpp"

namespace siegel {

namespace {
// Phases near 1 are evaluated as r - 1 so the kernel sees |t| <= 1/2.
double centered(const Rational& r) {
    const double x = r.to_double();
    return x > 0.5 ? x - 1.0 : x;
}
} // namespace

void PhaseSum::add(const Rational& r, i64 mult) {
    if (mult == 0) return;
    const Rational f = r.frac();
    auto it = phases_.find(f);
    if (it == phases_.end()) {
        phases_.emplace(f, mult);
    } else if ((it->second += mult) == 0) {
        phases_.erase(it);
    }
}

i64 PhaseSum::term_count() const {
    i64 n = 0;
    for (const auto& [r, m] : phases_) n += m;
    return n;
}

Complex PhaseSum::value() const {
    std::vector<double> t, w;
    t.reserve(phases_.size());
    w.reserve(phases_.size());
    for (const auto& [r, m] : phases_) {
        t.push_back(centered(r));
        w.push_back(static_cast<double>(m));
    }
    return simd::phase_accumulate(t.data(), w.data(), t.size());
}

PhaseSum PhaseSum::from_histogram(const std::vector<i64>& counts, i64 den) {
    PhaseSum s(den);
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (counts[j] != 0) s.add(Rational(static_cast<i64>(j), den), counts[j]);
    return s;
}

PhaseSum convolve(const PhaseSum& x, const PhaseSum& y) {
    PhaseSum out(std::lcm(x.modulus_, y.modulus_));
    for (const auto& [r, m] : x.phases_)
        for (const auto& [s, n] : y.phases_) out.add(r + s, m * n);
    return out;
}

Complex histogram_value(const std::vector<i64>& counts, i64 den) {
    std::vector<double> t, w;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) continue;
        const double x = static_cast<double>(j) / static_cast<double>(den);
        t.push_back(x > 0.5 ? x - 1.0 : x);
        w.push_back(static_cast<double>(counts[j]));
    }
    return simd::phase_accumulate(t.data(), w.data(), t.size());
}

} // namespace siegel
