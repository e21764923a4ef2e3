// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli.hpp"
#include "siegel/expsums.hpp"
#include "siegel/oracle.hpp"
#include "siegel/petersson.hpp"
#include "siegel/specfun.hpp"

using namespace siegel;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict budget(Verdict v, double secs, double limit) {
    v.detail += ", " + fmt("%.1f", secs) + " s (budget " + fmt("%.0f", limit) + " s)";
    if (secs > limit) v.pass = false;
    return v;
}

// ---- 1: rank-1 closed form against the integral ----

Verdict criterion1() {
    const std::vector<std::pair<HalfIntegralForm, HalfIntegralForm>> pairs{
        {{1, 0, 1}, {1, 1, 1}}, {{2, 1, 3}, {3, 1, 2}}, {{1, 1, 1}, {1, 0, 2}}, {{1, 0, 1}, {1, 0, 1}}};
    struct Case {
        HalfIntegralForm Q, T;
        i64 N;
        Rank1Coset c;
    };
    std::vector<Case> all;
    for (const auto& [Q, T] : pairs)
        for (i64 N : {1, 2, 3, 6})
            for (i64 c1 = 1; N * c1 <= 6; ++c1)
                for (i64 s4 = 1; s4 <= 5; ++s4) {
                    int taken = 0;
                    for_each_rank1_coset(N, Q, T, c1, s4, [&](const Rank1Coset& c) {
                        if (taken++ < 2) all.push_back({Q, T, N, c});
                    });
                }
    const std::size_t want = 54;
    if (all.size() < want) return {false, "only " + std::to_string(all.size()) + " cosets available"};
    OracleParams op;
    op.truncation_check = false;
    double worst = 0;
    int bad = 0;
    for (std::size_t i = 0; i < want; ++i) {
        const auto& cs = all[i * all.size() / want];
        const int k = std::array{4, 6, 10}[i % 3];
        const Complex ref = h_bruteforce(k, cs.Q, cs.T, rank1_coset_matrix(cs.N, cs.c), op).value;
        const double d = std::abs(ref - rank1_term(k, cs.N, cs.Q, cs.T, cs.c));
        worst = std::max(worst, d);
        bad += !(d <= 1e-5);
    }
    return {bad == 0, std::to_string(want) + " cosets (N c1 <= 6, s4 <= 5, k = 4/6/10), max |diff| " +
                          fmt("%.2e", worst) + " (tol 1e-05), " + std::to_string(bad) + " over"};
}

// ---- 2: rank-2 term against the integral summed over D classes ----

Verdict criterion2() {
    const std::vector<std::pair<HalfIntegralForm, HalfIntegralForm>> pairs{{{1, 0, 1}, {1, 1, 1}},
                                                                           {{2, 1, 3}, {3, 1, 2}}};
    double worst = 0;
    int n = 0, bad = 0;
    for (const auto& [Q, T] : pairs)
        for (const Mat2& C : {Mat2::identity(), Mat2::diag(1, 2)})
            for (int k : {4, 6}) {
                Complex sum = 0;
                for (const Mat2& D : dclass_reps_bruteforce(C, 2)) {
                    const auto M = complete_bruteforce(C, D, 6);
                    if (!M) return {false, "no symplectic completion found"};
                    OracleParams op;
                    op.truncation_check = false;
                    sum += h_bruteforce(k, Q, T, *M, op).value;
                }
                const Complex ref = rank2_term(k, 1, Q, T, C);
                const double rel = std::abs(sum - ref) / std::abs(ref);
                worst = std::max(worst, rel);
                bad += !(rel <= 1e-4);
                ++n;
            }
    return {bad == 0, std::to_string(n) + " cases (C = 1, diag(1,2); k = 4, 6; 2 form pairs), max rel diff " +
                          fmt("%.2e", worst) + " (tol 1e-04)"};
}

// ---- 3 and 4 share the Kloosterman family ----

HalfIntegralForm random_form(std::mt19937_64& rng) {
    for (;;) {
        const i64 a = std::uniform_int_distribution<i64>(1, 8)(rng);
        const i64 b = std::uniform_int_distribution<i64>(-a, a)(rng);
        const i64 c = std::uniform_int_distribution<i64>(a, 10)(rng);
        const HalfIntegralForm f{a, b, c};
        if (f.is_positive_definite()) return f;
    }
}

Mat2 random_unimodular(std::mt19937_64& rng) {
    Mat2 m = Mat2::identity();
    std::uniform_int_distribution<i64> step(-2, 2);
    for (int i = 0; i < 3; ++i) {
        const i64 t = step(rng);
        m = m * (i % 2 ? Mat2{1, t, 0, 1} : Mat2{1, 0, t, 1});
    }
    if (rng() % 2) m = m * Mat2{0, 1, 1, 0};
    return m;
}

struct KloostermanFamily {
    std::vector<Mat2> Cs;
    std::vector<std::pair<HalfIntegralForm, HalfIntegralForm>> QT;
};

// every C with entries in [-3, 3], plus six random U diag(c1, c2) V for each
// elementary-divisor type with c1 c2 <= 36
KloostermanFamily kloosterman_family() {
    std::mt19937_64 rng(20240611);
    KloostermanFamily f;
    for (i64 a = -3; a <= 3; ++a)
        for (i64 b = -3; b <= 3; ++b)
            for (i64 c = -3; c <= 3; ++c)
                for (i64 d = -3; d <= 3; ++d)
                    if (a * d - b * c != 0) f.Cs.push_back(Mat2{a, b, c, d});
    for (i64 c1 = 1; c1 * c1 <= 36; ++c1)
        for (i64 c2 = c1; c1 * c2 <= 36; c2 += c1)
            for (int i = 0; i < 6; ++i)
                f.Cs.push_back(random_unimodular(rng) * Mat2::diag(c1, c2) * random_unimodular(rng));
    for (int i = 0; i < 20; ++i) {
        const auto Q = random_form(rng);
        f.QT.push_back({Q, random_form(rng)});
    }
    return f;
}

Verdict criterion3() {
    i64 gauss_cases = 0, gauss_bad = 0;
    for (i64 c = 1; c <= 200; ++c)
        for (i64 a = 0; a < c; ++a)
            for (i64 b = 0; b < c; ++b) {
                ++gauss_cases;
                gauss_bad += gauss_histogram(a, b, c) != gauss_histogram_direct(a, b, c);
            }
    const auto fam = kloosterman_family();
    double worst = 0;
    i64 k_cases = 0, k_bad = 0;
    for (const Mat2& C : fam.Cs)
        for (const auto& [Q, T] : fam.QT) {
            const Complex x = kitaoka_kloosterman(Q, T, C).value();
            const Complex y = kitaoka_kloosterman(T, Q, C.transpose()).value();
            const double rel = std::abs(x - y) / std::max(1.0, std::abs(x));
            worst = std::max(worst, rel);
            k_bad += !(rel <= 1e-9);
            ++k_cases;
        }
    return {gauss_bad == 0 && k_bad == 0,
            "Gauss " + std::to_string(gauss_cases) + " (a, b, c) with c <= 200: " + std::to_string(gauss_bad) +
                " mismatches; Kloosterman " + std::to_string(fam.Cs.size()) + " C x " +
                std::to_string(fam.QT.size()) + " (Q, T): max rel diff " + fmt("%.2e", worst) + " (tol 1e-09)"};
}

Verdict criterion4() {
    i64 g_viol = 0, g_cases = 0;
    double g_ratio = 0;
    for (i64 c = 1; c <= 200; ++c)
        for (i64 a = 0; a < c; ++a) {
            const double bound = 2 * std::sqrt(static_cast<double>(std::gcd(a, c) * c));
            for (i64 b = 0; b < c; ++b) {
                const double g = std::abs(histogram_value(gauss_histogram(a, b, c), c));
                g_ratio = std::max(g_ratio, g / bound);
                g_viol += g > bound;
                ++g_cases;
            }
        }

    const double kappa = TruncationParams{}.kloosterman_kappa;
    const auto fam = kloosterman_family();
    i64 k_viol = 0, k_cases = 0;
    double k_ratio = 0;
    for (const Mat2& C : fam.Cs)
        for (const auto& [Q, T] : fam.QT) {
            const double K = std::abs(kitaoka_kloosterman(Q, T, C).value());
            const double bound = kappa * kloosterman_envelope_shape(T, C, 0.1);
            k_ratio = std::max(k_ratio, K / bound);
            k_viol += K > bound;
            ++k_cases;
        }

    i64 j_viol = 0, j_cases = 0;
    double j_ratio = 0;
    for (int k = 4; k <= 20; k += 2) {
        const double E = bessel_envelope(k);
        for (int i = 0; i <= 2000; ++i) {
            const double x = std::pow(10.0, -6 + 10.0 * i / 2000);
            const double bound = E * std::min(std::pow(x, k - 1.5), 1 / std::sqrt(x));
            const double j = std::abs(bessel_half(k, x));
            j_ratio = std::max(j_ratio, j / bound);
            j_viol += j > bound;
            ++j_cases;
        }
    }
    return {g_viol + k_viol + j_viol == 0,
            "violations: Gauss " + std::to_string(g_viol) + "/" + std::to_string(g_cases) + " (max ratio " +
                fmt("%.3f", g_ratio) + "), Kloosterman " + std::to_string(k_viol) + "/" + std::to_string(k_cases) +
                " (kappa " + fmt("%.2f", kappa) + ", eps 0.1, max ratio " + fmt("%.3f", k_ratio) + "), Bessel " +
                std::to_string(j_viol) + "/" + std::to_string(j_cases) + " (k = 4..20, x = 1e-6..1e4, max ratio " +
                fmt("%.3f", j_ratio) + ")"};
}

// ---- 5 to 8 share the sweep runs ----

struct SweepRuns {
    cli::SweepConfig main_cfg;
    std::vector<cli::SweepRow> main;     // Q = T = (1,0,1), N = 1..20
    std::vector<cli::SweepRow> shifted;  // Q = (1,0,1), T = (1,0,2), N = 1 and 20
    double seconds = 0;
};

SweepRuns run_sweeps(const TruncationParams& caps) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRuns r;
    r.main_cfg.k = 10;
    r.main_cfg.Q = {1, 0, 1};
    r.main_cfg.T = {1, 0, 1};
    r.main_cfg.N_first = 1;
    r.main_cfg.N_last = 20;
    r.main_cfg.caps = caps;
    r.main = cli::run_sweep(r.main_cfg);
    for (i64 N : {1, 20}) {
        cli::SweepConfig c = r.main_cfg;
        c.T = {1, 0, 2};
        c.N_first = c.N_last = N;
        r.shifted.push_back(cli::run_sweep(c).front());
    }
    r.seconds = seconds_since(t0);
    return r;
}

Verdict criterion5(const SweepRuns& r) {
    const auto fit = cli::fit_decay(r.main);
    const double slope = fit.slope.value_or(std::nan(""));
    const double ratio = std::abs(r.shifted[0].result.A) / std::abs(r.shifted[1].result.A);
    double max_tail = 0;
    for (const auto* rows : {&r.main, &r.shifted})
        for (const auto& row : *rows) max_tail = std::max(max_tail, row.result.tail_total());
    const bool ok = fit.slope && slope <= -0.4 && ratio >= 3 && max_tail < 1e-6 && r.seconds <= 3600;
    return {ok, "slope " + fmt("%.3f", slope) + " (<= -0.4, " + std::to_string(fit.points) + " points); |A(1)|/|A(20)| " +
                    fmt("%.3g", ratio) + " for T = (1,0,2) (>= 3); max tail1+tail2 " + fmt("%.2e", max_tail) +
                    " (< 1e-06); " + fmt("%.0f", r.seconds) + " s (budget 3600 s)"};
}

Verdict criterion6(const SweepRuns& base, const SweepRuns& dbl) {
    int bad = 0, n = 0;
    double worst = 0; // |dA| / tails
    for (const auto& [a, b] : {std::pair{&base.main, &dbl.main}, std::pair{&base.shifted, &dbl.shifted}})
        for (std::size_t i = 0; i < a->size(); ++i) {
            const auto& x = (*a)[i].result;
            const auto& y = (*b)[i].result;
            const double d = std::abs(x.A - y.A), t = x.tail_total();
            worst = std::max(worst, d / t);
            bad += !(d < t);
            ++n;
        }
    return {bad == 0, std::to_string(n) + " runs with doubled caps; max |dA| / (tail1 + tail2) " + fmt("%.3g", worst) +
                          " (< 1); " + fmt("%.0f", dbl.seconds) + " s"};
}

Verdict criterion7(const SweepRuns& base, int workers, const std::string& csv_path) {
    auto cfg = base.main_cfg;
    cfg.caps.workers = workers;
    const auto rows = cli::run_sweep(cfg);
    const std::string a = cli::sweep_csv(base.main_cfg, base.main), b = cli::sweep_csv(cfg, rows);
    if (!csv_path.empty()) std::ofstream(csv_path) << a;
    return {a == b, "sweep CSV with workers = 1 and workers = " + std::to_string(workers) + ": " +
                        (a == b ? "byte-identical" : "different") + " (" + std::to_string(a.size()) + " bytes)"};
}

Verdict criterion8(const SweepRuns& r) {
    std::vector<HalfIntegralForm> forms;
    for (i64 a = 1; a <= 6; ++a)
        for (i64 c = a; c <= 6; ++c)
            for (i64 b = -a + 1; b <= a; ++b) {
                if (a == c && b < 0) continue;
                forms.push_back({a, b, c});
            }
    int bad = 0, n = 0;
    for (const auto& Q : forms)
        for (const auto& T : forms) {
            bad += delta(Q, T) != delta_bruteforce(Q, T, 4);
            ++n;
        }
    bool sigma0_ok = true;
    for (const auto* rows : {&r.main, &r.shifted}) {
        const Complex s0 = rows->front().result.sigma0.value;
        for (const auto& row : *rows) {
            const Complex s = row.result.sigma0.value;
            sigma0_ok = sigma0_ok && s == s0 && s.imag() == 0 && s.real() == std::round(s.real());
        }
    }
    return {bad == 0 && sigma0_ok,
            std::to_string(forms.size()) + " reduced forms, " + std::to_string(n) + " pairs: " + std::to_string(bad) +
                " delta mismatches; Sigma0 " + (sigma0_ok ? "integral and N-independent" : "NOT integral / N-independent") +
                " over the sweep (" + fmt("%.0f", r.main.front().result.sigma0.value.real()) + " for T = Q)"};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance runner: prints one PASS/FAIL line per criterion"};
    std::vector<int> only;
    int workers = 3;
    std::string csv_path;
    app.add_option("--only", only, "Criteria to run (default all)")->check(CLI::Range(1, 8));
    app.add_option("--workers", workers, "Worker count for the criterion-7 rerun")->check(CLI::PositiveNumber);
    app.add_option("--csv", csv_path, "Write the criterion-5 sweep CSV here");
    CLI11_PARSE(app, argc, argv);
    auto want = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };

    int failed = 0;
    auto report = [&](int c, const Verdict& v) {
        std::printf("criterion %d: %s  %s\n", c, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    };
    auto timed = [&](int c, double limit, const std::function<Verdict()>& fn) {
        if (!want(c)) return;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        report(c, limit > 0 ? budget(v, seconds_since(t0), limit) : v);
    };

    timed(1, 600, criterion1);
    timed(2, 600, criterion2);
    timed(3, 300, criterion3);
    timed(4, 0, criterion4);

    if (want(5) || want(6) || want(7) || want(8)) {
        try {
            const TruncationParams caps;
            const auto base = run_sweeps(caps);
            if (want(5)) report(5, criterion5(base));
            if (want(6)) report(6, criterion6(base, run_sweeps(caps.doubled())));
            if (want(7)) report(7, criterion7(base, workers, csv_path));
            if (want(8)) report(8, criterion8(base));
        } catch (const std::exception& e) {
            for (int c = 5; c <= 8; ++c)
                if (want(c)) report(c, {false, std::string("exception: ") + e.what()});
        }
    }
    std::printf("%s: %d criteria failed\n", failed ? "FAIL" : "PASS", failed);
    return failed ? 1 : 0;
}
