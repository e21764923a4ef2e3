#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "siegel/expsums.hpp"
#include "siegel/oracle.hpp"

namespace siegel::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ordered_json complex_json(Complex z) { return ordered_json{{"re", z.real()}, {"im", z.imag()}}; }

std::string form_text(const HalfIntegralForm& f) {
    return std::to_string(f.a) + " " + std::to_string(f.b) + " " + std::to_string(f.c);
}

Mat2 parse_matrix(const std::string& text) {
    std::istringstream in(text);
    Mat2 m;
    std::string extra;
    if (!(in >> m.a >> m.b >> m.c >> m.d) || (in >> extra))
        throw DomainError("expected a 2x2 matrix as four integers \"a b c d\" (row-major), got \"" + text + "\"");
    return m;
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw DomainError(std::string("caps: ") + key + " must be an integer");
    } else {
        if (!v.is_number()) throw DomainError(std::string("caps: ") + key + " must be a number");
    }
    out = v.get<T>();
}

ordered_json phases_json(const PhaseSum& s) {
    ordered_json a = ordered_json::array();
    for (const auto& [r, m] : s.phases()) a.push_back(ordered_json{{"phase", r.to_string()}, {"count", m}});
    return a;
}

void print_phase_sum(std::ostream& out, const PhaseSum& s, const std::string& format) {
    if (format == "json") {
        ordered_json j;
        j["modulus"] = s.modulus();
        j["class_count"] = s.term_count();
        j["value"] = complex_json(s.value());
        j["value_text"] = format_complex(s.value());
        j["phases"] = phases_json(s);
        out << j.dump(2) << "\n";
        return;
    }
    out << "modulus " << s.modulus() << "\n";
    out << "class_count " << s.term_count() << "\n";
    out << "phases";
    for (const auto& [r, m] : s.phases()) out << " " << r.to_string() << ":" << m;
    out << "\n";
    out << "value " << format_complex(s.value()) << "\n";
}

void check_format(const std::string& f, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (f == a) return;
    throw DomainError("unsupported --format \"" + f + "\"");
}

} // namespace

// ---------------------------------------------------------------- caps

TruncationParams caps_from_json(const json& j, TruncationParams p) {
    if (!j.is_object()) throw DomainError("caps: expected a JSON object");
    static const char* const known[] = {"c1_max_rank1",     "s4_max",          "c1_max_rank2",   "c2_max_rank2",
                                        "U_trace_cap",      "U_trace_max",     "rank2_tail_target",
                                        "quadrature_tol",   "prune_tol",       "workers",
                                        "kloosterman_kappa", "kloosterman_eps", "bessel_envelope"};
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw DomainError("caps: unknown key \"" + key + "\"");
    }
    read_field(j, "c1_max_rank1", p.c1_max_rank1);
    read_field(j, "s4_max", p.s4_max);
    read_field(j, "c1_max_rank2", p.c1_max_rank2);
    read_field(j, "c2_max_rank2", p.c2_max_rank2);
    read_field(j, "U_trace_cap", p.U_trace_cap);
    read_field(j, "U_trace_max", p.U_trace_max);
    read_field(j, "rank2_tail_target", p.rank2_tail_target);
    read_field(j, "quadrature_tol", p.quadrature_tol);
    read_field(j, "prune_tol", p.prune_tol);
    read_field(j, "workers", p.workers);
    read_field(j, "kloosterman_kappa", p.kloosterman_kappa);
    read_field(j, "kloosterman_eps", p.kloosterman_eps);
    read_field(j, "bessel_envelope", p.bessel_envelope);
    p.validate();
    return p;
}

TruncationParams load_caps(const std::string& path, TruncationParams base) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read caps file \"" + path + "\"");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw DomainError("caps file \"" + path + "\" is not valid JSON: " + e.what());
    }
    return caps_from_json(j, base);
}

// workers is left out on purpose: results never depend on it
ordered_json caps_to_json(const TruncationParams& p) {
    return ordered_json{{"c1_max_rank1", p.c1_max_rank1},
                        {"s4_max", p.s4_max},
                        {"c1_max_rank2", p.c1_max_rank2},
                        {"c2_max_rank2", p.c2_max_rank2},
                        {"U_trace_cap", p.U_trace_cap},
                        {"U_trace_max", p.U_trace_max},
                        {"rank2_tail_target", p.rank2_tail_target},
                        {"quadrature_tol", p.quadrature_tol},
                        {"prune_tol", p.prune_tol},
                        {"kloosterman_kappa", p.kloosterman_kappa},
                        {"kloosterman_eps", p.kloosterman_eps},
                        {"bessel_envelope", p.bessel_envelope}};
}

// ---------------------------------------------------------------- sweep

std::pair<i64, i64> parse_range(const std::string& text) {
    const auto dots = text.find("..");
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        i64 v = 0;
        try {
            v = std::stoll(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw DomainError("bad N range \"" + text + "\" (expected a..b)");
        return v;
    };
    const i64 a = to_int(dots == std::string::npos ? text : text.substr(0, dots));
    const i64 b = dots == std::string::npos ? a : to_int(text.substr(dots + 2));
    if (a < 1 || b < a) throw DomainError("empty or non-positive N range \"" + text + "\"");
    return {a, b};
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
    std::vector<SweepRow> rows;
    for (i64 N = cfg.N_first; N <= cfg.N_last; ++N) {
        const auto t0 = std::chrono::steady_clock::now();
        SweepRow row;
        row.N = N;
        row.result = petersson_geometric(cfg.k, N, cfg.Q, cfg.T, cfg.caps);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(row);
    }
    return rows;
}

DecayFit fit_decay(const std::vector<SweepRow>& rows) {
    DecayFit f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows) {
        const double e = std::abs(r.result.E);
        if (!(e > 0) || !std::isfinite(e)) continue;
        const double x = std::log(static_cast<double>(r.N)), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++f.points;
    }
    if (f.points >= 4) {
        const double n = static_cast<double>(f.points);
        f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return f;
}

double envelope_ii(int k, double N, double detT) {
    const double eps = 0.1, kd = k;
    return std::pow(N, 1.5 - kd) * std::pow(detT, kd - 1.5) +
           std::pow(N, 2 - kd + eps) * std::pow(detT, 0.5 * kd - 0.25 + eps) +
           std::pow(N, 3 - 2 * kd + eps) * std::pow(detT, kd - 1 + eps);
}

double envelope_iii(int k, double N, double detT) {
    const double eps = 0.1;
    return std::pow(N, -0.5 + eps) * std::pow(detT, 0.5 * k - 0.25 + eps);
}

std::string sweep_csv(const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "N,re_E,im_E,tail1,tail2,seconds\n";
    for (const auto& r : rows) {
        out << r.N << "," << g17(r.result.E.real()) << "," << g17(r.result.E.imag()) << ","
            << g17(r.result.sigma1.tail_estimate) << "," << g17(r.result.sigma2.tail_estimate) << ",";
        if (cfg.timing) out << g17(r.seconds);
        out << "\n";
    }
    const auto fit = fit_decay(rows);
    const double dT = cfg.T.determinant().to_double();
    const double n0 = static_cast<double>(cfg.N_first), n1 = static_cast<double>(cfg.N_last);
    out << "# fit points=" << fit.points;
    if (fit.slope) out << " slope=" << g17(*fit.slope);
    out << " env_ii(N=" << cfg.N_first << ")=" << g17(envelope_ii(cfg.k, n0, dT)) << " env_ii(N=" << cfg.N_last
        << ")=" << g17(envelope_ii(cfg.k, n1, dT)) << " env_iii(N=" << cfg.N_first
        << ")=" << g17(envelope_iii(cfg.k, n0, dT)) << " env_iii(N=" << cfg.N_last
        << ")=" << g17(envelope_iii(cfg.k, n1, dT)) << " tails=heuristic\n";
    out << "# run k=" << cfg.k << " Q=" << form_text(cfg.Q) << " T=" << form_text(cfg.T) << " N="
        << cfg.N_first << ".." << cfg.N_last << " caps=" << caps_to_json(cfg.caps).dump() << "\n";
    return out.str();
}

ordered_json sweep_json(const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
    ordered_json j;
    j["k"] = cfg.k;
    j["Q"] = form_text(cfg.Q);
    j["T"] = form_text(cfg.T);
    j["N_range"] = std::to_string(cfg.N_first) + ".." + std::to_string(cfg.N_last);
    j["params"] = caps_to_json(cfg.caps);
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json row{{"N", r.N},
                         {"A", complex_json(r.result.A)},
                         {"delta", r.result.delta},
                         {"E", complex_json(r.result.E)},
                         {"tail1", r.result.sigma1.tail_estimate},
                         {"tail2", r.result.sigma2.tail_estimate}};
        if (cfg.timing) row["seconds"] = r.seconds;
        arr.push_back(row);
    }
    j["rows"] = arr;
    const auto fit = fit_decay(rows);
    const double dT = cfg.T.determinant().to_double();
    ordered_json f{{"points", fit.points}};
    if (fit.slope) f["slope"] = *fit.slope;
    f["envelope_ii"] = {envelope_ii(cfg.k, static_cast<double>(cfg.N_first), dT),
                        envelope_ii(cfg.k, static_cast<double>(cfg.N_last), dT)};
    f["envelope_iii"] = {envelope_iii(cfg.k, static_cast<double>(cfg.N_first), dT),
                         envelope_iii(cfg.k, static_cast<double>(cfg.N_last), dT)};
    j["fit"] = f;
    j["tails_kind"] = "heuristic";
    return j;
}

ordered_json petersson_json(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T,
                            const PeterssonResult& r) {
    ordered_json j;
    j["k"] = k;
    j["N"] = N;
    j["Q"] = form_text(Q);
    j["T"] = form_text(T);
    j["A"] = complex_json(r.A);
    j["delta"] = r.delta;
    j["E"] = complex_json(r.E);
    j["tails"] = ordered_json{{"sigma1", r.sigma1.tail_estimate},
                              {"sigma2", r.sigma2.tail_estimate},
                              {"total", r.tail_total()},
                              {"kind", "heuristic"}};
    j["parts"] = ordered_json{{"sigma0", complex_json(r.sigma0.value)},
                              {"sigma1", complex_json(r.sigma1.value)},
                              {"sigma2", complex_json(r.sigma2.value)},
                              {"sigma1_groups", r.sigma1.terms_used},
                              {"sigma2_terms", r.sigma2.terms_used},
                              {"pruned", r.sigma1.terms_pruned + r.sigma2.terms_pruned}};
    j["params"] = caps_to_json(r.params);
    return j;
}

std::string format_complex(Complex z) {
    const double scale = std::max(1.0, std::abs(z));
    double re = z.real(), im = z.imag();
    if (std::abs(re) < 1e-9 * scale) re = 0;
    if (std::abs(im) < 1e-9 * scale) im = 0;
    auto num = [](double x) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.12g", x);
        return std::string(buf);
    };
    auto imag = [&](double x) { return std::abs(x) == 1 ? std::string("i") : num(std::abs(x)) + "i"; };
    if (im == 0) return num(re);
    if (re == 0) return (im < 0 ? "-" : "") + imag(im);
    return num(re) + (im < 0 ? "-" : "+") + imag(im);
}

// ---------------------------------------------------------------- commands

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Geometric side of a Petersson formula for degree-2 Siegel cusp forms of level N.\n"
                 "Forms are three integers \"a b c\" for a x^2 + b x y + c y^2 (b is the doubled entry)."};
    app.require_subcommand(1);
    app.set_version_flag("--version", "siegel 1.0");

    int k = 0;
    i64 N = 1;
    std::string Qs, Ts, caps_path, format, Nrange;
    int workers = 0;
    bool timing = false;

    auto common = [&](CLI::App* s, bool needs_T) {
        s->add_option("--k", k, "weight (even, >= 4)")->required()->envname("SIEGEL_K");
        s->add_option("--Q", Qs, "form Q as \"a b c\"")->required()->envname("SIEGEL_Q");
        auto* t = s->add_option("--T", Ts, "form T as \"a b c\"")->envname("SIEGEL_T");
        if (needs_T) t->required();
        s->add_option("--caps", caps_path, "truncation caps, JSON object keyed by parameter name")
            ->envname("SIEGEL_CAPS");
        s->add_option("--workers", workers, "worker threads (output does not depend on it)")
            ->envname("SIEGEL_WORKERS");
    };

    auto* pet = app.add_subcommand("petersson", "A = Sigma0 + Sigma1 + Sigma2 for one (k, N, Q, T), as JSON");
    common(pet, true);
    pet->add_option("--N", N, "level")->envname("SIEGEL_N");
    pet->add_option("--format", format, "json | text")->envname("SIEGEL_FORMAT");

    auto* sw = app.add_subcommand("sweep", "E(N) over a range of levels, as CSV with a decay fit");
    common(sw, true);
    sw->add_option("--N", Nrange, "level range a..b")->required()->envname("SIEGEL_N");
    sw->add_option("--format", format, "csv | json")->envname("SIEGEL_FORMAT");
    sw->add_flag("--timing", timing, "fill the seconds column (makes output run-dependent)");
    std::string output;
    sw->add_option("--output,-o", output, "write to a file instead of stdout");

    std::vector<i64> gauss_args;
    auto* ga = app.add_subcommand("gauss", "G(a, b; c) = sum_{n mod c} e((a n^2 + b n) / c)");
    ga->add_option("abc", gauss_args, "a b c")->expected(3)->required();
    ga->add_option("--format", format, "text | json")->envname("SIEGEL_FORMAT");

    std::string Cs;
    auto* kl = app.add_subcommand("kloosterman", "K(Q, T; C) over D mod C Lambda");
    kl->add_option("--Q", Qs, "form Q as \"a b c\"")->required()->envname("SIEGEL_Q");
    kl->add_option("--T", Ts, "form T as \"a b c\"")->required()->envname("SIEGEL_T");
    kl->add_option("--C", Cs, "C as \"c11 c12 c21 c22\"")->required();
    kl->add_option("--format", format, "text | json")->envname("SIEGEL_FORMAT");

    std::string Ds;
    OracleParams op;
    auto* orc = app.add_subcommand("oracle", "");
    orc->group(""); // hidden: debugging aid
    orc->add_option("--k", k)->required();
    orc->add_option("--Q", Qs)->required();
    orc->add_option("--T", Ts)->required();
    orc->add_option("--C", Cs)->required();
    orc->add_option("--D", Ds)->required();
    orc->add_option("--N", N);
    orc->add_option("--y", op.y);
    orc->add_option("--n", op.quad_n);
    orc->add_option("--radius", op.radius);
    orc->add_option("--workers", op.workers);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ga) {
            if (format.empty()) format = "text";
            check_format(format, {"text", "json"});
            print_phase_sum(out, gauss_sum(gauss_args[0], gauss_args[1], gauss_args[2]), format);
            return 0;
        }
        if (*kl) {
            if (format.empty()) format = "text";
            check_format(format, {"text", "json"});
            print_phase_sum(out, kitaoka_kloosterman(parse_form(Qs), parse_form(Ts), parse_matrix(Cs)), format);
            return 0;
        }
        if (*orc) {
            const SymplecticPair pr{parse_matrix(Cs), parse_matrix(Ds)};
            const auto comp = symplectic_complete(pr);
            const CosetData M{comp.A, comp.B, pr.C, pr.D};
            M.validate(N);
            const auto r = h_bruteforce(k, parse_form(Qs), parse_form(Ts), M, op);
            ordered_json j{{"rank", M.rank()},
                           {"value", complex_json(r.value)},
                           {"truncation_estimate", r.truncation_estimate},
                           {"y", r.y},
                           {"radius", r.radius},
                           {"quad_n", r.quad_n},
                           {"amplification", r.amplification}};
            out << j.dump(2) << "\n";
            return 0;
        }

        TruncationParams caps;
        if (!caps_path.empty()) caps = load_caps(caps_path);
        if (workers != 0) caps.workers = workers;
        caps.validate();
        const auto Q = parse_form(Qs), T = parse_form(Ts);

        if (*pet) {
            if (format.empty()) format = "json";
            check_format(format, {"json", "text"});
            const auto r = petersson_geometric(k, N, Q, T, caps);
            const auto j = petersson_json(k, N, Q, T, r);
            if (format == "json") {
                out << j.dump(2) << "\n";
            } else {
                out << "A " << g17(r.A.real()) << " " << g17(r.A.imag()) << "\n";
                out << "delta " << r.delta << "\n";
                out << "E " << g17(r.E.real()) << " " << g17(r.E.imag()) << "\n";
                out << "tail1 " << g17(r.sigma1.tail_estimate) << " (heuristic)\n";
                out << "tail2 " << g17(r.sigma2.tail_estimate) << " (heuristic)\n";
            }
            return 0;
        }
        if (*sw) {
            if (format.empty()) format = "csv";
            check_format(format, {"csv", "json"});
            SweepConfig cfg;
            cfg.k = k;
            cfg.Q = Q;
            cfg.T = T;
            std::tie(cfg.N_first, cfg.N_last) = parse_range(Nrange);
            cfg.caps = caps;
            cfg.timing = timing;
            check_weight(k);
            const auto rows = run_sweep(cfg);
            const std::string text = format == "csv" ? sweep_csv(cfg, rows) : sweep_json(cfg, rows).dump(2) + "\n";
            if (output.empty()) {
                out << text;
            } else {
                std::ofstream f(output, std::ios::binary);
                if (!f) throw DomainError("cannot write \"" + output + "\"");
                f << text;
            }
            return 0;
        }
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace siegel::cli
