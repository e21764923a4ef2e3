#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "siegel/petersson.hpp"

namespace siegel::cli {

/// Entry point shared by the `siegel` binary and the tests. Returns the exit
/// code: 0 ok, 2 usage or domain error, 3 convergence failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Caps file: a JSON object whose keys are TruncationParams field names.
/// Unknown keys and wrong types are DomainErrors.
TruncationParams caps_from_json(const nlohmann::json& j, TruncationParams base = {});
TruncationParams load_caps(const std::string& path, TruncationParams base = {});
nlohmann::ordered_json caps_to_json(const TruncationParams& p);

struct SweepConfig {
    int k = 10;
    HalfIntegralForm Q{1, 0, 1}, T{1, 0, 1};
    i64 N_first = 1, N_last = 20;
    TruncationParams caps;
    bool timing = false;
};

struct SweepRow {
    i64 N = 0;
    PeterssonResult result;
    double seconds = 0;
};

/// "a..b" or a single integer. Throws DomainError on malformed or empty ranges.
std::pair<i64, i64> parse_range(const std::string& text);

std::vector<SweepRow> run_sweep(const SweepConfig& cfg);

struct DecayFit {
    std::size_t points = 0;      // rows with E != 0
    std::optional<double> slope; // least squares of log|E| on log N, needs >= 4 points
};
DecayFit fit_decay(const std::vector<SweepRow>& rows);

/// Theorem 1.1 (ii) and (iii) shapes with unit constants and eps = 0.1.
double envelope_ii(int k, double N, double detT);
double envelope_iii(int k, double N, double detT);

/// Header, one row per N (17 significant digits), then a '#'-prefixed summary.
std::string sweep_csv(const SweepConfig& cfg, const std::vector<SweepRow>& rows);
nlohmann::ordered_json sweep_json(const SweepConfig& cfg, const std::vector<SweepRow>& rows);

nlohmann::ordered_json petersson_json(int k, i64 N, const HalfIntegralForm& Q, const HalfIntegralForm& T,
                              const PeterssonResult& r);

/// Short complex rendering used by `gauss` and `kloosterman`: "2+2i", "7", "-1.5i".
std::string format_complex(Complex z);

} // namespace siegel::cli
