#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace siegel;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "siegel");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string write_caps(const std::string& name, const std::string& body) {
    const std::string path = "test_cli_" + name + ".json";
    std::ofstream(path) << body;
    return path;
}

const std::string small = R"({"c1_max_rank1": 4, "s4_max": 4, "c1_max_rank2": 2, "c2_max_rank2": 4,
                              "U_trace_cap": 6, "U_trace_max": 6})";

} // namespace

TEST_CASE("gauss prints exact phases and the value") {
    auto r = run({"gauss", "1", "0", "4"});
    CHECK(r.code == 0);
    CHECK(r.out.find("value 2+2i\n") != std::string::npos);
    CHECK(r.out.find("phases 0:2 1/4:2\n") != std::string::npos);
    r = run({"gauss", "0", "0", "7"});
    CHECK(r.out.find("value 7\n") != std::string::npos);
    r = run({"gauss", "1", "0", "4", "--format", "json"});
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["modulus"] == 4);
    CHECK(j["class_count"] == 4);
    CHECK(j["value"]["re"].get<double>() == doctest::Approx(2));
    CHECK(run({"gauss", "1", "0", "0"}).code == 2);
    CHECK(run({"gauss", "1", "0"}).code == 2);
}

TEST_CASE("kloosterman") {
    auto r = run({"kloosterman", "--Q", "1 0 1", "--T", "1 0 1", "--C", "1 0 0 1", "--format", "json"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["modulus"] == 2);
    CHECK(j["class_count"] == 1);
    CHECK(run({"kloosterman", "--Q", "1 0 1", "--T", "1 0 1", "--C", "1 2 2 4"}).code == 2);
    CHECK(run({"kloosterman", "--Q", "1 0", "--T", "1 0 1", "--C", "1 0 0 1"}).code == 2);
}

TEST_CASE("petersson JSON and exit codes") {
    const auto caps = write_caps("small", small);
    auto r = run({"petersson", "--k", "10", "--N", "3", "--Q", "1 0 1", "--T", "1 0 1", "--caps", caps});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    for (const char* key : {"A", "delta", "E", "tails", "params"}) CHECK(j.contains(key));
    CHECK(j["delta"] == 8);
    CHECK(j["params"]["c2_max_rank2"] == 4);
    CHECK(j["tails"]["kind"] == "heuristic");

    r = run({"petersson", "--k", "5", "--Q", "1 0 1", "--T", "1 0 1", "--caps", caps});
    CHECK(r.code == 2);
    CHECK(r.err.find("even") != std::string::npos);
    CHECK(run({"petersson", "--k", "10", "--Q", "1 0 1", "--T", "1 3 1", "--caps", caps}).code == 2);
    CHECK(run({"petersson", "--k", "10", "--Q", "1 0 1"}).code == 2);
    CHECK(run({"petersson", "--k", "10", "--Q", "1 0 1", "--T", "1 0 1", "--caps", "no_such_file.json"}).code == 2);
    CHECK(run({"petersson", "--k", "10", "--Q", "1 0 1", "--T", "1 0 1", "--caps",
               write_caps("unknown", R"({"c9": 1})")})
              .code == 2);
    CHECK(run({"petersson", "--k", "10", "--Q", "1 0 1", "--T", "1 0 1", "--caps",
               write_caps("negative", R"({"s4_max": -1})")})
              .code == 2);
    CHECK(run({"nope"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("sweep CSV: schema, fit line, empty range") {
    const auto caps = write_caps("small", small);
    auto r = run({"sweep", "--k", "10", "--N", "2..6", "--Q", "1 0 1", "--T", "1 0 1", "--caps", caps});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "N,re_E,im_E,tail1,tail2,seconds");
    int rows = 0;
    while (std::getline(in, line) && line[0] != '#') {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 5);
        CHECK(line.back() == ','); // no --timing: seconds left empty
    }
    CHECK(rows == 5);
    CHECK(line.rfind("# fit points=5 slope=", 0) == 0);

    // fewer than 4 points: no slope field
    r = run({"sweep", "--k", "10", "--N", "2..4", "--Q", "1 0 1", "--T", "1 0 1", "--caps", caps});
    CHECK(r.code == 0);
    CHECK(r.out.find("slope=") == std::string::npos);
    CHECK(r.out.find("# fit points=3") != std::string::npos);

    CHECK(run({"sweep", "--k", "10", "--N", "6..2", "--Q", "1 0 1", "--T", "1 0 1", "--caps", caps}).code == 2);
    CHECK(run({"sweep", "--k", "10", "--N", "x", "--Q", "1 0 1", "--T", "1 0 1", "--caps", caps}).code == 2);

    r = run({"sweep", "--k", "10", "--N", "2..3", "--Q", "1 0 1", "--T", "1 0 1", "--caps", caps, "--timing"});
    std::istringstream in2(r.out);
    std::getline(in2, line);
    std::getline(in2, line);
    CHECK(line.back() != ',');
}

TEST_CASE("sweep output does not depend on workers; env overrides") {
    const auto caps = write_caps("small", small);
    const auto a = run({"sweep", "--k", "10", "--N", "1..4", "--Q", "1 0 1", "--T", "1 0 2", "--caps", caps});
    const auto b = run({"sweep", "--k", "10", "--N", "1..4", "--Q", "1 0 1", "--T", "1 0 2", "--caps", caps,
                        "--workers", "3"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);

    setenv("SIEGEL_K", "10", 1);
    setenv("SIEGEL_CAPS", caps.c_str(), 1);
    const auto c = run({"sweep", "--N", "1..4", "--Q", "1 0 1", "--T", "1 0 2"});
    unsetenv("SIEGEL_K");
    unsetenv("SIEGEL_CAPS");
    CHECK(c.code == 0);
    CHECK(c.out == a.out);
}

TEST_CASE("range parsing and fit") {
    CHECK(cli::parse_range("1..20") == std::pair<i64, i64>{1, 20});
    CHECK(cli::parse_range("7") == std::pair<i64, i64>{7, 7});
    CHECK_THROWS_AS(cli::parse_range("0..3"), DomainError);
    CHECK_THROWS_AS(cli::parse_range("3..1"), DomainError);
    CHECK_THROWS_AS(cli::parse_range("1..x"), DomainError);

    std::vector<cli::SweepRow> rows;
    for (i64 N = 1; N <= 6; ++N) {
        cli::SweepRow r;
        r.N = N;
        r.result.E = Complex(3.0 * std::pow(static_cast<double>(N), -1.5), 0);
        rows.push_back(r);
    }
    const auto f = cli::fit_decay(rows);
    CHECK(f.points == 6);
    REQUIRE(f.slope.has_value());
    CHECK(*f.slope == doctest::Approx(-1.5));
    rows.resize(3);
    CHECK_FALSE(cli::fit_decay(rows).slope.has_value());
}

TEST_CASE("format_complex") {
    CHECK(cli::format_complex({2, 2}) == "2+2i");
    CHECK(cli::format_complex({7, 1e-17}) == "7");
    CHECK(cli::format_complex({0, -1}) == "-i");
    CHECK(cli::format_complex({1.5, -0.25}) == "1.5-0.25i");
}

TEST_CASE("hidden oracle subcommand") {
    auto r = run({"oracle", "--k", "6", "--Q", "1 0 1", "--T", "1 0 1", "--C", "0 0 0 0", "--D", "1 0 0 1"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["rank"] == 0);
    CHECK(j["value"]["re"].get<double>() == doctest::Approx(1));
    CHECK(run({"--help"}).out.find("oracle") == std::string::npos);
}
