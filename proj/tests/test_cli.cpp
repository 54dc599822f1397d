#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "blowup/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = blowup::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("blowup_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> csv_row(const std::string& csv, std::size_t index)
{
    std::istringstream in(csv);
    std::string line;
    for (std::size_t i = 0; i <= index; ++i)
        std::getline(in, line);
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');)
        cells.push_back(cell);
    return cells;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("profile dump to stdout")
    {
        const Run r = run_cli({"profile", "--kind", "z0", "--dump", "-"});
        REQUIRE(r.code == 0);
        CHECK(r.out.rfind("s,z,zprime,residual\n", 0) == 0);
        const auto row = csv_row(r.out, 201);
        REQUIRE(row.size() == 4);
        CHECK(std::stod(row[0]) == 0.0);
        CHECK(std::stod(row[1]) == doctest::Approx(std::log(64.0 / 81.0)).epsilon(1e-14));
        CHECK(r.err.find("mass 4") != std::string::npos);
    }

    TEST_CASE("recurrence writes CSV and JSON")
    {
        const fs::path dir = scratch("rec");
        const Run r = run_cli({"--out", dir.string(), "recurrence", "--p", "3", "--k", "5"});
        REQUIRE(r.code == 0);
        const std::string csv = blowup::read_text(dir / "recurrence.csv");
        CHECK(std::stod(csv_row(csv, 2)[1]) == doctest::Approx((std::sqrt(3.0) - 1.0) / 2.0).epsilon(1e-12));
        const auto j = nlohmann::json::parse(blowup::read_text(dir / "recurrence.json"));
        CHECK(j["rows"].size() == 6);
        CHECK(j["rows"][0]["d"].is_null());
    }

    TEST_CASE("format selection")
    {
        const fs::path dir = scratch("fmt");
        REQUIRE(run_cli({"--out", dir.string(), "--format", "json", "hat-recurrence", "--k", "3"}).code == 0);
        CHECK(fs::exists(dir / "hat_recurrence.json"));
        CHECK_FALSE(fs::exists(dir / "hat_recurrence.csv"));
    }

    TEST_CASE("shoot with an inline spec")
    {
        const fs::path dir = scratch("shoot");
        const Run r = run_cli({"--out", dir.string(), "shoot", "--spec", R"({"p": 1})", "--mu", "1"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(blowup::read_text(dir / "shot.json"));
        CHECK(j["lambda"].get<double>() == doctest::Approx(8.0 * (std::exp(0.5) - 1.0) * std::exp(-1.0)).epsilon(1e-9));
        CHECK(j["termination"] == "HitZero");
        CHECK(blowup::read_text(dir / "solution.csv").rfind("s,u,duds,A,M,W\n", 0) == 0);
    }

    TEST_CASE("analyze reports bubbles and intersections")
    {
        const fs::path dir = scratch("analyze");
        const Run r = run_cli({"--out", dir.string(), "analyze", "--spec", R"({"p": 3, "variant": "H4"})", "--mu",
                               "6", "--curves", "U:2,U:1.5,V:0"});
        REQUIRE(r.code == 0);
        const auto j = nlohmann::json::parse(blowup::read_text(dir / "analysis.json"));
        CHECK(j["bubbles"].size() >= 2);
        CHECK(j["intersections"][0]["Z"] == 4);
        CHECK(j["intersections"][1]["Z"] == 3);
        CHECK(j["intersections"][2]["curve"].get<std::string>().find("m=-5") != std::string::npos);
        CHECK(fs::exists(dir / "phi_psi.csv"));
    }

    TEST_CASE("argument errors exit with 2")
    {
        CHECK(run_cli({}).code == 2);
        CHECK(run_cli({"recurrence", "--p", "2", "--k", "5"}).code == 2);
        CHECK(run_cli({"recurrence", "--p", "abc", "--k", "5"}).code == 2);
        CHECK(run_cli({"profile", "--kind", "nope", "--dump", "-"}).code == 2);
        CHECK(run_cli({"shoot", "--spec", "{not json", "--mu", "1"}).code == 2);
        CHECK(run_cli({"shoot", "--spec", R"({"p": 1, "extra": 2})", "--mu", "1"}).code == 2);
        CHECK(run_cli({"analyze", "--spec", R"({"p": 3})", "--mu", "2", "--curves", "W:1"}).code == 2);
        CHECK(run_cli({"singular", "--spec", R"({"p": 3})"}).code == 2);
        CHECK(run_cli({"diagram", "--spec", R"({"p": 3})", "--mu-min", "3", "--mu-max", "2", "--points", "4"}).code == 2);
        CHECK(run_cli({"--help"}).code == 0);
    }

    TEST_CASE("numerical errors exit with 1 and report JSON")
    {
        const fs::path dir = scratch("numerr");
        const Run r = run_cli({"--out", dir.string(), "analyze", "--spec", R"({"p": 1})", "--mu", "1", "--min-phi", "5"});
        CHECK(r.code == 1);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j["error"] == "no_bubbles");
    }

    TEST_CASE("config file with command-line precedence")
    {
        const fs::path dir = scratch("config");
        const fs::path cfg = dir / "cfg.json";
        std::ofstream(cfg) << R"({"out": ")" << (dir / "from_config").string()
                           << R"(", "recurrence": {"p": 4, "k": 3}})";
        REQUIRE(run_cli({"--config", cfg.string(), "recurrence"}).code == 0);
        const std::string csv = blowup::read_text(dir / "from_config" / "recurrence.csv");
        CHECK(std::stod(csv_row(csv, 2)[1]) == doctest::Approx(0.5436890).epsilon(1e-7));

        REQUIRE(run_cli({"--config", cfg.string(), "recurrence", "--p", "3"}).code == 0);
        const std::string csv3 = blowup::read_text(dir / "from_config" / "recurrence.csv");
        CHECK(std::stod(csv_row(csv3, 2)[1]) == doctest::Approx(0.3660254).epsilon(1e-7));

        std::ofstream(cfg) << R"({"recurrence": {"p": 4, "k": 3, "bogus": 1}})";
        CHECK(run_cli({"--config", cfg.string(), "recurrence"}).code == 2);
    }
}
