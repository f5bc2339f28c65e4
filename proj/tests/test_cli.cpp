#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cli.hpp"

using namespace ncsrobust;
using Catch::Approx;

namespace {

const std::string src = NCS_SOURCE_DIR;
std::string scenario(const std::string& name) { return src + "/scenarios/" + name; }

/// Numbers compared to 1e-5 relative; everything else exactly.
void expect_matches(const json& got, const json& want, const std::string& path = "$") {
    INFO(path);
    if (want.is_number() && got.is_number()) {
        const double w = want.get<double>(), g = got.get<double>();
        CHECK(std::abs(g - w) <= 1e-5 * std::max(1.0, std::abs(w)));
        return;
    }
    REQUIRE(got.type() == want.type());
    if (want.is_object()) {
        REQUIRE(got.size() == want.size());
        for (auto it = want.begin(); it != want.end(); ++it) {
            REQUIRE(got.contains(it.key()));
            expect_matches(got.at(it.key()), it.value(), path + "." + it.key());
        }
    } else if (want.is_array()) {
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            expect_matches(got[i], want[i], path + "[" + std::to_string(i) + "]");
        }
    } else {
        CHECK(got == want);
    }
}

json golden(const std::string& name) { return load_json_file(src + "/tests/golden/" + name); }

} // namespace

TEST_CASE("margin command", "[cli]") {
    const auto r = cli::run({"margin", "--plant", scenario("double_integrator"), "--controller", scenario("opt_controller")});
    CHECK(r.exit_code == 0);
    CHECK(r.command == "margin");
    CHECK(r.outputs.at("norm").get<double>() == Approx(2.61313).epsilon(1e-6));
    CHECK(r.outputs.at("margin").get<double>() == Approx(0.382683).epsilon(1e-6));
    CHECK(r.outputs.at("arcsin_margin").get<double>() == Approx(0.392699).epsilon(1e-6));
    expect_matches(r.outputs, golden("margin.json"));
    CHECK(json::parse(r.text) == r.outputs);
}

TEST_CASE("margin from a scenario", "[cli]") {
    const auto r = cli::run({"margin", "--scenario", scenario("example_stable.json")});
    CHECK(r.exit_code == 0);
    expect_matches(r.outputs, golden("margin.json"));
}

TEST_CASE("certify golden outputs and exit codes", "[cli]") {
    const auto ok = cli::run({"certify", "--scenario", scenario("example_stable")});
    CHECK(ok.exit_code == 0);
    CHECK(ok.outputs.at("verdict") == "certified");
    expect_matches(ok.outputs, golden("certify_stable.json"));

    const auto bad = cli::run({"certify", "--scenario", scenario("example_unstable")});
    CHECK(bad.exit_code == 1);
    CHECK(bad.outputs.at("verdict") == "not_certified");
    expect_matches(bad.outputs, golden("certify_unstable.json"));
    CHECK(bad.outputs.at("provenance").get<std::string>().find("nu-gap") != std::string::npos);
}

TEST_CASE("certify overrides", "[cli]") {
    const auto r = cli::run({"certify", "--scenario", scenario("example_unstable"), "--r-p", "0", "--radii", "0.1,0.1"});
    CHECK(r.exit_code == 0);
    CHECK(r.outputs.at("lhs").get<double>() == Approx(2.0 * std::asin(0.1)).epsilon(1e-5));
    CHECK_FALSE(r.outputs.contains("gap"));
}

TEST_CASE("nugap command", "[cli]") {
    const auto d = cli::run({"nugap", "--p1", scenario("double_integrator"), "--delay", "0.1"});
    CHECK(d.exit_code == 0);
    expect_matches(d.outputs, golden("nugap_delay.json"));

    const auto same = cli::run({"nugap", "--p1", scenario("double_integrator"), "--p2", scenario("double_integrator")});
    CHECK(same.exit_code == 0);
    CHECK(same.outputs.at("value").get<double>() == Approx(0.0).margin(1e-9));
    CHECK(same.outputs.at("winding_ok") == true);
}

TEST_CASE("precision flag", "[cli]") {
    const auto r = cli::run({"--precision", "12", "margin", "--scenario", scenario("example_stable")});
    CHECK(r.outputs.at("margin").get<double>() == Approx(0.382683432).epsilon(1e-7));
    const auto d = cli::run({"margin", "--scenario", scenario("example_stable")});
    CHECK(d.outputs.at("margin").get<double>() == 0.382683);
}

TEST_CASE("error classes map to exit codes", "[cli]") {
    CHECK(cli::run({}).exit_code == 2);
    CHECK(cli::run({"frobnicate"}).exit_code == 2);
    CHECK(cli::run({"margin", "--bogus"}).exit_code == 2);
    CHECK(cli::run({"margin", "--plant", "/nonexistent", "--controller", "/nonexistent"}).exit_code == 3);

    const auto tmp = std::filesystem::temp_directory_path() / "ncsrobust_cli_test";
    std::filesystem::create_directories(tmp);
    std::ofstream(tmp / "broken.json") << "{ not json";
    std::ofstream(tmp / "zero.json") << R"({"num": [0], "den": [1]})";
    CHECK(cli::run({"certify", "--scenario", (tmp / "broken.json").string()}).exit_code == 3);
    const auto dom = cli::run({"margin", "--plant", scenario("double_integrator"), "--controller", (tmp / "zero.json").string()});
    CHECK(dom.exit_code == 4);
    CHECK(dom.text.find("nominal loop unstable") != std::string::npos);
}

TEST_CASE("simulate writes traces and plots", "[cli]") {
    const auto tmp = std::filesystem::temp_directory_path() / "ncsrobust_cli_test";
    std::filesystem::create_directories(tmp);
    const auto r = cli::run({"simulate", "--scenario", scenario("example_stable"), scenario("example_unstable"), "--jobs", "2",
                             "--out", (tmp / "trace.csv").string(), "--plot", (tmp / "trace.svg").string()});
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.outputs.at("runs").size() == 2);
    for (const auto& run : r.outputs.at("runs")) {
        CHECK(std::filesystem::exists(run.at("csv").get<std::string>()));
        CHECK(std::filesystem::exists(run.at("svg").get<std::string>()));
        CHECK(run.at("steps") == 40001);
    }
    std::ifstream csv(r.outputs.at("runs")[0].at("csv").get<std::string>());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,p0,q0,p1,q1,u0,y0,u1,y1,v,w");
}

TEST_CASE("paper-example combined report", "[cli]") {
    const auto r = cli::run({"paper-example", "--case", "stable", "--duration", "10"});
    REQUIRE(r.exit_code == 0);
    CHECK(r.outputs.at("certificate").at("verdict") == "certified");
    CHECK(r.outputs.at("gap").at("value").get<double>() == Approx(0.0569466).epsilon(1e-5));
    CHECK(r.outputs.at("stage_gains").size() == 4);
    CHECK(r.outputs.at("simulation").contains("tail_to_peak"));

    const auto u = cli::run({"paper-example", "--case", "unstable", "--duration", "10"});
    CHECK(u.exit_code == 0);
    CHECK(u.outputs.at("certificate").at("verdict") == "not_certified");
    CHECK(cli::run({"paper-example", "--case", "sideways"}).exit_code == 2);
}

TEST_CASE("written scenario reproduces the bundled one", "[cli]") {
    const auto tmp = std::filesystem::temp_directory_path() / "ncsrobust_cli_test";
    std::filesystem::create_directories(tmp);
    const auto path = (tmp / "stable.json").string();
    REQUIRE(cli::run({"paper-example", "--case", "stable", "--write-scenario", path}).exit_code == 0);
    CHECK(load_json_file(path) == load_json_file(scenario("example_stable.json")));
}

TEST_CASE("geometry self-test command", "[cli]") {
    const auto r = cli::run({"geometry-selftest", "--seed", "3"});
    CHECK(r.exit_code == 0);
    CHECK(r.outputs.at("ok") == true);
    CHECK(r.outputs.at("checks").size() == 5);
}
