#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("rns_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args)
{
    const std::string cmd = std::string(RNS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string first_line(const fs::path& p)
{
    std::ifstream in(p);
    std::string s;
    std::getline(in, s);
    return s;
}

json read_json(const fs::path& p)
{
    std::ifstream in(p);
    return json::parse(in);
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("znd and profile outputs")
    {
        const fs::path d = scratch("profile");
        REQUIRE(run("znd --out " + d.string()) == 0);
        CHECK(first_line(d / "znd.csv") == "x,tau,u,e,z,T");
        const json m = read_json(d / "manifest.json");
        CHECK(m["manifest_version"] == 1);
        CHECK(m["subcommand"] == "znd");
        CHECK(m["conventions"].contains("T_ig_reading_0.99"));
        CHECK(std::abs(m["results"]["tau_minus"].get<double>() - 0.257) < 5e-3);

        REQUIRE(run("profile --out " + d.string()) == 0);
        CHECK(first_line(d / "profile.csv") == "x,tau,u,e,z,y");
        const json p = read_json(d / "manifest.json");
        CHECK(p["results"]["ratio"].get<double>() > 0.05);
        CHECK(p["results"]["ratio"].get<double>() < 0.2);
    }

    TEST_CASE("manifest replays as a config")
    {
        const fs::path d = scratch("replay");
        REQUIRE(run("znd --set wave.E_A=4.2 --out " + d.string()) == 0);
        const json a = read_json(d / "manifest.json");
        fs::copy_file(d / "manifest.json", d / "prev.json");
        REQUIRE(run("znd --config " + (d / "prev.json").string() + " --out " + d.string()) == 0);
        const json b = read_json(d / "manifest.json");
        CHECK(a["config"] == b["config"]);
        CHECK(a["results"]["k"] == b["results"]["k"]);
    }

    TEST_CASE("fit from the reference tables")
    {
        const fs::path d = scratch("fit");
        REQUIRE(run("fit --out " + d.string()) == 0);
        const json f = read_json(d / "fit.json");
        CHECK(f["upper"]["model"] == "linear_log");
        CHECK(std::abs(f["upper"]["coefficients"][0].get<double>() - 5.67) < 0.05 * 5.67);
        CHECK(std::abs(f["lower"]["coefficients"][1].get<double>() - 2.95) < 0.05 * 2.95);

        REQUIRE(run("delay --set sweep.E_star=2.45 --set sweep.nu=[0.05,0.1] --out " +
                    d.string()) == 0);
        CHECK(first_line(d / "delay.csv") == "nu,E_A_minus,delay");
    }

    TEST_CASE("exit codes")
    {
        const fs::path d = scratch("errors");
        CHECK(run("znd --set wave.bogus=1 --out " + d.string()) == 2);
        CHECK(run("znd --set wave.E_A=\\\"hot\\\" --out " + d.string()) == 2);
        CHECK(run("znd --config /nonexistent.json --out " + d.string()) == 2);
        CHECK(run("delay --out " + d.string()) == 2);
        CHECK(run("nosuchcommand") == 2);
        // 0.99 read as a temperature lies above the Neumann spike
        CHECK(run("znd --set wave.T_ig=0.99 --out " + d.string()) == 3);
        CHECK(run("znd --set wave.q=5 --out " + d.string()) == 3);
        CHECK(run("profile --set solver.max_newton=0 --set wave.k=31.11 --out " + d.string()) == 4);
    }

    TEST_CASE("ignition weight")
    {
        const fs::path d = scratch("weight");
        REQUIRE(run("znd --set wave.T_ig_weight=0.01 --out " + d.string()) == 0);
        const json m = read_json(d / "manifest.json");
        CHECK(std::abs(m["results"]["T_ig"].get<double>() - 6.64e-2) < 1e-3);
    }
}
