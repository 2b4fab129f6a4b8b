// End-to-end runs of the command-line tool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "finsler/finsler.hpp"

using namespace finsler;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun cli(const std::string& args)
{
    const std::string cmd = std::string(FINSLER_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        return r;
    }
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) {
        r.out.append(buf, got);
    }
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

double value_after(const std::string& out, const std::string& key)
{
    const auto pos = out.find(key + " ");
    return pos == std::string::npos ? NAN : std::stod(out.substr(pos + key.size() + 1));
}

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("finsler_cli_test_" + name)).string();
}

const char* funk_claim = R"('{"id":"k","source":"s","metric":{"kind":"funk_ball_shifted","dimension":2,"params":{}},)"
                         R"("quantity":"flag_curvature","target":{"kind":"value","value":-0.25},)"
                         R"("tolerance":{"value":1e-6,"kind":"relative"},"samples":{"count":10}}')";

} // namespace

TEST(Cli, EvalEuclideanNorm)
{
    const CliRun r = cli("eval --metric euclidean --x 0,0,0 --y 0.6,0.8,0 --quantity F");
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_after(r.out, "F"), 1.0, 1e-12);
}

TEST(Cli, EvalFunkFlagCurvature)
{
    const CliRun r = cli(R"(eval --metric '{"kind":"funk_ball_shifted","dimension":2,"params":{}}' )"
                      "--x 0.1,0.2 --y 0.3,-0.5 --u 1,0 --quantity K");
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_after(r.out, "K"), -0.25, 1e-9);
}

TEST(Cli, EvalHyperbolicSCurvature)
{
    const CliRun r = cli(R"(eval --metric '{"kind":"riemannian","dimension":3,"params":{"model":"hyperbolic_disk"}}' )"
                      "--x 0.1,0.2,0 --y 0.3,-0.5,0.1 --quantity S");
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_after(r.out, "S"), 0.0, 1e-6);
}

TEST(Cli, GeodesicWritesCsv)
{
    const std::string path = temp_path("geo.csv");
    const CliRun r = cli("geodesic --metric funk_ball_shifted --x 0.1,0,0 --y 0.3,0.2,0 --t-span 0,1 --nodes 33 --torsion"
                      " --out " + path);
    EXPECT_EQ(r.code, 0);
    std::ifstream in(path);
    std::string line;
    int rows = -1;
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 33);
    std::filesystem::remove(path);
}

TEST(Cli, SeedOverrideIsReproducible)
{
    const CliRun a = cli(std::string("claim ") + funk_claim + " --seed 7 --no-runtime");
    const CliRun b = cli(std::string("claim ") + funk_claim + " --seed 7 --no-runtime");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(json::parse(a.out)["claims"][0]["seed"], 7);
}

TEST(Cli, TighteningBreaksTheTolerance)
{
    // values are accurate to ~1e-12 relative, so dividing the tolerance by 1e9 cannot pass
    const CliRun r = cli(std::string("claim ") + funk_claim + " --tighten 1e9");
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(json::parse(r.out)["pass"].get<bool>());
}

TEST(Cli, ZooSpecsRoundTrip)
{
    const CliRun list = cli("zoo-list");
    const CliRun specs = cli("zoo-list --emit-specs");
    ASSERT_EQ(specs.code, 0);
    const json arr = json::parse(specs.out);
    ASSERT_EQ(arr.size(), metric_kinds().size());
    for (const json& j : arr) {
        EXPECT_NO_THROW(make_metric(metric_spec_from_json(j)));
        EXPECT_NE(list.out.find(j["kind"].get<std::string>()), std::string::npos);
    }
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(cli("eval --metric nope --x 0 --y 1").code, 2);
    EXPECT_EQ(cli("eval --metric euclidean --x 0,0 --y 1").code, 3);
    EXPECT_EQ(cli("eval --metric funk_ball_shifted --x 2,0,0 --y 1,0,0").code, 3);
    EXPECT_EQ(cli("suite /nonexistent/suite.json").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
}
