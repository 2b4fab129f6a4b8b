// Claim parsing, evaluation, reporting, and the frozen slab witness.

#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "finsler/finsler.hpp"

using namespace finsler;

namespace {

json funk_flag_claim(double target, const std::string& id = "funk-flag")
{
    json j = json::parse(R"({"source": "test", "metric": {"kind": "funk_ball_shifted", "dimension": 2, "params": {}},
        "quantity": "flag_curvature", "tolerance": {"value": 1e-6, "kind": "relative"},
        "samples": {"count": 20, "seed": 5}})");
    j["id"] = id;
    j["target"] = {{"kind", "value"}, {"value", target}};
    return j;
}

json read_json(const std::string& path)
{
    std::ifstream in(path);
    EXPECT_TRUE(in.good()) << path;
    return json::parse(in);
}

} // namespace

TEST(Verify, EmptySuitePasses)
{
    const SuiteReport r = run_suite(parse_suite(std::string(R"({"claims": []})")));
    EXPECT_TRUE(r.pass);
    EXPECT_TRUE(r.claims.empty());
}

TEST(Verify, TrueClaimPasses)
{
    const ClaimReport r = run_claim(claim_from_json(funk_flag_claim(-0.25)));
    EXPECT_TRUE(r.pass) << r.diagnostic;
    EXPECT_EQ(r.evaluated, 20);
    EXPECT_NEAR(r.stats.mean, -0.25, 1e-9);
}

TEST(Verify, ViolatedClaimFailsAndIsNamed)
{
    const SuiteReport r = run_suite({claim_from_json(funk_flag_claim(-0.25, "good")),
                                     claim_from_json(funk_flag_claim(-0.3, "wrong-target"))});
    EXPECT_FALSE(r.pass);
    ASSERT_EQ(r.claims.size(), 2u);
    EXPECT_EQ(r.claims[1].id, "wrong-target");
    EXPECT_FALSE(r.claims[1].pass);
    EXPECT_FALSE(r.claims[1].diagnostic.empty());
    EXPECT_GT(r.claims[1].worst.excess, 1.0);
    EXPECT_EQ(r.claims[1].worst.at.x.size(), 2u);
}

TEST(Verify, ReportsAreDeterministic)
{
    std::vector<Claim> claims;
    for (const char* id : {"c", "a", "b"}) {
        claims.push_back(claim_from_json(funk_flag_claim(-0.25, id)));
    }
    const json one = to_json(run_suite(claims, 1), false);
    const json two = to_json(run_suite(claims, 3), false);
    EXPECT_EQ(one.dump(), two.dump());
    EXPECT_EQ(one["claims"][0]["id"], "a");
    EXPECT_FALSE(one["claims"][0].contains("runtime_seconds"));
}

TEST(Verify, ParseRejectsBadClaims)
{
    json j = funk_flag_claim(-0.25);
    j["reference"] = "x";
    EXPECT_THROW(claim_from_json(j), ParseError);
    j = funk_flag_claim(-0.25);
    j["tolerance"]["value"] = 0.0;
    EXPECT_THROW(claim_from_json(j), ParseError);
    j = funk_flag_claim(-0.25);
    j["quantity"] = "torsion_of_the_moon";
    EXPECT_THROW(claim_from_json(j), ParseError);
    EXPECT_THROW(parse_suite(std::string("[1, 2")), ParseError);
}

TEST(Verify, ClaimJsonRoundTrips)
{
    const Claim c = claim_from_json(funk_flag_claim(-0.25));
    EXPECT_EQ(to_json(claim_from_json(to_json(c))).dump(), to_json(c).dump());
}

TEST(Verify, ComputeErrorsBecomeFailures)
{
    json j = funk_flag_claim(-0.25);
    j["metric"]["params"]["a"] = {2.0, 0.0};
    const ClaimReport r = run_claim(claim_from_json(j));
    EXPECT_FALSE(r.pass);
    EXPECT_NE(r.diagnostic.find("|a| < 1"), std::string::npos) << r.diagnostic;
}

TEST(Verify, ClosedOneFormOnRiemannianMetric)
{
    const MetricSpec h{"riemannian", 2, json{{"model", "hyperbolic_disk"}}};
    const ClaimReport r = closed_one_form_check(h, 0.0, SamplePlan{3, 0.3, 1});
    EXPECT_TRUE(r.pass) << r.diagnostic;
}

TEST(Verify, CsvHasOneRowPerClaim)
{
    const SuiteReport r = run_suite({claim_from_json(funk_flag_claim(-0.25, "x"))});
    std::ostringstream os;
    write_csv(os, r);
    std::istringstream in(os.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        ++lines;
    }
    EXPECT_EQ(lines, 2);
}

TEST(SlabWitness, LibraryMatchesHighPrecisionOracle)
{
    const json w = read_json(std::string(FINSLER_TEST_DATA_DIR) + "/slab_witness.json");
    const MetricField m = make_incomplete_slab(3);
    double smallest = INFINITY;
    for (const json& s : w["samples"]) {
        const TangentSample at{s["x"].get<Vec>(), s["y"].get<Vec>()};
        const double want = std::stod(s["landsberg_norm"].get<std::string>());
        const double got = g_norm(fundamental_tensor(m, at), mean_landsberg(m, at).contravariant);
        EXPECT_NEAR(got, want, 1e-10 * want);
        smallest = std::min(smallest, want);
    }
    const double threshold = w["threshold"];
    EXPECT_GT(threshold, 0.0);
    EXPECT_LT(threshold, smallest);
}
