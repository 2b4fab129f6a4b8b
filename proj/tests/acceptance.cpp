// Runs the shipped claim suite and prints one PASS/FAIL line per criterion.
// Claims are grouped by their two-digit id prefix.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <string>

#include "finsler/finsler.hpp"

using namespace finsler;

namespace {

struct Criterion {
    const char* title;
    double time_limit; // seconds; 0 means none
};

const std::map<int, Criterion> criteria = {
    {1, {"shifted Funk flag curvature -1/4", 60.0}},
    {2, {"pure Funk S / ((n+1) F) = 1/2", 120.0}},
    {3, {"shifted Funk S - (n+1)F/2 is a closed 1-form", 0.0}},
    {4, {"incomplete slab: K = 0, S = 0, J above the frozen witness", 0.0}},
    {5, {"Szabo family: Berwald, J = 0, S = 0, K <= 0, R(I) = 0", 0.0}},
    {6, {"torsion transport along shifted Funk geodesics", 0.0}},
    {7, {"universal invariants on every zoo kind", 300.0}},
    {8, {"product metric identities and positivity gate", 0.0}},
    {9, {"implicit Funk solver", 0.0}},
    {10, {"Randers Cartan bound", 0.0}},
    {11, {"phi constant / phi convex along geodesics", 0.0}},
    {12, {"Riemannian baselines and jet derivatives", 0.0}},
};

json load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    return json::parse(in);
}

// Passing profile accepted, violating ones rejected, with the reason naming a condition.
bool gate_behaves(std::string& why)
{
    const RiemannianModel h{RiemannianModel::Kind::hyperbolic_disk, 2, {}};
    const RiemannianModel line{RiemannianModel::Kind::flat, 1, {}};
    try {
        make_szabo_product(h, line, {ProductProfile::Kind::szabo, 0.5, 2.0});
    } catch (const Error& e) {
        why = std::string("gate rejected eps = 0.5: ") + e.what();
        return false;
    }
    for (const ProductProfile& bad : {ProductProfile{ProductProfile::Kind::szabo, -0.6, 2.0},
                                      ProductProfile{ProductProfile::Kind::power_mean, 0.0, 3.0}}) {
        try {
            make_szabo_product(h, line, bad);
            why = std::string("gate accepted a violating ") + to_string(bad.kind) + " profile";
            return false;
        } catch (const InvalidParameterError& e) {
            if (std::string(e.what()).find("violates") == std::string::npos) {
                why = std::string("unexpected rejection reason: ") + e.what();
                return false;
            }
        }
    }
    return true;
}

bool witness_matches(const std::vector<Claim>& claims, const json& witness, std::string& why)
{
    for (const Claim& c : claims) {
        if (c.target.kind == Target::Kind::max_exceeds) {
            if (c.target.value != witness["threshold"].get<double>()) {
                why = "witness claim threshold differs from the frozen value";
                return false;
            }
            return true;
        }
    }
    why = "no witness claim";
    return false;
}

} // namespace

int main(int argc, char** argv)
{
    const std::string suite_path = argc > 1 ? argv[1] : FINSLER_SUITE_PATH;
    const std::string data_dir = argc > 2 ? argv[2] : FINSLER_TEST_DATA_DIR;
    std::map<int, std::vector<Claim>> groups;
    json witness;
    try {
        for (Claim& c : parse_suite(load(suite_path))) {
            groups[std::stoi(c.id.substr(0, 2))].push_back(std::move(c));
        }
        witness = load(data_dir + "/slab_witness.json");
    } catch (const std::exception& e) {
        std::cerr << "cannot load the acceptance suite: " << e.what() << '\n';
        return 2;
    }

    int failed = 0;
    for (const auto& [num, crit] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        const auto it = groups.find(num);
        std::vector<std::string> notes;
        bool ok = it != groups.end() && !it->second.empty();
        if (!ok) {
            notes.push_back("no claims");
        } else {
            const SuiteReport rep = run_suite(it->second);
            for (const ClaimReport& r : rep.claims) {
                if (!r.pass) {
                    ok = false;
                    notes.push_back(r.id + ": " + r.diagnostic);
                }
            }
        }
        std::string why;
        if (num == 4 && ok && !witness_matches(it->second, witness, why)) {
            ok = false;
            notes.push_back(why);
        }
        if (num == 8 && !gate_behaves(why)) {
            ok = false;
            notes.push_back(why);
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (crit.time_limit > 0.0 && secs > crit.time_limit) {
            ok = false;
            notes.push_back("took " + std::to_string(secs) + " s, limit " + std::to_string(crit.time_limit) + " s");
        }
        char head[160];
        std::snprintf(head, sizeof head, "%s criterion %2d: %s (%d claims, %.1f s)", ok ? "PASS" : "FAIL", num,
                      crit.title, it == groups.end() ? 0 : static_cast<int>(it->second.size()), secs);
        std::cout << head << '\n';
        for (const std::string& n : notes) {
            std::cout << "    " << n << '\n';
        }
        failed += ok ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << '\n';
    return failed == 0 ? 0 : 1;
}
