// finsler: evaluate metrics, trace geodesics and run claim suites.
// Data goes to stdout (or --out), diagnostics to stderr.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsler/finsler.hpp"

using namespace finsler;

namespace {

enum Exit { ok = 0, failed = 1, usage = 2, compute = 3 };

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// JSON text, a path to a JSON file, or a bare kind name (catalog defaults).
MetricSpec load_metric(const std::string& arg)
{
    const auto first = arg.find_first_not_of(" \t\n");
    if (first != std::string::npos && arg[first] == '{') {
        return parse_metric_spec(arg);
    }
    for (const MetricSpec& s : zoo_catalog()) {
        if (s.kind == arg) {
            return s;
        }
    }
    return parse_metric_spec(read_file(arg));
}

// Writes to --out when given, else stdout.
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw ParseError("cannot write '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void print_vec(std::ostream& os, const std::string& name, const Vec& v)
{
    os << name;
    for (double e : v) {
        os << ' ' << e;
    }
    os << '\n';
}

void print_matrix(std::ostream& os, const std::string& name, const Matrix& m)
{
    for (int i = 0; i < m.n; ++i) {
        os << name << '[' << i << ']';
        for (int j = 0; j < m.n; ++j) {
            os << ' ' << m(i, j);
        }
        os << '\n';
    }
}

struct EvalArgs {
    std::string metric;
    std::vector<double> x, y, u;
    std::vector<std::string> quantities{"F"};
    std::string out;
};

int cmd_eval(const EvalArgs& a)
{
    const MetricField m = make_metric(load_metric(a.metric));
    const TangentSample at{a.x, a.y};
    check_sample(m, at);
    Output out(a.out);
    std::ostream& os = out.stream();
    os << std::setprecision(12);
    for (const std::string& q : a.quantities) {
        if (q == "F") {
            os << "F " << finsler_norm(m, at) << '\n';
        } else if (q == "g") {
            print_matrix(os, "g", fundamental_tensor(m, at).g);
        } else if (q == "G") {
            print_vec(os, "G", spray(m, at).G);
        } else if (q == "N") {
            print_matrix(os, "N", spray(m, at).N);
        } else if (q == "R") {
            print_matrix(os, "R", riemann(m, at).R);
        } else if (q == "K") {
            if (a.u.empty()) {
                throw InvalidParameterError("quantity K needs --u");
            }
            os << "K " << flag_curvature(m, at, a.u) << '\n';
        } else if (q == "S") {
            os << "S " << s_curvature(m, at) << '\n';
        } else if (q == "I") {
            print_vec(os, "I", mean_cartan(m, at).covariant);
        } else if (q == "J") {
            print_vec(os, "J", mean_landsberg(m, at).covariant);
        } else if (q == "tau") {
            os << "tau " << distortion(m, at) << '\n';
        } else if (q == "sigma") {
            os << "sigma " << volume_density(m, at.x) << '\n';
        } else if (q == "cartan_norm") {
            os << "cartan_norm " << cartan_norm(m, at.x).value << '\n';
        } else {
            throw InvalidParameterError("unknown quantity '" + q + "' (F g G N R K S I J tau sigma cartan_norm)");
        }
    }
    return ok;
}

struct GeodesicArgs {
    std::string metric;
    std::vector<double> x, y, t_span{0.0, 1.0};
    double tol = 1e-10;
    int nodes = 257;
    bool torsion = false;
    std::string out;
};

int cmd_geodesic(const GeodesicArgs& a)
{
    const MetricField m = make_metric(load_metric(a.metric));
    if (a.t_span.size() != 2) {
        throw InvalidParameterError("--t-span takes two values");
    }
    const GeodesicTrace tr = integrate_geodesic(m, a.x, a.y, {a.t_span[0], a.t_span[1]}, a.tol, a.nodes);
    std::cerr << std::setprecision(12) << "speed drift " << tr.speed_drift << '\n';
    if (tr.exited) {
        std::cerr << "geodesic left the chart at t = " << tr.exit_time << "; last state x =";
        for (double v : tr.positions.empty() ? Vec{} : tr.positions.back()) {
            std::cerr << ' ' << v;
        }
        std::cerr << '\n';
    }
    Output out(a.out);
    if (a.torsion && !tr.complete()) {
        std::cerr << "torsion columns need a complete trace; writing positions only\n";
    }
    if (a.torsion && tr.complete()) {
        const TorsionTrace tt = torsion_trace(m, tr);
        std::cerr << "max residual " << max_interior_residual(tt) << " (max |I| " << tt.max_I << "), DI agreement "
                  << tt.di_agreement << '\n';
        write_trace_csv(out.stream(), tr, &tt);
    } else {
        write_trace_csv(out.stream(), tr);
    }
    return ok;
}

struct SuiteArgs {
    std::string file;
    int jobs = 1;
    long long seed = -1;
    double tighten = 1.0;
    bool no_runtime = false;
    std::string out;
    std::string csv;
};

int report_suite(const std::vector<Claim>& claims, const SuiteArgs& a)
{
    const SuiteReport rep = run_suite(claims, a.jobs);
    for (const auto& r : rep.claims) {
        std::cerr << (r.pass ? "PASS " : "FAIL ") << r.id;
        if (!r.pass) {
            std::cerr << ": " << r.diagnostic;
        }
        std::cerr << '\n';
    }
    {
        Output out(a.out);
        out.stream() << to_json(rep, !a.no_runtime).dump(2) << '\n';
    }
    if (!a.csv.empty()) {
        std::ofstream c(a.csv);
        if (!c) {
            throw ParseError("cannot write '" + a.csv + "'");
        }
        write_csv(c, rep);
    }
    return rep.pass ? ok : failed;
}

std::vector<Claim> adjust(std::vector<Claim> claims, const SuiteArgs& a)
{
    for (Claim& c : claims) {
        if (a.seed >= 0) {
            c.samples.seed = static_cast<std::uint64_t>(a.seed);
        }
        c.tolerance.value /= a.tighten;
    }
    return claims;
}

int cmd_suite(const SuiteArgs& a) { return report_suite(adjust(parse_suite(read_file(a.file)), a), a); }

int cmd_claim(const std::string& arg, const SuiteArgs& a)
{
    const auto first = arg.find_first_not_of(" \t\n");
    const std::string text = first != std::string::npos && arg[first] == '{' ? arg : read_file(arg);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("claim: ") + e.what());
    }
    return report_suite(adjust({claim_from_json(j)}, a), a);
}

int cmd_zoo(bool emit_specs, const std::string& path)
{
    Output out(path);
    if (emit_specs) {
        json arr = json::array();
        for (const MetricSpec& s : zoo_catalog()) {
            arr.push_back(to_json(s));
        }
        out.stream() << arr.dump(2) << '\n';
    } else {
        for (const std::string& k : metric_kinds()) {
            out.stream() << k << '\n';
        }
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical Finsler geometry: metrics, curvature, geodesics and claim suites"};
    app.require_subcommand(1);

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "evaluate quantities at a tangent sample");
    eval->add_option("--metric", ev.metric, "metric spec: JSON text, JSON file, or a kind name")->required();
    eval->add_option("--x", ev.x, "base point")->required()->delimiter(',');
    eval->add_option("--y", ev.y, "tangent vector")->required()->delimiter(',');
    eval->add_option("--u", ev.u, "flag pole for K")->delimiter(',');
    eval->add_option("--quantity", ev.quantities, "F g G N R K S I J tau sigma cartan_norm")->delimiter(',');
    eval->add_option("--out", ev.out, "output file (default stdout)");

    GeodesicArgs geo;
    auto* geodesic = app.add_subcommand("geodesic", "integrate a geodesic and write a CSV trace");
    geodesic->add_option("--metric", geo.metric, "metric spec: JSON text, JSON file, or a kind name")->required();
    geodesic->add_option("--x", geo.x, "initial point")->required()->delimiter(',');
    geodesic->add_option("--y", geo.y, "initial velocity")->required()->delimiter(',');
    geodesic->add_option("--t-span", geo.t_span, "t0,t1")->delimiter(',');
    geodesic->add_option("--tol", geo.tol, "integrator tolerance");
    geodesic->add_option("--nodes", geo.nodes, "output nodes");
    geodesic->add_flag("--torsion", geo.torsion, "add phi and the torsion residual columns");
    geodesic->add_option("--out", geo.out, "CSV file (default stdout)");

    SuiteArgs su;
    auto add_run_opts = [&](CLI::App* c) {
        c->add_option("--jobs", su.jobs, "worker threads")->check(CLI::PositiveNumber);
        c->add_option("--seed", su.seed, "override every claim's seed");
        c->add_option("--tighten", su.tighten, "divide every tolerance by this factor")->check(CLI::PositiveNumber);
        c->add_flag("--no-runtime", su.no_runtime, "omit runtime fields from the JSON report");
        c->add_option("--out", su.out, "JSON report file (default stdout)");
        c->add_option("--csv", su.csv, "also write a CSV table");
    };
    auto* suite = app.add_subcommand("suite", "run a claim suite");
    suite->add_option("file", su.file, "suite JSON")->required();
    add_run_opts(suite);

    std::string claim_arg;
    auto* claim = app.add_subcommand("claim", "run a single claim");
    claim->add_option("claim", claim_arg, "claim JSON text or file")->required();
    add_run_opts(claim);

    bool emit = false;
    std::string zoo_out;
    auto* zoo = app.add_subcommand("zoo-list", "list metric kinds");
    zoo->add_flag("--emit-specs", emit, "print one JSON spec per kind");
    zoo->add_option("--out", zoo_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        if (*eval) {
            return cmd_eval(ev);
        }
        if (*geodesic) {
            return cmd_geodesic(geo);
        }
        if (*suite) {
            return cmd_suite(su);
        }
        if (*claim) {
            return cmd_claim(claim_arg, su);
        }
        if (*zoo) {
            return cmd_zoo(emit, zoo_out);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const InvalidParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return compute;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return compute;
    }
    return usage;
}
