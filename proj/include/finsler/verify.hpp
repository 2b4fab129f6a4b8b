#pragma once

// Claims as data: a metric spec, a quantity evaluated on a seeded sample
// plan, a target and a tolerance. run_claim never throws; failures of the
// metric constructor or of the geometry end up in the report.
//
// Sample semantics per quantity:
//   pointwise quantities   one random (x, y) per sample, plus u for flags
//   geodesic quantities    one unit-speed geodesic per sample
//   closed_one_form        one base point per sample

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "finsler/errors.hpp"
#include "finsler/flow.hpp"
#include "finsler/geometry.hpp"
#include "finsler/sampling.hpp"
#include "finsler/volume.hpp"
#include "finsler/zoo.hpp"

namespace finsler {

enum class Quantity {
    flag_curvature,
    s_curvature,
    s_ratio,
    mean_cartan,
    mean_landsberg,
    cartan_orthogonality,
    sskk1_residual,
    det_identity,
    spray_split,
    funk_pde,
    berwald_quadratic,
    phi_convexity,
    closed_one_form,
    cartan_bound,
    curvature_on_torsion,
    universal,
    jet_fd,
};

inline const std::vector<std::pair<Quantity, std::string>>& quantity_names()
{
    static const std::vector<std::pair<Quantity, std::string>> names = {
        {Quantity::flag_curvature, "flag_curvature"},
        {Quantity::s_curvature, "s_curvature"},
        {Quantity::s_ratio, "s_ratio"},
        {Quantity::mean_cartan, "mean_cartan"},
        {Quantity::mean_landsberg, "mean_landsberg"},
        {Quantity::cartan_orthogonality, "cartan_orthogonality"},
        {Quantity::sskk1_residual, "sskk1_residual"},
        {Quantity::det_identity, "det_identity"},
        {Quantity::spray_split, "spray_split"},
        {Quantity::funk_pde, "funk_pde"},
        {Quantity::berwald_quadratic, "berwald_quadratic"},
        {Quantity::phi_convexity, "phi_convexity"},
        {Quantity::closed_one_form, "closed_one_form"},
        {Quantity::cartan_bound, "cartan_bound"},
        {Quantity::curvature_on_torsion, "curvature_on_torsion"},
        {Quantity::universal, "universal"},
        {Quantity::jet_fd, "jet_fd"},
    };
    return names;
}

inline std::string to_string(Quantity q)
{
    for (const auto& [k, s] : quantity_names()) {
        if (k == q) {
            return s;
        }
    }
    return "?";
}

inline Quantity parse_quantity(const std::string& s)
{
    for (const auto& [k, name] : quantity_names()) {
        if (name == s) {
            return k;
        }
    }
    throw ParseError("unknown quantity '" + s + "'");
}

struct Target {
    // value: |q - value| small; zero: |q| small; at_most / at_least: one-sided;
    // max_exceeds: the largest observed q is strictly above value (a witness).
    enum class Kind { value, zero, at_most, at_least, max_exceeds };
    Kind kind = Kind::zero;
    double value = 0.0;
};

struct Tolerance {
    enum class Kind { absolute, relative };
    double value = 0.0;
    Kind kind = Kind::absolute;
};

struct SamplePlan {
    int count = 100;
    double margin = 0.05;
    std::uint64_t seed = 1;
};

struct Claim {
    std::string id;
    std::string source; // where the claim comes from, free text
    MetricSpec metric;
    Quantity quantity = Quantity::flag_curvature;
    Target target;
    Tolerance tolerance;
    SamplePlan samples;
    json options = json::object(); // quantity-specific knobs
};

struct Statistics {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

struct WorstSample {
    TangentSample at;
    Vec u; // flag pole, when the quantity has one
    double value = 0.0;
    double excess = 0.0; // deviation / allowed; > 1 means the sample fails
};

struct ClaimReport {
    std::string id;
    std::string source;
    std::string quantity;
    bool pass = false;
    int evaluated = 0;
    WorstSample worst;
    Statistics stats;
    double runtime = 0.0; // seconds
    Tolerance tolerance;
    Target target;
    std::uint64_t seed = 0;
    std::string diagnostic;
    json extra = json::object();
};

// ---------------------------------------------------------------------------
// JSON.

namespace detail {

inline const char* to_string(Target::Kind k)
{
    switch (k) {
    case Target::Kind::value:
        return "value";
    case Target::Kind::zero:
        return "zero";
    case Target::Kind::at_most:
        return "at_most";
    case Target::Kind::at_least:
        return "at_least";
    case Target::Kind::max_exceeds:
        return "max_exceeds";
    }
    return "?";
}

inline Target::Kind parse_target_kind(const std::string& s)
{
    for (auto k : {Target::Kind::value, Target::Kind::zero, Target::Kind::at_most, Target::Kind::at_least,
                   Target::Kind::max_exceeds}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    throw ParseError("unknown target kind '" + s + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key)) {
        throw ParseError(where + ": missing '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(where + ": bad '" + key + "': " + e.what());
    }
}

} // namespace detail

inline json to_json(const Claim& c)
{
    return json{{"id", c.id},
                {"source", c.source},
                {"metric", to_json(c.metric)},
                {"quantity", to_string(c.quantity)},
                {"target", {{"kind", detail::to_string(c.target.kind)}, {"value", c.target.value}}},
                {"tolerance",
                 {{"value", c.tolerance.value},
                  {"kind", c.tolerance.kind == Tolerance::Kind::relative ? "relative" : "absolute"}}},
                {"samples", {{"count", c.samples.count}, {"margin", c.samples.margin}, {"seed", c.samples.seed}}},
                {"options", c.options}};
}

inline Claim claim_from_json(const json& j)
{
    const std::string where = j.contains("id") && j["id"].is_string() ? "claim " + j["id"].get<std::string>() : "claim";
    detail::reject_unknown(j, {"id", "source", "metric", "quantity", "target", "tolerance", "samples", "options"},
                           where);
    Claim c;
    c.id = detail::get<std::string>(j, "id", where);
    if (c.id.empty()) {
        throw ParseError("claim id must be non-empty");
    }
    c.source = detail::get<std::string>(j, "source", where);
    c.metric = metric_spec_from_json(detail::get<json>(j, "metric", where));
    c.quantity = parse_quantity(detail::get<std::string>(j, "quantity", where));

    const json t = detail::get<json>(j, "target", where);
    detail::reject_unknown(t, {"kind", "value"}, where + " target");
    c.target.kind = detail::parse_target_kind(detail::get<std::string>(t, "kind", where + " target"));
    c.target.value = t.value("value", 0.0);

    const json tol = detail::get<json>(j, "tolerance", where);
    detail::reject_unknown(tol, {"value", "kind"}, where + " tolerance");
    c.tolerance.value = detail::get<double>(tol, "value", where + " tolerance");
    const std::string tk = tol.value("kind", std::string("absolute"));
    if (tk == "relative") {
        c.tolerance.kind = Tolerance::Kind::relative;
    } else if (tk == "absolute") {
        c.tolerance.kind = Tolerance::Kind::absolute;
    } else {
        throw ParseError(where + ": tolerance kind must be absolute or relative");
    }
    if (!(c.tolerance.value >= 0.0) || (c.tolerance.value == 0.0 && c.target.kind != Target::Kind::at_least &&
                                        c.target.kind != Target::Kind::at_most &&
                                        c.target.kind != Target::Kind::max_exceeds)) {
        throw ParseError(where + ": tolerance must be positive");
    }

    if (j.contains("samples")) {
        const json& s = j["samples"];
        detail::reject_unknown(s, {"count", "margin", "seed"}, where + " samples");
        c.samples.count = s.value("count", c.samples.count);
        c.samples.margin = s.value("margin", c.samples.margin);
        c.samples.seed = s.value("seed", c.samples.seed);
    }
    if (c.samples.count < 0 || !(c.samples.margin >= 0.0 && c.samples.margin < 1.0)) {
        throw ParseError(where + ": bad sample plan");
    }
    if (j.contains("options")) {
        c.options = j["options"];
        if (!c.options.is_object()) {
            throw ParseError(where + ": options must be an object");
        }
    }
    return c;
}

/// A suite file is {"claims": [...]}; a bare array is accepted too.
inline std::vector<Claim> parse_suite(const json& j)
{
    const json* list = &j;
    if (j.is_object()) {
        detail::reject_unknown(j, {"claims", "description"}, "suite");
        if (!j.contains("claims")) {
            throw ParseError("suite: missing 'claims'");
        }
        list = &j["claims"];
    }
    if (!list->is_array()) {
        throw ParseError("suite: claims must be an array");
    }
    std::vector<Claim> out;
    for (const json& c : *list) {
        out.push_back(claim_from_json(c));
    }
    return out;
}

inline std::vector<Claim> parse_suite(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("suite: ") + e.what());
    }
    return parse_suite(j);
}

// ---------------------------------------------------------------------------
// Per-sample evaluation.

struct Observation {
    double value = 0.0;
    double scale = 1.0; // natural size, used for relative tolerances on zero targets
    TangentSample at;
    Vec u;
};

namespace detail {

inline double opt_double(const json& o, const char* key, double def) { return o.value(key, def); }
inline std::string opt_string(const json& o, const char* key, const std::string& def) { return o.value(key, def); }

inline TangentSample random_sample(const MetricField& m, const SamplePlan& plan, Rng& rng)
{
    TangentSample at;
    at.x = random_point(m.domain(), plan.margin, rng);
    at.y = random_direction(m.dimension(), rng);
    return at;
}

inline Vec unit_speed(const MetricField& m, const Vec& x, Vec y)
{
    const double f = m(x, y);
    for (double& v : y) {
        v /= f;
    }
    return y;
}

inline double max_abs(const Vec& v)
{
    double m = 0.0;
    for (double e : v) {
        m = std::max(m, std::abs(e));
    }
    return m;
}

inline double max_abs(const Matrix& v) { return max_abs(v.a); }

inline double max_abs_diff(const Vec& a, const Vec& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return max_abs_diff(a.a, b.a); }

template <class Model>
const Model& model_as(const MetricField& m, const char* what)
{
    const Model* p = std::get_if<Model>(&m.model());
    if (!p) {
        throw InvalidParameterError(std::string(what) + " needs a different metric kind, got " + m.kind());
    }
    return *p;
}

// f and its derivatives to third order, for h(s, t) and its partials.
struct ProfileJet {
    double f, fs, ft, fss, fst, ftt, fsss, fsst, fstt, fttt;
};

inline ProfileJet profile_jet(const ProductProfile& p, double s, double t)
{
    using J = Jet<double, 2, 3>;
    using Idx = J::Layout::MultiIndex;
    const J f = p(J::variable(s, {1.0, 0.0}), J::variable(t, {0.0, 1.0}));
    return {f.value(),
            f.derivative(Idx{1, 0}),
            f.derivative(Idx{0, 1}),
            f.derivative(Idx{2, 0}),
            f.derivative(Idx{1, 1}),
            f.derivative(Idx{0, 2}),
            f.derivative(Idx{3, 0}),
            f.derivative(Idx{2, 1}),
            f.derivative(Idx{1, 2}),
            f.derivative(Idx{0, 3})};
}

// h = f_s^(n1-1) f_t^(n2-1) (f_s f_t - 2 f f_st) with its s- and t-partials.
inline std::array<double, 3> product_h(const ProductProfile& p, int n1, int n2, double s, double t)
{
    const ProfileJet d = profile_jet(p, s, t);
    const double D = d.fs * d.ft - 2.0 * d.f * d.fst;
    const double Ds = d.fss * d.ft + d.fs * d.fst - 2.0 * d.fs * d.fst - 2.0 * d.f * d.fsst;
    const double Dt = d.fst * d.ft + d.fs * d.ftt - 2.0 * d.ft * d.fst - 2.0 * d.f * d.fstt;
    const double A = std::pow(d.fs, n1 - 1);
    const double B = std::pow(d.ft, n2 - 1);
    const double As = n1 > 1 ? (n1 - 1) * std::pow(d.fs, n1 - 2) * d.fss : 0.0;
    const double At = n1 > 1 ? (n1 - 1) * std::pow(d.fs, n1 - 2) * d.fst : 0.0;
    const double Bs = n2 > 1 ? (n2 - 1) * std::pow(d.ft, n2 - 2) * d.fst : 0.0;
    const double Bt = n2 > 1 ? (n2 - 1) * std::pow(d.ft, n2 - 2) * d.ftt : 0.0;
    return {A * B * D, As * B * D + A * Bs * D + A * B * Ds, At * B * D + A * Bt * D + A * B * Dt};
}

struct ProductSplit {
    int n1;
    int n2;
    Matrix g1;
    Matrix g2;
    double s;
    double t;
    Vec ybar; // lowered factor vectors, stacked
};

inline ProductSplit split_product(const SzaboProductMetric& pm, const TangentSample& at)
{
    ProductSplit out;
    out.n1 = pm.alpha1.dim;
    out.n2 = pm.alpha2.dim;
    const std::span<const double> x(at.x);
    out.g1 = pm.alpha1.matrix_at(x.subspan(0, out.n1));
    out.g2 = pm.alpha2.matrix_at(x.subspan(out.n1));
    const Vec y1(at.y.begin(), at.y.begin() + out.n1);
    const Vec y2(at.y.begin() + out.n1, at.y.end());
    const Vec l1 = matvec(out.g1, y1);
    const Vec l2 = matvec(out.g2, y2);
    out.s = dot(y1, l1);
    out.t = dot(y2, l2);
    out.ybar = l1;
    out.ybar.insert(out.ybar.end(), l2.begin(), l2.end());
    return out;
}

// Richardson-extrapolated central difference of a vector-valued function along a line.
template <class Fn>
Vec richardson(Fn&& f, double h)
{
    auto central = [&](double step) {
        Vec p = f(step);
        const Vec m = f(-step);
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = (p[i] - m[i]) / (2.0 * step);
        }
        return p;
    };
    const Vec d1 = central(h);
    const Vec d2 = central(0.5 * h);
    const Vec d4 = central(0.25 * h);
    Vec out(d1.size());
    for (std::size_t i = 0; i < d1.size(); ++i) {
        const double r1 = (4.0 * d2[i] - d1[i]) / 3.0;
        const double r2 = (4.0 * d4[i] - d2[i]) / 3.0;
        out[i] = (16.0 * r2 - r1) / 15.0;
    }
    return out;
}

inline Vec shifted(const Vec& v, int k, double h)
{
    Vec out = v;
    out[k] += h;
    return out;
}

// ---- pointwise quantities -------------------------------------------------

inline Observation eval_flag(const MetricField& m, const TangentSample& at, Rng& rng)
{
    const PointGeometry pg = point_geometry(m, at);
    for (int attempt = 0; attempt < 100; ++attempt) {
        Vec u = random_direction(m.dimension(), rng);
        try {
            return {flag_curvature(pg.g, pg.riemann, u), 1.0, at, u};
        } catch (const DegenerateFlagError&) {
        }
    }
    throw SamplingError("could not draw a non-degenerate flag");
}

inline Observation eval_universal(const MetricField& m, const TangentSample& at, Rng& rng)
{
    const int n = m.dimension();
    const double F = m(at.x, at.y);
    const PointGeometry pg = point_geometry(m, at);
    double worst = 0.0;
    auto note = [&](double v) { worst = std::max(worst, std::isfinite(v) ? v : std::numeric_limits<double>::infinity()); };

    // Euler homogeneity of F (degree 1) and G (degree 2)
    const double lam = 2.75;
    Vec ly = at.y;
    for (double& v : ly) {
        v *= lam;
    }
    note(std::abs(m(at.x, ly) - lam * F) / (lam * F));
    const Vec Gl = spray_coefficients(m, at.x, ly);
    const double gscale = max_abs(pg.spray.G) + max_abs(pg.spray.N) * norm2(at.y) + F * F;
    for (int i = 0; i < n; ++i) {
        note(std::abs(Gl[i] - lam * lam * pg.spray.G[i]) / (lam * lam * gscale));
    }
    // g symmetric positive definite, g(y, y) = F^2
    note(max_abs_diff(pg.g.g, [&] {
             Matrix t(n);
             for (int i = 0; i < n; ++i) {
                 for (int j = 0; j < n; ++j) {
                     t(i, j) = pg.g.g(j, i);
                 }
             }
             return t;
         }()) /
         max_abs(pg.g.g));
    note(is_positive_definite(pg.g.g) ? 0.0 : std::numeric_limits<double>::infinity());
    note(std::abs(pg.g.inner(at.y, at.y) - F * F) / (F * F));
    // N y = 2 G
    const Vec Ny = matvec(pg.spray.N, at.y);
    for (int i = 0; i < n; ++i) {
        note(std::abs(Ny[i] - 2.0 * pg.spray.G[i]) / gscale);
    }
    // R y = 0 and g-symmetry of R
    const double rscale = max_abs(pg.riemann.R) + max_abs(pg.spray.N) * max_abs(pg.spray.N) + F * F;
    note(max_abs(pg.riemann.apply(at.y)) / (rscale * norm2(at.y)));
    const double lscale = max_abs(pg.riemann.R_lowered) + rscale * max_abs(pg.g.g);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            note(std::abs(pg.riemann.R_lowered(i, j) - pg.riemann.R_lowered(j, i)) / lscale);
        }
    }
    // I . y = 0 and J . y = 0
    const TorsionVector I = raise(pg.g, mean_cartan_covariant(m, at.x, at.y));
    const TorsionVector J = mean_landsberg(m, at, pg.spray, pg.g);
    note(std::abs(dot(I.covariant, at.y)) / (1.0 + F * g_norm(pg.g, I.contravariant)));
    note(std::abs(dot(J.covariant, at.y)) / (F * (1.0 + g_norm(pg.g, J.contravariant))));
    // flag curvature invariant under u -> mu u + lambda y
    for (int attempt = 0; attempt < 100; ++attempt) {
        const Vec u = random_direction(n, rng);
        try {
            const double k1 = flag_curvature(pg.g, pg.riemann, u);
            Vec u2 = u;
            for (int i = 0; i < n; ++i) {
                u2[i] = -1.7 * u[i] + 0.6 * at.y[i];
            }
            const double k2 = flag_curvature(pg.g, pg.riemann, u2);
            note(std::abs(k1 - k2) / (1.0 + std::abs(k1)));
            break;
        } catch (const DegenerateFlagError&) {
        }
    }
    return {worst, 1.0, at, {}};
}

// Jet derivatives against Richardson differences of lower-order jet outputs:
// g from dF^2/dy, N from G, I from ln det g, J from I, R from G and N.
inline Observation eval_jet_fd(const MetricField& m, const TangentSample& at)
{
    const int n = m.dimension();
    const double F = m(at.x, at.y);
    const PointGeometry pg = point_geometry(m, at);
    const double hy = 1e-3 * norm2(at.y);
    double hx = 1e-3;
    // keep the x stencil inside the chart
    for (int k = 0; k < n; ++k) {
        while (!m.domain().contains(shifted(at.x, k, hx)) || !m.domain().contains(shifted(at.x, k, -hx))) {
            hx *= 0.5;
        }
    }
    double worst = 0.0;
    auto compare = [&](const Vec& a, const Vec& b, double floor) {
        const double e = max_abs_diff(a, b) / (max_abs(b) + floor);
        worst = std::max(worst, std::isfinite(e) ? e : std::numeric_limits<double>::infinity());
    };
    auto grad_sq = [&](const Vec& y) {
        Vec out(n);
        m.visit([&](const auto& mod) {
            using S = Jet<double, 1, 1>;
            std::vector<S> X(at.x.begin(), at.x.end());
            std::vector<S> Y(y.begin(), y.end());
            for (int j = 0; j < n; ++j) {
                Y[j].coeff(1) = 1.0;
                out[j] = metric_squared<std::decay_t<decltype(mod)>, S>(mod, X, Y).coeff(1);
                Y[j].coeff(1) = 0.0;
            }
        });
        return out;
    };
    auto log_det = [&](const Vec& y) {
        return Vec{std::log(determinant(fundamental_tensor(m, TangentSample{at.x, y}).g))};
    };
    for (int j = 0; j < n; ++j) {
        // column j of g
        Vec gj = richardson([&](double h) { return grad_sq(shifted(at.y, j, h)); }, hy);
        Vec col(n);
        for (int i = 0; i < n; ++i) {
            gj[i] *= 0.5;
            col[i] = pg.g.g(i, j);
        }
        compare(col, gj, 1.0);
        // column j of N
        const Vec Nj = richardson([&](double h) { return spray_coefficients(m, at.x, shifted(at.y, j, h)); }, hy);
        for (int i = 0; i < n; ++i) {
            col[i] = pg.spray.N(i, j);
        }
        compare(col, Nj, F);
    }
    // I_i = (1/2) d ln det g / dy^i
    const Vec Ijet = mean_cartan_covariant(m, at.x, at.y);
    Vec Ifd(n);
    for (int i = 0; i < n; ++i) {
        Ifd[i] = 0.5 * richardson([&](double h) { return log_det(shifted(at.y, i, h)); }, hy)[0];
    }
    compare(Ijet, Ifd, 1.0 / F);
    // J from differences of I, R from differences of G and N
    Vec Jfd(n, 0.0);
    Matrix Rfd(n);
    for (int k = 0; k < n; ++k) {
        const Vec dIx = richardson([&](double h) { return mean_cartan_covariant(m, shifted(at.x, k, h), at.y); }, hx);
        const Vec dIy = richardson([&](double h) { return mean_cartan_covariant(m, at.x, shifted(at.y, k, h)); }, hy);
        for (int i = 0; i < n; ++i) {
            Jfd[i] += at.y[k] * dIx[i] - 2.0 * pg.spray.G[k] * dIy[i] - Ijet[k] * pg.spray.N(k, i);
        }
    }
    compare(mean_landsberg(m, at, pg.spray, pg.g).covariant, Jfd, 1.0);
    // R^i_k = 2 dG^i/dx^k - y^j d(N^i_k)/dx^j + 2 G^j d(N^i_k)/dy^j - N^i_j N^j_k
    auto N_at = [&](const Vec& x, const Vec& y) { return spray(m, TangentSample{x, y}).N.a; };
    Vec yN(n * n, 0.0);
    Vec GN(n * n, 0.0);
    for (int j = 0; j < n; ++j) {
        const Vec dx = richardson([&](double h) { return N_at(shifted(at.x, j, h), at.y); }, hx);
        const Vec dy = richardson([&](double h) { return N_at(at.x, shifted(at.y, j, h)); }, hy);
        for (int a = 0; a < n * n; ++a) {
            yN[a] += at.y[j] * dx[a];
            GN[a] += pg.spray.G[j] * dy[a];
        }
    }
    for (int k = 0; k < n; ++k) {
        const Vec dGx = richardson([&](double h) { return spray_coefficients(m, shifted(at.x, k, h), at.y); }, hx);
        for (int i = 0; i < n; ++i) {
            double nn = 0.0;
            for (int j = 0; j < n; ++j) {
                nn += pg.spray.N(i, j) * pg.spray.N(j, k);
            }
            Rfd(i, k) = 2.0 * dGx[i] - yN[i * n + k] + 2.0 * GN[i * n + k] - nn;
        }
    }
    compare(pg.riemann.R.a, Rfd.a, F * F);
    return {worst, 1.0, at, {}};
}

inline Observation eval_det_identity(const MetricField& m, const TangentSample& at, const std::string& mode)
{
    const auto& pm = model_as<SzaboProductMetric>(m, "det_identity");
    const ProductSplit sp = split_product(pm, at);
    const int n = sp.n1 + sp.n2;
    const FundamentalTensor g = fundamental_tensor(m, at);
    if (mode == "det") {
        const auto h = product_h(pm.profile, sp.n1, sp.n2, sp.s, sp.t);
        const double expected = h[0] * determinant(sp.g1) * determinant(sp.g2);
        const double got = determinant(g.g);
        return {std::abs(got - expected) / std::abs(expected), 1.0, at, {}};
    }
    if (mode == "blocks") {
        const ProfileJet d = profile_jet(pm.profile, sp.s, sp.t);
        Matrix expected(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const bool a = i < sp.n1;
                const bool b = j < sp.n1;
                double v = 0.0;
                if (a && b) {
                    v = 2.0 * d.fss * sp.ybar[i] * sp.ybar[j] + d.fs * sp.g1(i, j);
                } else if (!a && !b) {
                    v = 2.0 * d.ftt * sp.ybar[i] * sp.ybar[j] + d.ft * sp.g2(i - sp.n1, j - sp.n1);
                } else {
                    v = 2.0 * d.fst * sp.ybar[i] * sp.ybar[j];
                }
                expected(i, j) = v;
            }
        }
        return {max_abs_diff(g.g, expected) / max_abs(expected), 1.0, at, {}};
    }
    if (mode == "torsion") {
        const auto h = product_h(pm.profile, sp.n1, sp.n2, sp.s, sp.t);
        Vec expected(n);
        for (int i = 0; i < n; ++i) {
            expected[i] = (i < sp.n1 ? h[1] : h[2]) / h[0] * sp.ybar[i];
        }
        const Vec I = mean_cartan_covariant(m, at.x, at.y);
        const double F = m(at.x, at.y);
        return {max_abs_diff(I, expected) / (max_abs(expected) + 1.0 / F), 1.0, at, {}};
    }
    throw InvalidParameterError("det_identity mode must be det, blocks or torsion");
}

inline Observation eval_spray_split(const MetricField& m, const TangentSample& at)
{
    const auto& pm = model_as<SzaboProductMetric>(m, "spray_split");
    const int n1 = pm.alpha1.dim;
    const Vec G = spray_coefficients(m, at.x, at.y);
    const MetricField f1 = make_riemannian(pm.alpha1);
    const MetricField f2 = make_riemannian(pm.alpha2);
    const Vec x1(at.x.begin(), at.x.begin() + n1);
    const Vec x2(at.x.begin() + n1, at.x.end());
    const Vec y1(at.y.begin(), at.y.begin() + n1);
    const Vec y2(at.y.begin() + n1, at.y.end());
    Vec expected = spray_coefficients(f1, x1, y1);
    const Vec G2 = spray_coefficients(f2, x2, y2);
    expected.insert(expected.end(), G2.begin(), G2.end());
    const double F = m(at.x, at.y);
    return {max_abs_diff(G, expected) / (max_abs(expected) + F * F), 1.0, at, {}};
}

inline Observation eval_funk_pde(const MetricField& m, const TangentSample& at, const std::string& mode)
{
    const auto& fm = model_as<FunkImplicitMetric>(m, "funk_pde");
    const int n = m.dimension();
    if (mode == "closed_form") {
        const double theta = fm.theta<double>(at.x, at.y);
        const double closed = FunkShiftedMetric{}.funk<double>(at.x, at.y);
        return {std::abs(theta - closed), 1.0, at, {}};
    }
    if (mode != "pde") {
        throw InvalidParameterError("funk_pde mode must be pde or closed_form");
    }
    // Theta_{x^k} - Theta Theta_{y^k}
    using S = Jet<double, 2, 1>;
    double worst = 0.0;
    double theta = 0.0;
    for (int k = 0; k < n; ++k) {
        std::vector<S> X(at.x.begin(), at.x.end());
        std::vector<S> Y(at.y.begin(), at.y.end());
        X[k].coeff(1) = 1.0;
        Y[k].coeff(2) = 1.0;
        const S th = fm.theta<S>(std::span<const S>(X), std::span<const S>(Y));
        theta = th.value();
        worst = std::max(worst, std::abs(th.coeff(1) - th.value() * th.coeff(2)));
    }
    return {worst, theta * theta, at, {}};
}

inline Observation eval_cartan_bound(const MetricField& m, const TangentSample& at)
{
    const auto& rm = model_as<RandersMetric>(m, "cartan_bound");
    const int n = m.dimension();
    const double b = rm.beta_norm(at.x);
    const double bound = (n + 1) / std::sqrt(2.0) * std::sqrt(1.0 - std::sqrt(1.0 - b * b));
    // I has degree -1; measure it on the indicatrix
    const Vec y = unit_speed(m, at.x, at.y);
    const TangentSample s{at.x, y};
    const double norm = cartan_magnitude(m, s);
    return {norm / bound, 1.0, s, {}};
}

inline Observation eval_orthogonality(const MetricField& m, const TangentSample& at)
{
    const FundamentalTensor g = fundamental_tensor(m, at);
    const SprayData sp = spray(m, at);
    const TorsionVector I = raise(g, mean_cartan_covariant(m, at.x, at.y));
    const TorsionVector J = mean_landsberg(m, at, sp, g);
    const double F = m(at.x, at.y);
    const double v = std::max(std::abs(g.inner(I.contravariant, at.y)), std::abs(g.inner(J.contravariant, at.y)));
    return {v, F * (g_norm(g, I.contravariant) + g_norm(g, J.contravariant)) + 1e-300, at, {}};
}

// ||R(I)||_g (mode norm) or g(R(I), I) (mode inner), scaled by the sizes of R and I
inline Observation eval_curvature_on_torsion(const MetricField& m, const TangentSample& at, const std::string& mode)
{
    const PointGeometry pg = point_geometry(m, at);
    const Vec I = raise(pg.g, mean_cartan_covariant(m, at.x, at.y)).contravariant;
    const Vec RI = pg.riemann.apply(I);
    const double F = m(at.x, at.y);
    const double r = max_abs(pg.riemann.R) + F * F;
    const double in = g_norm(pg.g, I);
    if (mode == "norm") {
        return {g_norm(pg.g, RI), r * in + 1e-300, at, {}};
    }
    if (mode == "inner") {
        return {pg.g.inner(RI, I), r * in * in + 1e-300, at, {}};
    }
    throw InvalidParameterError("curvature_on_torsion mode must be norm or inner");
}

// ---- geodesic quantities --------------------------------------------------

struct GeodesicSetup {
    double t1;
    double tol;
    int nodes;
};

inline GeodesicSetup geodesic_setup(const json& o, double t1, double tol)
{
    return {opt_double(o, "t_span", t1), opt_double(o, "tol", tol), static_cast<int>(o.value("nodes", 257))};
}

inline double jacobi_error(const MetricField& m, const TorsionTrace& tt)
{
    const JacobiField jf = jacobi_propagate(m, tt.trace, tt.I_of_t.front(), tt.J_of_t.front());
    if (jf.exited || jf.V.size() != tt.I_of_t.size()) {
        throw ResolutionError("Jacobi propagation did not reach the end of the trace");
    }
    double err = 0.0;
    for (std::size_t k = 0; k < jf.V.size(); ++k) {
        Vec d = jf.V[k];
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] -= tt.I_of_t[k][i];
        }
        err = std::max(err, g_norm(fundamental_tensor(m, tt.trace.sample(k)), d));
    }
    return err / (tt.max_I + 1e-300);
}

inline Observation eval_sskk1(const MetricField& m, const TangentSample& at, const json& o, json& extra)
{
    const std::string mode = opt_string(o, "mode", "residual");
    const Vec y = unit_speed(m, at.x, at.y);
    if (mode == "halving") {
        const GeodesicSetup gs = geodesic_setup(o, 3.0, 1e-4);
        const double resolution = opt_double(o, "resolution", 1e-2);
        const GeodesicTrace a = integrate_geodesic(m, at.x, y, {0.0, gs.t1}, gs.tol, gs.nodes);
        const GeodesicTrace b = integrate_geodesic(m, at.x, y, {0.0, gs.t1}, 0.5 * gs.tol, gs.nodes);
        const double ra = max_interior_residual(torsion_trace(m, a, resolution));
        const double rb = max_interior_residual(torsion_trace(m, b, resolution));
        extra["ratios"].push_back(ra / rb);
        return {ra / rb, 1.0, {at.x, y}, {}};
    }
    const GeodesicSetup gs = geodesic_setup(o, 1.0, 1e-10);
    const GeodesicTrace tr = integrate_geodesic(m, at.x, y, {0.0, gs.t1}, gs.tol, gs.nodes);
    const TorsionTrace tt = torsion_trace(m, tr, opt_double(o, "resolution", 1e-6));
    if (mode == "residual") {
        return {max_interior_residual(tt) / (tt.max_I + 1e-300), 1.0, {at.x, y}, {}};
    }
    if (mode == "di_agreement") {
        return {tt.di_agreement, 1.0, {at.x, y}, {}};
    }
    if (mode == "jacobi") {
        return {jacobi_error(m, tt), 1.0, {at.x, y}, {}};
    }
    throw InvalidParameterError("sskk1_residual mode must be residual, di_agreement, jacobi or halving");
}

inline Observation eval_phi(const MetricField& m, const TangentSample& at, const json& o)
{
    const std::string mode = opt_string(o, "mode", "convex");
    const GeodesicSetup gs = geodesic_setup(o, 1.0, 1e-10);
    const Vec y = unit_speed(m, at.x, at.y);
    GeodesicTrace tr = integrate_geodesic(m, at.x, y, {0.0, gs.t1}, gs.tol, gs.nodes);
    if (!tr.complete() && tr.exited && tr.exit_time > 0.0) {
        // convexity is a statement on the interval where the geodesic exists
        tr = integrate_geodesic(m, at.x, y, {0.0, 0.9 * tr.exit_time}, gs.tol, gs.nodes);
    }
    if (!tr.complete()) {
        throw ResolutionError("geodesic left the chart before the end of the span");
    }
    const TorsionTrace tt = torsion_trace(m, tr, opt_double(o, "resolution", 1e-6));
    if (mode == "constant") {
        const auto [lo, hi] = std::minmax_element(tt.phi_of_t.begin(), tt.phi_of_t.end());
        return {(*hi - *lo) / (*hi + 1e-300), 1.0, {at.x, y}, {}};
    }
    if (mode != "convex") {
        throw InvalidParameterError("phi_convexity mode must be convex or constant");
    }
    const std::vector<double> d2 = phi_second_difference(tt);
    // phi > 0 is decided relative to its rounding level
    const double floor = 1e-10 * (tt.max_I + 1e-300);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < d2.size(); ++k) {
        if (tt.phi_of_t[k - 1] > floor && tt.phi_of_t[k] > floor && tt.phi_of_t[k + 1] > floor) {
            worst = std::min(worst, d2[k]);
        }
    }
    if (!std::isfinite(worst)) {
        worst = 0.0; // phi vanishes along the whole geodesic
    }
    return {worst, 1.0, {at.x, y}, {}};
}

// ---- closed one-form --------------------------------------------------------

struct LinearFit {
    Vec coeff;
    double residual = 0.0;
    double max_abs = 0.0;
};

inline LinearFit fit_gamma(const MetricField& m, const Vec& x, const std::vector<Vec>& dirs, double c,
                           const QuadratureOptions& qo)
{
    const int n = m.dimension();
    Matrix AtA(n);
    Vec Atb(n, 0.0);
    std::vector<double> gam;
    for (const Vec& y : dirs) {
        const TangentSample at{x, y};
        const double g = s_curvature(m, at, qo) - (n + 1) * c * m(x, y);
        gam.push_back(g);
        for (int i = 0; i < n; ++i) {
            Atb[i] += y[i] * g;
            for (int j = 0; j < n; ++j) {
                AtA(i, j) += y[i] * y[j];
            }
        }
    }
    const auto ev = symmetric_eigenvalues(AtA);
    if (!(*std::min_element(ev.begin(), ev.end()) > 1e-8 * *std::max_element(ev.begin(), ev.end()))) {
        throw SamplingError("closed one-form fit is rank deficient");
    }
    LinearFit out;
    out.coeff = Atb;
    solve(AtA, out.coeff);
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        out.residual = std::max(out.residual, std::abs(gam[k] - dot(out.coeff, dirs[k])));
        out.max_abs = std::max(out.max_abs, std::abs(gam[k]));
    }
    return out;
}

struct ClosedFormCheck {
    double linearity = 0.0; // fit residual / max |gamma|
    double closedness = 0.0;
    double max_gamma = 0.0;
    Vec coeff;
};

inline ClosedFormCheck closed_form_at(const MetricField& m, const Vec& x, double c, Rng& rng, double h,
                                      double floor)
{
    const int n = m.dimension();
    std::vector<Vec> dirs;
    for (int k = 0; k < 4 * n; ++k) {
        dirs.push_back(random_direction(n, rng));
    }
    const QuadratureOptions qo;
    const LinearFit base = fit_gamma(m, x, dirs, c, qo);
    ClosedFormCheck out;
    out.coeff = base.coeff;
    out.max_gamma = base.max_abs;
    // exact zero gamma is linear; floor keeps rounding noise from counting as curvature of the fit
    out.linearity = base.residual / std::max(base.max_abs, floor);
    Matrix d(n); // d(k, m) = d c_k / d x^m
    for (int mm = 0; mm < n; ++mm) {
        double step = h;
        while (!m.domain().contains(shifted(x, mm, step)) || !m.domain().contains(shifted(x, mm, -step))) {
            step *= 0.5;
        }
        const LinearFit p = fit_gamma(m, shifted(x, mm, step), dirs, c, qo);
        const LinearFit q = fit_gamma(m, shifted(x, mm, -step), dirs, c, qo);
        for (int k = 0; k < n; ++k) {
            d(k, mm) = (p.coeff[k] - q.coeff[k]) / (2.0 * step);
        }
    }
    for (int k = 0; k < n; ++k) {
        for (int mm = k + 1; mm < n; ++mm) {
            out.closedness = std::max(out.closedness, std::abs(d(k, mm) - d(mm, k)));
        }
    }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Running claims.

namespace detail {

inline bool is_geodesic_quantity(Quantity q)
{
    return q == Quantity::sskk1_residual || q == Quantity::phi_convexity;
}

inline Observation evaluate(const MetricField& m, const Claim& c, const TangentSample& at, Rng& rng, json& extra)
{
    const json& o = c.options;
    switch (c.quantity) {
    case Quantity::flag_curvature:
        return eval_flag(m, at, rng);
    case Quantity::s_curvature: {
        const double F = m(at.x, at.y);
        return {s_curvature(m, at), F, at, {}};
    }
    case Quantity::s_ratio: {
        const double F = m(at.x, at.y);
        return {s_curvature(m, at) / ((m.dimension() + 1) * F), 1.0, at, {}};
    }
    case Quantity::mean_cartan: {
        const FundamentalTensor g = fundamental_tensor(m, at);
        return {g_norm(g, raise(g, mean_cartan_covariant(m, at.x, at.y)).contravariant), 1.0, at, {}};
    }
    case Quantity::mean_landsberg: {
        const FundamentalTensor g = fundamental_tensor(m, at);
        return {g_norm(g, mean_landsberg(m, at, spray(m, at), g).contravariant), 1.0, at, {}};
    }
    case Quantity::cartan_orthogonality:
        return eval_orthogonality(m, at);
    case Quantity::sskk1_residual:
        return eval_sskk1(m, at, o, extra);
    case Quantity::det_identity:
        return eval_det_identity(m, at, opt_string(o, "mode", "det"));
    case Quantity::spray_split:
        return eval_spray_split(m, at);
    case Quantity::funk_pde:
        return eval_funk_pde(m, at, opt_string(o, "mode", "pde"));
    case Quantity::berwald_quadratic: {
        const SprayData sp = spray(m, at);
        const double F = m(at.x, at.y);
        const double scale = (max_abs(sp.N) + max_abs(sp.G) / F) / F + 1.0;
        return {max_abs(spray_third_derivatives(m, at)), scale, at, {}};
    }
    case Quantity::phi_convexity:
        return eval_phi(m, at, o);
    case Quantity::closed_one_form: {
        const ClosedFormCheck r = closed_form_at(m, at.x, opt_double(o, "c", 0.5), rng, opt_double(o, "step", 1e-3),
                                                 opt_double(o, "gamma_floor", 1e-6));
        extra["max_linearity"] = std::max(extra.value("max_linearity", 0.0), r.linearity);
        extra["max_closedness"] = std::max(extra.value("max_closedness", 0.0), r.closedness);
        extra["max_gamma"] = std::max(extra.value("max_gamma", 0.0), r.max_gamma);
        return {std::max(r.linearity, r.closedness), 1.0, at, {}};
    }
    case Quantity::cartan_bound:
        return eval_cartan_bound(m, at);
    case Quantity::curvature_on_torsion:
        return eval_curvature_on_torsion(m, at, opt_string(o, "mode", "norm"));
    case Quantity::universal:
        return eval_universal(m, at, rng);
    case Quantity::jet_fd:
        return eval_jet_fd(m, at);
    }
    throw InvalidParameterError("unhandled quantity");
}

// deviation / allowed for one observation; <= 1 passes
inline double excess(const Claim& c, const Observation& ob)
{
    const double tol = c.tolerance.value;
    const bool rel = c.tolerance.kind == Tolerance::Kind::relative;
    const double tv = c.target.value;
    auto ratio = [](double dev, double allowed) {
        if (dev <= 0.0) {
            return 0.0;
        }
        // a zero allowance is a strict bound: any violation lands above 1 and stays ordered
        return allowed > 0.0 ? dev / allowed : 1.0 + dev;
    };
    if (!std::isfinite(ob.value)) {
        return std::numeric_limits<double>::infinity();
    }
    switch (c.target.kind) {
    case Target::Kind::value:
        return ratio(std::abs(ob.value - tv), rel ? tol * (tv != 0.0 ? std::abs(tv) : ob.scale) : tol);
    case Target::Kind::zero:
        return ratio(std::abs(ob.value), rel ? tol * ob.scale : tol);
    case Target::Kind::at_most:
        return ratio(ob.value - tv, rel ? tol * std::max(std::abs(tv), ob.scale) : tol);
    case Target::Kind::at_least:
        return ratio(tv - ob.value, rel ? tol * std::max(std::abs(tv), ob.scale) : tol);
    case Target::Kind::max_exceeds:
        return 0.0;
    }
    return 0.0;
}

} // namespace detail

inline ClaimReport run_claim(const Claim& c)
{
    const auto start = std::chrono::steady_clock::now();
    ClaimReport rep;
    rep.id = c.id;
    rep.source = c.source;
    rep.quantity = to_string(c.quantity);
    rep.tolerance = c.tolerance;
    rep.target = c.target;
    rep.seed = c.samples.seed;
    auto finish = [&] {
        rep.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return rep;
    };
    std::vector<double> values;
    try {
        const MetricField m = make_metric(c.metric);
        Rng rng(c.samples.seed);
        double worst_excess = -1.0;
        double best_value = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < c.samples.count; ++k) {
            const TangentSample at = detail::random_sample(m, c.samples, rng);
            const Observation ob = detail::evaluate(m, c, at, rng, rep.extra);
            values.push_back(ob.value);
            if (c.target.kind == Target::Kind::max_exceeds) {
                if (ob.value > best_value) {
                    best_value = ob.value;
                    rep.worst = {ob.at, ob.u, ob.value, 0.0};
                }
                continue;
            }
            const double e = detail::excess(c, ob);
            if (e > worst_excess) {
                worst_excess = e;
                rep.worst = {ob.at, ob.u, ob.value, e};
            }
        }
        rep.evaluated = static_cast<int>(values.size());
        if (c.target.kind == Target::Kind::max_exceeds) {
            rep.pass = !values.empty() && best_value > c.target.value;
            rep.worst.excess = best_value > c.target.value ? 0.0 : std::numeric_limits<double>::infinity();
            if (!rep.pass) {
                rep.diagnostic = "no sample exceeded the witness threshold";
            }
        } else {
            rep.pass = worst_excess <= 1.0;
            if (!rep.pass) {
                std::ostringstream os;
                os << std::setprecision(6);
                if (c.tolerance.value > 0.0) {
                    os << "worst sample deviates by " << worst_excess << " times the allowed tolerance";
                } else {
                    os << "worst sample value " << rep.worst.value << " violates the strict bound "
                       << c.target.value;
                }
                rep.diagnostic = os.str();
            }
        }
    } catch (const std::exception& e) {
        rep.pass = false;
        rep.evaluated = static_cast<int>(values.size());
        rep.diagnostic = std::string("error: ") + e.what();
    }
    if (!values.empty()) {
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        double sum = 0.0;
        for (double v : values) {
            sum += v;
        }
        const double mean = sum / values.size();
        double var = 0.0;
        for (double v : values) {
            var += (v - mean) * (v - mean);
        }
        rep.stats = {*lo, *hi, mean, values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0};
    }
    return finish();
}

/// gamma = S - (n+1) c F is linear in y and closed in x, on plan.count base points.
inline ClaimReport closed_one_form_check(const MetricSpec& metric, double c, const SamplePlan& plan, double tol = 1e-3)
{
    Claim cl;
    cl.id = "closed_one_form";
    cl.metric = metric;
    cl.quantity = Quantity::closed_one_form;
    cl.target = {Target::Kind::zero, 0.0};
    cl.tolerance = {tol, Tolerance::Kind::absolute};
    cl.samples = plan;
    cl.options = {{"c", c}};
    return run_claim(cl);
}

struct SuiteReport {
    std::vector<ClaimReport> claims; // sorted by id
    bool pass = true;
    double runtime = 0.0;
};

inline SuiteReport run_suite(const std::vector<Claim>& claims, int jobs = 1)
{
    const auto start = std::chrono::steady_clock::now();
    SuiteReport out;
    out.claims.resize(claims.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < claims.size(); i = next++) {
            out.claims[i] = run_claim(claims[i]);
        }
    };
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(claims.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    std::stable_sort(out.claims.begin(), out.claims.end(),
                     [](const ClaimReport& a, const ClaimReport& b) { return a.id < b.id; });
    for (const auto& r : out.claims) {
        out.pass = out.pass && r.pass;
    }
    out.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// ---------------------------------------------------------------------------
// Report output.

namespace detail {

// non-finite doubles become null in JSON
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace detail

inline json to_json(const ClaimReport& r, bool include_runtime = true)
{
    json j{{"id", r.id},
           {"source", r.source},
           {"quantity", r.quantity},
           {"pass", r.pass},
           {"evaluated", r.evaluated},
           {"seed", r.seed},
           {"target", {{"kind", detail::to_string(r.target.kind)}, {"value", r.target.value}}},
           {"tolerance",
            {{"value", r.tolerance.value},
             {"kind", r.tolerance.kind == Tolerance::Kind::relative ? "relative" : "absolute"}}},
           {"stats",
            {{"min", detail::num(r.stats.min)},
             {"max", detail::num(r.stats.max)},
             {"mean", detail::num(r.stats.mean)},
             {"stddev", detail::num(r.stats.stddev)}}},
           {"worst_sample",
            {{"x", r.worst.at.x},
             {"y", r.worst.at.y},
             {"u", r.worst.u},
             {"value", detail::num(r.worst.value)},
             {"excess", detail::num(r.worst.excess)}}},
           {"diagnostic", r.diagnostic}};
    if (!r.extra.empty()) {
        j["extra"] = r.extra;
    }
    if (include_runtime) {
        j["runtime_seconds"] = r.runtime;
    }
    return j;
}

inline json to_json(const SuiteReport& s, bool include_runtime = true)
{
    json claims = json::array();
    int failed = 0;
    for (const auto& r : s.claims) {
        claims.push_back(to_json(r, include_runtime));
        failed += r.pass ? 0 : 1;
    }
    json j{{"pass", s.pass}, {"total", s.claims.size()}, {"failed", failed}, {"claims", claims}};
    if (include_runtime) {
        j["runtime_seconds"] = s.runtime;
    }
    return j;
}

inline void write_csv(std::ostream& os, const SuiteReport& s)
{
    os << "id,quantity,pass,evaluated,min,max,mean,stddev,worst_value,worst_excess,tolerance,tolerance_kind,seed,"
          "runtime_seconds,diagnostic\n";
    auto quote = [](const std::string& v) {
        std::string q = "\"";
        for (char ch : v) {
            q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        }
        return q + "\"";
    };
    os << std::setprecision(12);
    for (const auto& r : s.claims) {
        os << r.id << ',' << r.quantity << ',' << (r.pass ? "true" : "false") << ',' << r.evaluated << ','
           << r.stats.min << ',' << r.stats.max << ',' << r.stats.mean << ',' << r.stats.stddev << ','
           << r.worst.value << ',' << r.worst.excess << ',' << r.tolerance.value << ','
           << (r.tolerance.kind == Tolerance::Kind::relative ? "relative" : "absolute") << ',' << r.seed << ','
           << r.runtime << ',' << quote(r.diagnostic) << '\n';
    }
}

} // namespace finsler
