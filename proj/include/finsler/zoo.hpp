#pragma once

// Concrete metrics and their JSON specs.
//
//   {"kind": "funk_ball_shifted", "dimension": 3, "params": {"a": [0.3, 0, 0]}}
//
// Field names per kind are listed in README.md. Unknown keys are rejected.

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"
#include "finsler/metric.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

using json = nlohmann::json;

struct MetricSpec {
    std::string kind;
    int dimension = 0;
    json params = json::object();

    bool operator==(const MetricSpec&) const = default;
};

inline const std::vector<std::string>& metric_kinds()
{
    static const std::vector<std::string> kinds = {"euclidean",         "minkowski",     "riemannian",
                                                   "randers",           "funk_ball_shifted", "funk_implicit",
                                                   "szabo_product",     "szabo_epsilon", "incomplete_slab"};
    return kinds;
}

inline json to_json(const MetricSpec& spec)
{
    return json{{"kind", spec.kind}, {"dimension", spec.dimension}, {"params", spec.params}};
}

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object()) {
        throw ParseError(where + ": expected an object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) {
            ok = ok || it.key() == a;
        }
        if (!ok) {
            throw ParseError(where + ": unknown key '" + it.key() + "'");
        }
    }
}

inline Vec read_vector(const json& j, const std::string& what, int n)
{
    if (!j.is_array()) {
        throw ParseError(what + ": expected an array");
    }
    Vec v;
    for (const auto& e : j) {
        if (!e.is_number()) {
            throw ParseError(what + ": expected numbers");
        }
        v.push_back(e.get<double>());
    }
    if (n >= 0 && static_cast<int>(v.size()) != n) {
        throw InvalidParameterError(what + ": expected " + std::to_string(n) + " entries, got " +
                                    std::to_string(v.size()));
    }
    return v;
}

inline Matrix read_matrix(const json& j, const std::string& what, int n)
{
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw InvalidParameterError(what + ": expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    }
    Matrix m(n);
    for (int i = 0; i < n; ++i) {
        const Vec row = read_vector(j[i], what, n);
        for (int k = 0; k < n; ++k) {
            m(i, k) = row[k];
        }
    }
    return m;
}

inline RiemannianModel::Kind parse_model_kind(const std::string& s)
{
    if (s == "flat") {
        return RiemannianModel::Kind::flat;
    }
    if (s == "sphere") {
        return RiemannianModel::Kind::sphere;
    }
    if (s == "hyperbolic_disk") {
        return RiemannianModel::Kind::hyperbolic_disk;
    }
    if (s == "custom") {
        return RiemannianModel::Kind::custom;
    }
    throw InvalidParameterError("unknown riemannian model '" + s + "'");
}

// {"model": "...", "matrix": [[...]]}
inline RiemannianModel read_model(const json& j, int n, const std::string& where)
{
    reject_unknown(j, {"model", "matrix", "dimension"}, where);
    RiemannianModel m;
    m.dim = n;
    m.kind = parse_model_kind(j.value("model", std::string("flat")));
    if (m.kind == RiemannianModel::Kind::custom) {
        if (!j.contains("matrix")) {
            throw InvalidParameterError(where + ": custom model needs 'matrix'");
        }
        m.matrix = read_matrix(j["matrix"], where + ".matrix", n);
    } else if (j.contains("matrix")) {
        throw InvalidParameterError(where + ": 'matrix' is only valid for the custom model");
    }
    m.validate();
    return m;
}

inline MinkowskiNorm read_norm(const json& j, int n, const std::string& where)
{
    reject_unknown(j, {"A", "b"}, where);
    MinkowskiNorm norm = MinkowskiNorm::euclidean(n);
    if (j.contains("A")) {
        norm.A = read_matrix(j["A"], where + ".A", n);
    }
    if (j.contains("b")) {
        norm.b = read_vector(j["b"], where + ".b", n);
    }
    norm.validate(n);
    return norm;
}

inline ProductProfile read_profile(const json& j)
{
    reject_unknown(j, {"kind", "epsilon", "p"}, "params.profile");
    ProductProfile p;
    const std::string kind = j.value("kind", std::string("sum"));
    if (kind == "sum") {
        p.kind = ProductProfile::Kind::sum;
    } else if (kind == "szabo") {
        p.kind = ProductProfile::Kind::szabo;
        p.epsilon = j.value("epsilon", 0.0);
    } else if (kind == "power_mean") {
        p.kind = ProductProfile::Kind::power_mean;
        p.p = j.value("p", 2.0);
    } else {
        throw InvalidParameterError("unknown product profile '" + kind + "'");
    }
    return p;
}

inline int require_dimension(const MetricSpec& spec, int min_dim)
{
    if (spec.dimension < min_dim) {
        throw InvalidParameterError(spec.kind + ": dimension must be >= " + std::to_string(min_dim));
    }
    return spec.dimension;
}

} // namespace detail

inline MetricSpec metric_spec_from_json(const json& j)
{
    detail::reject_unknown(j, {"kind", "dimension", "params"}, "metric spec");
    if (!j.contains("kind") || !j["kind"].is_string()) {
        throw ParseError("metric spec: missing string field 'kind'");
    }
    MetricSpec spec;
    spec.kind = j["kind"].get<std::string>();
    if (j.contains("dimension")) {
        if (!j["dimension"].is_number_integer()) {
            throw ParseError("metric spec: 'dimension' must be an integer");
        }
        spec.dimension = j["dimension"].get<int>();
    }
    if (j.contains("params")) {
        if (!j["params"].is_object()) {
            throw ParseError("metric spec: 'params' must be an object");
        }
        spec.params = j["params"];
    }
    return spec;
}

inline MetricSpec parse_metric_spec(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("metric spec: ") + e.what());
    }
    return metric_spec_from_json(j);
}

// ---------------------------------------------------------------------------
// Positivity of product metrics F = sqrt(f(alpha1^2, alpha2^2)).

struct ProfileDerivatives {
    double f, fs, ft, fss, fst, ftt;
};

inline ProfileDerivatives profile_derivatives(const ProductProfile& profile, double s, double t)
{
    using J = Jet<double, 2, 2>;
    using Idx = J::Layout::MultiIndex;
    const J js = J::variable(s, {1.0, 0.0});
    const J jt = J::variable(t, {0.0, 1.0});
    const J f = profile(js, jt);
    return {f.value(),
            f.derivative(Idx{1, 0}),
            f.derivative(Idx{0, 1}),
            f.derivative(Idx{2, 0}),
            f.derivative(Idx{1, 1}),
            f.derivative(Idx{0, 2})};
}

/// The five conditions of the positivity gate at (s, t); returns 0 when all
/// hold, else the 1-based index of the first violated condition.
inline int profile_condition_violated(const ProductProfile& profile, double s, double t)
{
    const ProfileDerivatives d = profile_derivatives(profile, s, t);
    const double c[5] = {d.fs, d.ft, d.fs + 2.0 * s * d.fss, d.ft + 2.0 * t * d.ftt, d.fs * d.ft - 2.0 * d.f * d.fst};
    for (int k = 0; k < 5; ++k) {
        if (!(c[k] > 0.0)) {
            return k + 1;
        }
    }
    return 0;
}

inline const char* profile_condition_name(int k)
{
    switch (k) {
    case 1:
        return "f_s > 0";
    case 2:
        return "f_t > 0";
    case 3:
        return "f_s + 2 s f_ss > 0";
    case 4:
        return "f_t + 2 t f_tt > 0";
    case 5:
        return "f_s f_t - 2 f f_st > 0";
    }
    return "none";
}

/// Checks homogeneity, non-vanishing and the five conditions on (cos a, sin a), a in [0, pi/2].
inline void validate_profile(const ProductProfile& profile, int samples = 1025)
{
    for (int k = 0; k < samples; ++k) {
        const double ang = 0.5 * std::numbers::pi * k / (samples - 1);
        const double s = k == samples - 1 ? 0.0 : std::cos(ang);
        const double t = k == 0 ? 0.0 : std::sin(ang);
        const double f = profile(s, t);
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw InvalidParameterError("product profile vanishes at (s, t) = (" + std::to_string(s) + ", " +
                                        std::to_string(t) + ")");
        }
        const double f2 = profile(2.5 * s, 2.5 * t);
        if (std::abs(f2 - 2.5 * f) > 1e-12 * std::abs(f2)) {
            throw InvalidParameterError("product profile is not positively 1-homogeneous");
        }
        const int bad = profile_condition_violated(profile, s, t);
        if (bad != 0) {
            throw InvalidParameterError(std::string("product profile violates ") + profile_condition_name(bad) +
                                        " at (s, t) = (" + std::to_string(s) + ", " + std::to_string(t) + ")");
        }
    }
}

// ---------------------------------------------------------------------------
// Constructors.

inline MetricField make_euclidean(int n)
{
    if (n < 1) {
        throw InvalidParameterError("euclidean: dimension must be >= 1");
    }
    return MetricField("euclidean", n, box_domain(n, 1.0), EuclideanMetric{n});
}

inline MetricField make_minkowski(const MinkowskiNorm& norm)
{
    const int n = norm.A.n;
    norm.validate(n);
    return MetricField("minkowski", n, box_domain(n, 1.0), MinkowskiMetric{norm});
}

inline MetricField make_riemannian(const RiemannianModel& model)
{
    model.validate();
    return MetricField("riemannian", model.dim, model.domain(), RiemannianMetric{model});
}

/// F = alpha + beta; the gate ||beta||_x < 1 is checked on a deterministic sample of the domain.
inline MetricField make_randers(const RiemannianModel& alpha, const Vec& b0, const Matrix& B = Matrix())
{
    alpha.validate();
    const int n = alpha.dim;
    if (static_cast<int>(b0.size()) != n || (B.n != 0 && B.n != n)) {
        throw InvalidParameterError("randers: b has wrong dimension");
    }
    RandersMetric m{alpha, b0, B};
    const Domain domain = alpha.domain();
    auto check = [&](const Vec& x) {
        const double bn = m.beta_norm(x);
        if (!(bn < 1.0)) {
            std::string where;
            for (double v : x) {
                where += (where.empty() ? "" : ", ") + std::to_string(v);
            }
            throw InvalidParameterError("randers: ||beta|| = " + std::to_string(bn) + " >= 1 at x = (" + where + ")");
        }
    };
    check(Vec(n, 0.0));
    Rng rng(0xb37aULL);
    const int count = B.n == 0 && alpha.kind == RiemannianModel::Kind::flat ? 1 : 2048;
    for (int k = 0; k < count; ++k) {
        check(random_point(domain, 0.0, rng));
    }
    return MetricField("randers", n, domain, m);
}

inline MetricField make_funk_shifted(const Vec& a)
{
    const int n = static_cast<int>(a.size());
    if (n < 1) {
        throw InvalidParameterError("funk_ball_shifted: dimension must be >= 1");
    }
    if (!(norm2(a) < 1.0)) {
        throw InvalidParameterError("funk_ball_shifted: requires |a| < 1");
    }
    return MetricField("funk_ball_shifted", n, ball_domain(n, 1.0), FunkShiftedMetric{a});
}

/// Funk metric of the unit phi-ball U = {phi < 1}; `a` adds the exact term <a,y>/(1+<a,x>).
inline MetricField make_funk_implicit(const MinkowskiNorm& phi, const Vec& a = {})
{
    const int n = phi.A.n;
    phi.validate(n);
    if (!a.empty() && static_cast<int>(a.size()) != n) {
        throw InvalidParameterError("funk_implicit: shift vector has wrong dimension");
    }
    // radial extent of U along sampled directions gives the bounding box and the shift gate
    Rng rng(0xf00cULL);
    Vec extent(n, 0.0);
    double shift_bound = 0.0;
    const int dirs = 4096;
    for (int k = 0; k < dirs; ++k) {
        Vec d = random_direction(n, rng);
        if (k < 2 * n) {
            d.assign(n, 0.0);
            d[k / 2] = k % 2 == 0 ? 1.0 : -1.0;
        }
        const double r = 1.0 / phi(std::span<const double>(d));
        for (int i = 0; i < n; ++i) {
            extent[i] = std::max(extent[i], std::abs(d[i]) * r);
        }
        if (!a.empty()) {
            shift_bound = std::max(shift_bound, std::abs(dot(a, d)) * r);
        }
    }
    if (!a.empty() && !(shift_bound < 1.0)) {
        throw InvalidParameterError("funk_implicit: requires |<a, x>| < 1 on the unit phi-ball");
    }
    Domain d;
    for (int i = 0; i < n; ++i) {
        d.lower.push_back(-1.02 * extent[i]);
        d.upper.push_back(1.02 * extent[i]);
    }
    d.contains_fn = [phi](std::span<const double> x) { return phi(x) < 1.0; };
    return MetricField("funk_implicit", n, std::move(d), FunkImplicitMetric{phi, a});
}

inline MetricField make_szabo_product(const RiemannianModel& alpha1, const RiemannianModel& alpha2,
                                      const ProductProfile& profile, std::string kind = "szabo_product")
{
    alpha1.validate();
    alpha2.validate();
    validate_profile(profile);
    const int n = alpha1.dim + alpha2.dim;
    return MetricField(std::move(kind), n, product_domain(alpha1.domain(), alpha2.domain()),
                       SzaboProductMetric{alpha1, alpha2, profile});
}

/// F_eps = sqrt(h^2 + w^2 + eps sqrt(h^4 + w^4)): hyperbolic factor of dimension m times a flat line.
inline MetricField make_szabo_epsilon(double epsilon, int hyperbolic_dimension = 2)
{
    RiemannianModel h{RiemannianModel::Kind::hyperbolic_disk, hyperbolic_dimension, {}};
    RiemannianModel line{RiemannianModel::Kind::flat, 1, {}};
    ProductProfile f{ProductProfile::Kind::szabo, epsilon, 2.0};
    return make_szabo_product(h, line, f, "szabo_epsilon");
}

inline MetricField make_incomplete_slab(int n = 3)
{
    if (n < 2) {
        throw InvalidParameterError("incomplete_slab: dimension must be >= 2");
    }
    Domain d;
    d.lower.assign(n, -1.0);
    d.upper.assign(n, 1.0);
    d.contains_fn = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] < 1.0; };
    return MetricField("incomplete_slab", n, std::move(d), IncompleteSlabMetric{n});
}

/// Build a validated metric from its spec.
inline MetricField make_metric(const MetricSpec& spec)
{
    const json& p = spec.params;
    const std::string& k = spec.kind;
    if (k == "euclidean") {
        detail::reject_unknown(p, {}, "params");
        return make_euclidean(detail::require_dimension(spec, 1));
    }
    if (k == "minkowski") {
        const int n = detail::require_dimension(spec, 1);
        return make_minkowski(detail::read_norm(p, n, "params"));
    }
    if (k == "riemannian") {
        const int n = detail::require_dimension(spec, 1);
        return make_riemannian(detail::read_model(p, n, "params"));
    }
    if (k == "randers") {
        detail::reject_unknown(p, {"alpha", "b", "B"}, "params");
        const int n = detail::require_dimension(spec, 1);
        const RiemannianModel alpha = detail::read_model(p.value("alpha", json::object()), n, "params.alpha");
        const Vec b = p.contains("b") ? detail::read_vector(p["b"], "params.b", n) : Vec(n, 0.0);
        const Matrix B = p.contains("B") ? detail::read_matrix(p["B"], "params.B", n) : Matrix();
        return make_randers(alpha, b, B);
    }
    if (k == "funk_ball_shifted") {
        detail::reject_unknown(p, {"a"}, "params");
        const int n = detail::require_dimension(spec, 1);
        return make_funk_shifted(p.contains("a") ? detail::read_vector(p["a"], "params.a", n) : Vec(n, 0.0));
    }
    if (k == "funk_implicit") {
        detail::reject_unknown(p, {"phi", "a"}, "params");
        const int n = detail::require_dimension(spec, 1);
        const MinkowskiNorm phi = detail::read_norm(p.value("phi", json::object()), n, "params.phi");
        return make_funk_implicit(phi, p.contains("a") ? detail::read_vector(p["a"], "params.a", n) : Vec{});
    }
    if (k == "szabo_product") {
        detail::reject_unknown(p, {"factor1", "factor2", "profile"}, "params");
        auto factor = [&](const char* name, int def_dim, const char* def_model) {
            json f = p.value(name, json{{"model", def_model}});
            const int d = f.value("dimension", def_dim);
            if (d < 1) {
                throw InvalidParameterError(std::string("params.") + name + ": dimension must be >= 1");
            }
            return detail::read_model(f, d, std::string("params.") + name);
        };
        const RiemannianModel a1 = factor("factor1", 2, "hyperbolic_disk");
        const RiemannianModel a2 = factor("factor2", 1, "flat");
        if (spec.dimension != 0 && spec.dimension != a1.dim + a2.dim) {
            throw InvalidParameterError("szabo_product: dimension does not match the factor dimensions");
        }
        return make_szabo_product(a1, a2, detail::read_profile(p.value("profile", json::object())));
    }
    if (k == "szabo_epsilon") {
        detail::reject_unknown(p, {"epsilon", "hyperbolic_dimension"}, "params");
        const int m = p.value("hyperbolic_dimension", 2);
        if (spec.dimension != 0 && spec.dimension != m + 1) {
            throw InvalidParameterError("szabo_epsilon: dimension must equal hyperbolic_dimension + 1");
        }
        return make_szabo_epsilon(p.value("epsilon", 0.5), m);
    }
    if (k == "incomplete_slab") {
        detail::reject_unknown(p, {}, "params");
        return make_incomplete_slab(spec.dimension == 0 ? 3 : detail::require_dimension(spec, 2));
    }
    throw InvalidParameterError("unknown metric kind '" + k + "'");
}

/// One representative spec per kind, as used by the universal invariant suite.
inline std::vector<MetricSpec> zoo_catalog()
{
    return {
        {"euclidean", 3, json::object()},
        {"minkowski", 3, json{{"A", {{2.0, 0.3, 0.0}, {0.3, 1.0, 0.1}, {0.0, 0.1, 1.5}}}, {"b", {0.2, -0.1, 0.3}}}},
        {"riemannian", 2, json{{"model", "hyperbolic_disk"}}},
        {"randers", 2, json{{"alpha", {{"model", "flat"}}}, {"b", {0.3, 0.1}}, {"B", {{0.0, 0.2}, {-0.2, 0.0}}}}},
        {"funk_ball_shifted", 3, json{{"a", {0.3, 0.0, 0.0}}}},
        {"funk_implicit", 2, json{{"phi", {{"A", {{1.0, 0.0}, {0.0, 1.5}}}, {"b", {0.2, 0.0}}}}}},
        {"szabo_product", 3,
         json{{"factor1", {{"model", "sphere"}, {"dimension", 2}}},
              {"factor2", {{"model", "flat"}, {"dimension", 1}}},
              {"profile", {{"kind", "szabo"}, {"epsilon", -0.3}}}}},
        {"szabo_epsilon", 3, json{{"epsilon", 0.5}}},
        {"incomplete_slab", 3, json::object()},
    };
}

} // namespace finsler
