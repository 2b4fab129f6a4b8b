// Jets, pointwise geometry, metric specs and sphere quadrature.

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "finsler/finsler.hpp"

using namespace finsler;

namespace {

// Hessian of F^2 / 2 in y by central differences; independent of the jet code.
Matrix fd_fundamental(const MetricField& m, const Vec& x, const Vec& y, double h = 1e-4)
{
    const int n = m.dimension();
    auto e = [&](Vec v) { const double f = m(x, v); return 0.5 * f * f; };
    Matrix g(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Vec pp = y, pm = y, mp = y, mm = y;
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            g(i, j) = (e(pp) - e(pm) - e(mp) + e(mm)) / (4 * h * h);
        }
    }
    return g;
}

MetricField sphere2() { return make_riemannian({RiemannianModel::Kind::sphere, 2, {}}); }

} // namespace

// ---- jets -------------------------------------------------------------------

TEST(Jet, MatchesFiniteDifferences)
{
    using J = Jet<double, 2, 3>;
    using Idx = J::Layout::MultiIndex;
    auto f = [](auto x, auto y) { return exp(sin(x * y)) + log(x + 2.0) * sqrt(y + 3.0) / (1.0 + x * x); };
    const double x0 = 0.4, y0 = -0.3;
    const J r = f(J::variable(x0, {1.0, 0.0}), J::variable(y0, {0.0, 1.0}));
    auto fd = [&](double x, double y) {
        using std::exp, std::sin, std::log, std::sqrt;
        return exp(sin(x * y)) + log(x + 2.0) * sqrt(y + 3.0) / (1.0 + x * x);
    };
    const double h = 1e-3;
    const double fx = (fd(x0 + h, y0) - fd(x0 - h, y0)) / (2 * h);
    const double fxy = (fd(x0 + h, y0 + h) - fd(x0 + h, y0 - h) - fd(x0 - h, y0 + h) + fd(x0 - h, y0 - h)) / (4 * h * h);
    const double fyy = (fd(x0, y0 + h) - 2 * fd(x0, y0) + fd(x0, y0 - h)) / (h * h);
    const double fxxx = (fd(x0 + 2 * h, y0) - 2 * fd(x0 + h, y0) + 2 * fd(x0 - h, y0) - fd(x0 - 2 * h, y0)) /
                        (2 * h * h * h);
    EXPECT_NEAR(r.value(), fd(x0, y0), 1e-15);
    EXPECT_NEAR(r.derivative(Idx{1, 0}), fx, 1e-6);
    EXPECT_NEAR(r.derivative(Idx{1, 1}), fxy, 1e-5);
    EXPECT_NEAR(r.derivative(Idx{0, 2}), fyy, 1e-5);
    EXPECT_NEAR(r.derivative(Idx{3, 0}), fxxx, 1e-4);
}

TEST(Jet, NestedMixedDerivative)
{
    using In = Jet<double, 1, 1>;
    using Out = Jet<In, 1, 1>;
    using Idx = Out::Layout::MultiIndex;
    using IIdx = In::Layout::MultiIndex;
    // d/dx d/dy (x^2 y^3) = 6 x y^2
    const Out x = Out::variable(In(1.5), {1.0});
    Out y(In::variable(0.7, {1.0}));
    const Out f = x * x * y * y * y;
    EXPECT_NEAR(f.derivative(Idx{1}).derivative(IIdx{1}), 6 * 1.5 * 0.49, 1e-13);
}

TEST(Jet, OrderTooHighThrows)
{
    using J = Jet<double, 1, 2>;
    const J x = J::variable(0.3, {1.0});
    EXPECT_THROW((void)(x * x).derivative({3}), OutOfOrderError);
}

TEST(Jet, ReciprocalOfZeroIsNotFinite)
{
    using J = Jet<double, 1, 2>;
    const J x = J::variable(0.0, {1.0});
    EXPECT_FALSE(std::isfinite((1.0 / x).value()));
}

// ---- geometry ---------------------------------------------------------------

TEST(Geometry, EuclideanIsFlat)
{
    const MetricField m = make_euclidean(3);
    const TangentSample at{{0.1, -0.2, 0.3}, {0.5, 1.0, -0.4}};
    const auto g = fundamental_tensor(m, at);
    const auto sp = spray(m, at);
    const auto r = riemann(m, at);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(sp.G[i], 0.0);
        for (int j = 0; j < 3; ++j) {
            EXPECT_NEAR(g.g(i, j), i == j ? 1.0 : 0.0, 1e-15);
            EXPECT_DOUBLE_EQ(r.R(i, j), 0.0);
        }
    }
}

TEST(Geometry, FundamentalTensorAgreesWithHessian)
{
    for (const MetricSpec& s : zoo_catalog()) {
        const MetricField m = make_metric(s);
        Rng rng(3);
        for (int k = 0; k < 5; ++k) {
            const Vec x = random_point(m.domain(), 0.2, rng);
            const Vec y = random_direction(m.dimension(), rng);
            const Matrix want = fd_fundamental(m, x, y);
            const Matrix got = fundamental_tensor(m, {x, y}).g;
            for (int i = 0; i < m.dimension(); ++i) {
                for (int j = 0; j < m.dimension(); ++j) {
                    EXPECT_NEAR(got(i, j), want(i, j), 1e-5 * (1 + std::abs(want(i, j)))) << s.kind;
                }
            }
        }
    }
}

TEST(Geometry, SpaceFormCurvature)
{
    const TangentSample at{{0.2, -0.1}, {0.3, 0.8}};
    EXPECT_NEAR(flag_curvature(sphere2(), at, {1.0, 0.0}), 1.0, 1e-10);
    const MetricField h = make_riemannian({RiemannianModel::Kind::hyperbolic_disk, 2, {}});
    EXPECT_NEAR(flag_curvature(h, at, {1.0, 0.0}), -1.0, 1e-10);
}

TEST(Geometry, FunkFlagCurvature)
{
    const MetricField m = make_funk_shifted({0.3, 0.0, 0.0});
    const TangentSample at{{0.1, 0.2, -0.3}, {0.4, -0.7, 0.2}};
    EXPECT_NEAR(flag_curvature(m, at, {0.0, 0.3, 1.0}), -0.25, 1e-9);
}

TEST(Geometry, DegenerateFlagRejected)
{
    const TangentSample at{{0.0, 0.0}, {0.3, 0.8}};
    EXPECT_THROW(flag_curvature(sphere2(), at, {0.6, 1.6}), DegenerateFlagError);
}

TEST(Geometry, RandersMeanCartanOnAxis)
{
    // F = |y| + b y^1 in the plane; at y = e1 the mean Cartan torsion is I = (0, 0) by symmetry
    const MetricField m = make_randers({RiemannianModel::Kind::flat, 2, {}}, {0.4, 0.0});
    const auto I = mean_cartan(m, {{0.0, 0.0}, {1.0, 0.0}});
    EXPECT_NEAR(I.covariant[0], 0.0, 1e-13);
    EXPECT_NEAR(I.covariant[1], 0.0, 1e-13);
    const auto I2 = mean_cartan(m, {{0.0, 0.0}, {0.0, 1.0}});
    EXPECT_GT(std::abs(I2.covariant[0]), 1e-3);
}

TEST(Geometry, OutsideDomainIsAnError)
{
    const MetricField m = make_funk_shifted({0.0, 0.0});
    EXPECT_THROW(check_sample(m, {{1.2, 0.0}, {1.0, 0.0}}), DomainError);
}

// ---- metric specs and the positivity gate ------------------------------------

TEST(Zoo, CatalogRoundTrips)
{
    ASSERT_EQ(zoo_catalog().size(), metric_kinds().size());
    for (const MetricSpec& s : zoo_catalog()) {
        const MetricSpec back = parse_metric_spec(to_json(s).dump());
        EXPECT_EQ(back, s);
        EXPECT_NO_THROW(make_metric(back)) << s.kind;
    }
}

TEST(Zoo, RejectsBadSpecs)
{
    EXPECT_THROW(parse_metric_spec(R"({"kind":"euclidean","dimension":2,"params":{},"extra":1})"), ParseError);
    EXPECT_THROW(make_metric(parse_metric_spec(R"({"kind":"funk_ball_shifted","dimension":2,"params":{"bogus":1}})")),
                 ParseError);
    EXPECT_THROW(make_metric(parse_metric_spec(R"({"kind":"nope","dimension":2,"params":{}})")),
                 InvalidParameterError);
    EXPECT_THROW(make_metric(parse_metric_spec(R"({"kind":"randers","dimension":2,"params":{"b":[0.9,0.9]}})")),
                 InvalidParameterError);
    EXPECT_THROW(make_metric(parse_metric_spec(R"({"kind":"funk_ball_shifted","dimension":2,"params":{"a":[1.5,0]}})")),
                 InvalidParameterError);
    EXPECT_THROW(parse_metric_spec("{not json"), ParseError);
}

TEST(Zoo, PositivityGate)
{
    EXPECT_NO_THROW(make_szabo_epsilon(0.5));
    EXPECT_THROW(make_szabo_epsilon(-0.6), InvalidParameterError);
    const RiemannianModel h{RiemannianModel::Kind::hyperbolic_disk, 2, {}};
    const RiemannianModel line{RiemannianModel::Kind::flat, 1, {}};
    EXPECT_THROW(make_szabo_product(h, line, {ProductProfile::Kind::power_mean, 0.0, 3.0}), InvalidParameterError);
}

TEST(Zoo, RejectedProfileIsNotPositiveDefinite)
{
    // where the gate fires for eps = -0.6, g built without the gate has a non-positive eigenvalue
    const ProductProfile f{ProductProfile::Kind::szabo, -0.6, 2.0};
    double s = 0.0, t = 0.0;
    for (int k = 0; k <= 64; ++k) {
        const double a = 0.5 * std::numbers::pi * k / 64;
        if (profile_condition_violated(f, std::cos(a), std::sin(a)) != 0) {
            s = std::cos(a);
            t = std::sin(a);
            break;
        }
    }
    ASSERT_GT(s + t, 0.0);
    const RiemannianModel h{RiemannianModel::Kind::hyperbolic_disk, 2, {}};
    const RiemannianModel line{RiemannianModel::Kind::flat, 1, {}};
    const MetricField raw("raw", 3, product_domain(h.domain(), line.domain()), SzaboProductMetric{h, line, f});
    // at the origin the hyperbolic factor has conformal factor 4, so s = 4 |y1|^2
    const Vec y{0.5 * std::sqrt(s), 0.0, std::sqrt(t)};
    const auto ev = symmetric_eigenvalues(fd_fundamental(raw, {0.0, 0.0, 0.0}, y));
    EXPECT_LE(*std::min_element(ev.begin(), ev.end()), 1e-6);
    EXPECT_THROW(fundamental_tensor(raw, {{0.0, 0.0, 0.0}, y}), DegenerateMetricError);
}

// ---- quadrature -------------------------------------------------------------

TEST(Quadrature, EuclideanDensityIsOne)
{
    EXPECT_NEAR(volume_density(make_euclidean(2), {0.0, 0.0}), 1.0, 1e-12);
    EXPECT_NEAR(volume_density(make_euclidean(3), {0.0, 0.0, 0.0}), 1.0, 1e-12);
    EXPECT_NEAR(volume_density(make_euclidean(4), {0.0, 0.0, 0.0, 0.0}), 1.0, 1e-3);
}

TEST(Quadrature, RandersDensityAgainstGridCount)
{
    // indicatrix area by counting cell centres of a 4000 x 4000 grid
    const double b = 0.5;
    const int cells = 4000;
    const double lo = -2.1, hi = 2.1, h = (hi - lo) / cells;
    long long inside = 0;
    for (int i = 0; i < cells; ++i) {
        const double u = lo + (i + 0.5) * h;
        for (int j = 0; j < cells; ++j) {
            const double v = lo + (j + 0.5) * h;
            inside += std::sqrt(u * u + v * v) + b * u < 1.0;
        }
    }
    const double grid_sigma = std::numbers::pi / (inside * h * h);
    const MetricField m = make_randers({RiemannianModel::Kind::flat, 2, {}}, {b, 0.0});
    const double sigma = volume_density(m, {0.1, 0.2});
    EXPECT_NEAR(sigma, grid_sigma, 2e-3);
    EXPECT_NEAR(sigma, 0.649519052838, 1e-9);
}

TEST(Quadrature, RiemannianDistortionVanishes)
{
    const MetricField h = make_riemannian({RiemannianModel::Kind::hyperbolic_disk, 3, {}});
    const TangentSample at{{0.2, -0.1, 0.3}, {0.3, 0.8, -0.2}};
    EXPECT_NEAR(distortion(h, at), 0.0, 1e-9);
    EXPECT_NEAR(s_curvature(h, at), 0.0, 1e-6);
}

TEST(Quadrature, FunkSCurvature)
{
    const MetricField m = make_funk_shifted({0.0, 0.0});
    const TangentSample at{{0.2, -0.3}, {0.5, 0.4}};
    EXPECT_NEAR(s_curvature(m, at) / (3 * m(at.x, at.y)), 0.5, 1e-3);
}
