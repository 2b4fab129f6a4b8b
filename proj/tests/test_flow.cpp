// Geodesics, Jacobi fields and torsion along geodesics.

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "finsler/finsler.hpp"

using namespace finsler;

namespace {

MetricField sphere2() { return make_riemannian({RiemannianModel::Kind::sphere, 2, {}}); }

double gnorm(const MetricField& m, const Vec& x, const Vec& y, const Vec& v)
{
    return std::sqrt(bilinear(fundamental_tensor(m, {x, y}).g, v, v));
}

} // namespace

TEST(Flow, GreatCircleInStereographicChart)
{
    // unit speed from the origin along e1: the chart point is (tan(t/2), 0)
    const GeodesicTrace tr = integrate_geodesic(sphere2(), {0.0, 0.0}, {0.5, 0.0}, {0.0, 1.0});
    ASSERT_TRUE(tr.complete());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_NEAR(tr.positions[k][0], std::tan(0.5 * tr.times[k]), 1e-9);
        EXPECT_NEAR(tr.positions[k][1], 0.0, 1e-12);
    }
    EXPECT_LT(tr.speed_drift, 1e-9);
}

TEST(Flow, MinkowskiGeodesicsAreStraight)
{
    const MetricField m = make_metric(zoo_catalog()[1]);
    const Vec x0{0.1, 0.0, -0.2}, y0{0.3, -0.2, 0.1};
    const GeodesicTrace tr = integrate_geodesic(m, x0, y0, {0.0, 1.5});
    for (std::size_t k = 0; k < tr.size(); ++k) {
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(tr.positions[k][i], x0[i] + tr.times[k] * y0[i], 1e-12);
        }
    }
}

TEST(Flow, FunkGeodesicsAreStraightLines)
{
    const MetricField m = make_funk_shifted({0.3, 0.0, 0.0});
    const Vec x0{0.1, 0.2, -0.1}, y0{0.4, -0.3, 0.5};
    const GeodesicTrace tr = integrate_geodesic(m, x0, y0, {0.0, 1.0});
    ASSERT_TRUE(tr.complete());
    const double ny = norm2(y0);
    for (const Vec& p : tr.positions) {
        Vec d(3);
        for (int i = 0; i < 3; ++i) {
            d[i] = p[i] - x0[i];
        }
        const double along = dot(d, y0) / ny;
        EXPECT_NEAR(norm2(d) * norm2(d) - along * along, 0.0, 1e-16 + 1e-10 * along * along);
        EXPECT_GE(along, -1e-14);
    }
}

TEST(Flow, SphereJacobiFields)
{
    const MetricField m = sphere2();
    const Vec x0{0.0, 0.0}, y0{0.5, 0.0}, e2{0.0, 0.5}; // e2 has unit length at the origin
    const GeodesicTrace tr = integrate_geodesic(m, x0, y0, {0.0, 2.0});
    const JacobiField s = jacobi_propagate(m, tr, {0.0, 0.0}, e2);
    const JacobiField c = jacobi_propagate(m, tr, e2, {0.0, 0.0});
    ASSERT_EQ(s.V.size(), tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.times[k];
        EXPECT_NEAR(gnorm(m, tr.positions[k], tr.velocities[k], s.V[k]), std::abs(std::sin(t)), 1e-8);
        EXPECT_NEAR(gnorm(m, tr.positions[k], tr.velocities[k], c.V[k]), std::abs(std::cos(t)), 1e-8);
    }
}

TEST(Flow, ParallelTransportKeepsLength)
{
    // a Minkowski norm has N = 0, so a field with DV = 0 stays constant in the chart
    const MetricField m = make_metric(zoo_catalog()[1]);
    const Vec x0{0.0, 0.1, 0.0}, y0{0.2, 0.3, -0.1}, V0{1.0, -0.5, 0.2};
    const GeodesicTrace tr = integrate_geodesic(m, x0, y0, {0.0, 1.0});
    const JacobiField j = jacobi_propagate(m, tr, V0, {0.0, 0.0, 0.0});
    for (std::size_t k = 0; k < tr.size(); ++k) {
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(j.V[k][i], V0[i], 1e-10);
        }
    }
}

TEST(Flow, SlabGeodesicLeavesTheChart)
{
    const MetricField m = make_incomplete_slab(3);
    const GeodesicTrace tr = integrate_geodesic(m, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 50.0});
    EXPECT_TRUE(tr.exited);
    EXPECT_FALSE(tr.complete());
    EXPECT_GT(tr.exit_time, 0.0);
    EXPECT_LT(tr.exit_time, 50.0);
    EXPECT_THROW(torsion_trace(m, tr), ResolutionError);
}

TEST(Flow, RiemannianTorsionVanishesAlongGeodesic)
{
    const MetricField m = make_riemannian({RiemannianModel::Kind::hyperbolic_disk, 2, {}});
    const GeodesicTrace tr = integrate_geodesic(m, {0.1, 0.0}, {0.3, 0.2}, {0.0, 1.0});
    const TorsionTrace tt = torsion_trace(m, tr);
    EXPECT_LT(tt.max_I, 1e-12);
}

TEST(Flow, FunkTorsionSatisfiesTheTransportEquation)
{
    const MetricField m = make_funk_shifted({0.3, 0.0, 0.0});
    const GeodesicTrace tr = integrate_geodesic(m, {0.1, -0.2, 0.1}, {0.5, 0.4, -0.3}, {0.0, 1.0});
    ASSERT_TRUE(tr.complete());
    const TorsionTrace tt = torsion_trace(m, tr);
    EXPECT_GT(tt.max_I, 1e-3);
    EXPECT_LT(max_interior_residual(tt), 1e-6 * tt.max_I);
    EXPECT_LT(tt.di_agreement, 1e-6);
}

TEST(Flow, TraceCsvHasHeaderAndRows)
{
    const GeodesicTrace tr = integrate_geodesic(sphere2(), {0.0, 0.0}, {0.5, 0.0}, {0.0, 1.0}, 1e-10, 9);
    std::ostringstream os;
    write_trace_csv(os, tr);
    std::istringstream in(os.str());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    EXPECT_NE(line.find("t"), std::string::npos);
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 9);
}

TEST(Flow, BadInputsRejected)
{
    EXPECT_THROW(integrate_geodesic(sphere2(), {0.0, 0.0}, {0.0, 0.0, 1.0}, {0.0, 1.0}), Error);
    EXPECT_THROW(chebyshev_nodes(0.0, 1.0, 2), InvalidParameterError);
}
