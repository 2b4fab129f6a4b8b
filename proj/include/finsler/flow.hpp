#pragma once

// Geodesics and fields along them.
//
// Traces are sampled on Chebyshev-Gauss-Lobatto nodes so that time
// derivatives can be taken spectrally. Covariant derivatives along a geodesic
// use the nonlinear connection: D X^i = dX^i/dt + X^j N^i_j(sigma, sigma').

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/geometry.hpp"
#include "finsler/ode.hpp"
#include "finsler/sampling.hpp"
#include "finsler/volume.hpp"

namespace finsler {

struct GeodesicTrace {
    std::vector<double> times;
    std::vector<Vec> positions;
    std::vector<Vec> velocities;
    double t0 = 0.0;
    double t1 = 0.0;
    double tol = 0.0;
    double initial_speed = 0.0;
    double speed_drift = 0.0; // max |F(sigma, sigma') - F(sigma0, sigma0')|
    bool exited = false;
    double exit_time = 0.0;

    std::size_t size() const { return times.size(); }
    bool complete() const { return !exited; }
    TangentSample sample(std::size_t k) const { return {positions[k], velocities[k]}; }
};

/// Chebyshev-Gauss-Lobatto nodes on [t0, t1], increasing.
inline std::vector<double> chebyshev_nodes(double t0, double t1, int count)
{
    if (count < 3) {
        throw InvalidParameterError("need at least 3 nodes");
    }
    const int N = count - 1;
    std::vector<double> t(count);
    const double mid = 0.5 * (t0 + t1);
    const double half = 0.5 * (t1 - t0);
    for (int k = 0; k <= N; ++k) {
        t[k] = mid - half * std::cos(std::numbers::pi * k / N);
    }
    t.front() = t0;
    t.back() = t1;
    return t;
}

inline GeodesicTrace integrate_geodesic(const MetricField& metric, const Vec& x0, const Vec& y0,
                                        std::pair<double, double> t_span, double tol = 1e-10, int nodes = 257)
{
    check_sample(metric, {x0, y0});
    const auto [t0, t1] = t_span;
    if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0)) {
        throw InvalidParameterError("t_span must be a finite interval with t1 > t0");
    }
    if (!(tol > 0.0)) {
        throw InvalidParameterError("integrator tolerance must be positive");
    }
    const int n = metric.dimension();
    const Domain& domain = metric.domain();
    OdeRhs rhs = [&](double, const Vec& z, Vec& dz) {
        const std::span<const double> x(z.data(), n);
        const std::span<const double> y(z.data() + n, n);
        const Vec G = spray_coefficients(metric, x, y);
        for (int i = 0; i < n; ++i) {
            dz[i] = z[n + i];
            dz[n + i] = -2.0 * G[i];
        }
    };
    OdeAdmissible inside = [&](const Vec& z) { return domain.contains(std::span<const double>(z.data(), n)); };
    Vec z0 = x0;
    z0.insert(z0.end(), y0.begin(), y0.end());
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol;
    opt.min_step = 1e-10;
    const OdeResult r = integrate_dop853(rhs, t0, z0, chebyshev_nodes(t0, t1, nodes), opt, inside);

    GeodesicTrace out;
    out.t0 = t0;
    out.t1 = t1;
    out.tol = tol;
    out.exited = r.exited;
    out.exit_time = r.exit_time;
    out.initial_speed = metric(x0, y0);
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        out.times.push_back(r.times[k]);
        out.positions.emplace_back(r.states[k].begin(), r.states[k].begin() + n);
        out.velocities.emplace_back(r.states[k].begin() + n, r.states[k].end());
        out.speed_drift =
            std::max(out.speed_drift, std::abs(metric(out.positions.back(), out.velocities.back()) - out.initial_speed));
    }
    return out;
}

/// Relative speed drift of a trace.
inline double relative_speed_drift(const GeodesicTrace& tr)
{
    return tr.initial_speed > 0.0 ? tr.speed_drift / tr.initial_speed : tr.speed_drift;
}

// ---------------------------------------------------------------------------
// Spectral differentiation on the trace grid.

struct SpectralDerivative {
    std::vector<Vec> values;
    double error_estimate = 0.0; // absolute, from the tail of the Chebyshev series
};

/// d/dt of a vector field sampled on Chebyshev-Gauss-Lobatto nodes of [t0, t1].
/// Throws ResolutionError when the tail estimate exceeds tol times the natural
/// scale (max |f'| + max |f| / T, plus an optional reference for fields that vanish).
inline SpectralDerivative chebyshev_derivative(const std::vector<double>& times, const std::vector<Vec>& f,
                                               double tol = 1e-6, double reference = 0.0)
{
    const int count = static_cast<int>(times.size());
    if (count < 3 || static_cast<int>(f.size()) != count) {
        throw ResolutionError("spectral derivative needs a full node grid");
    }
    const int N = count - 1;
    const int dim = static_cast<int>(f[0].size());
    const double T = times.back() - times.front();
    const double ds_dt = 2.0 / T;
    std::vector<double> cosines(static_cast<std::size_t>(2 * N));
    for (int j = 0; j < 2 * N; ++j) {
        cosines[j] = std::cos(std::numbers::pi * j / N);
    }
    auto cosmj = [&](int m, int j) { return cosines[(static_cast<long>(m) * j) % (2 * N)]; };

    SpectralDerivative out;
    out.values.assign(count, Vec(dim, 0.0));
    double max_f = 0.0;
    double max_df = 0.0;
    double tail = 0.0;
    std::vector<double> a(N + 1);
    std::vector<double> b(N + 2);
    for (int c = 0; c < dim; ++c) {
        // node k of the trace sits at s = -cos(pi k / N) = cos(pi (N - k) / N)
        auto val = [&](int j) { return f[N - j][c]; };
        for (int m = 0; m <= N; ++m) {
            double s = 0.0;
            for (int j = 0; j <= N; ++j) {
                const double w = (j == 0 || j == N) ? 0.5 : 1.0;
                s += w * val(j) * cosmj(m, j);
            }
            a[m] = 2.0 * s / N;
        }
        a[0] *= 0.5;
        a[N] *= 0.5;
        std::fill(b.begin(), b.end(), 0.0);
        for (int m = N; m >= 1; --m) {
            b[m - 1] = b[m + 1] + 2.0 * m * a[m];
        }
        b[0] *= 0.5;
        for (int j = 0; j <= N; ++j) {
            double s = 0.0;
            for (int m = 0; m < N; ++m) {
                s += b[m] * cosmj(m, j);
            }
            out.values[N - j][c] = s * ds_dt;
            max_df = std::max(max_df, std::abs(s * ds_dt));
            max_f = std::max(max_f, std::abs(val(j)));
        }
        double t = 0.0;
        for (int m = N - N / 8; m <= N; ++m) {
            t += std::abs(a[m]) * static_cast<double>(m) * m;
        }
        tail = std::max(tail, t * ds_dt);
    }
    out.error_estimate = tail;
    const double scale = max_df + max_f * ds_dt + reference;
    if (tail > tol * scale) {
        throw ResolutionError("node grid too coarse for the spectral derivative (tail " + std::to_string(tail) +
                              " vs scale " + std::to_string(scale) + ")");
    }
    return out;
}

inline std::vector<Matrix> connection_along(const MetricField& metric, const GeodesicTrace& tr)
{
    std::vector<Matrix> N;
    N.reserve(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        N.push_back(spray(metric, tr.sample(k)).N);
    }
    return N;
}

inline std::vector<Vec> covariant_derivative_along(const std::vector<Matrix>& N, const GeodesicTrace& tr,
                                                   const std::vector<Vec>& X, double tol = 1e-6,
                                                   double reference = 0.0)
{
    if (!tr.complete()) {
        throw ResolutionError("trace left the chart; covariant derivatives need the full node grid");
    }
    SpectralDerivative d = chebyshev_derivative(tr.times, X, tol, reference);
    for (std::size_t k = 0; k < X.size(); ++k) {
        const Vec nx = matvec(N[k], X[k]);
        for (std::size_t i = 0; i < nx.size(); ++i) {
            d.values[k][i] += nx[i];
        }
    }
    return d.values;
}

/// D_{sigma'} X = dX/dt + N(sigma, sigma') X on the trace nodes.
inline std::vector<Vec> covariant_derivative_along(const MetricField& metric, const GeodesicTrace& tr,
                                                   const std::vector<Vec>& X, double tol = 1e-6)
{
    if (X.size() != tr.size()) {
        throw InvalidParameterError("vector field must be sampled on the trace nodes");
    }
    return covariant_derivative_along(connection_along(metric, tr), tr, X, tol);
}

// ---------------------------------------------------------------------------
// Torsion along a geodesic.

struct TorsionTrace {
    GeodesicTrace trace;
    std::vector<Vec> I_of_t;        // contravariant mean Cartan torsion
    std::vector<Vec> DI_of_t;       // D I from spectral differentiation of I
    std::vector<Vec> J_of_t;        // D I from the pointwise mean Landsberg torsion
    std::vector<Vec> D2I_of_t;      // D J
    std::vector<double> phi_of_t;   // sqrt(g(I, I))
    std::vector<double> residual_of_t; // ||D D I + R(I)||_g
    double di_agreement = 0.0;      // max ||DI - J||_g relative to the field scale
    double max_I = 0.0;             // max ||I||_g
};

inline TorsionTrace torsion_trace(const MetricField& metric, const GeodesicTrace& tr, double tol = 1e-6)
{
    if (!tr.complete()) {
        throw ResolutionError("trace left the chart before t1; torsion derivatives need the full node grid");
    }
    const std::size_t K = tr.size();
    TorsionTrace out;
    out.trace = tr;
    std::vector<Matrix> N(K);
    std::vector<FundamentalTensor> G(K);
    std::vector<Matrix> R(K);
    for (std::size_t k = 0; k < K; ++k) {
        const TangentSample at = tr.sample(k);
        const PointGeometry pg = point_geometry(metric, at);
        G[k] = pg.g;
        N[k] = pg.spray.N;
        R[k] = pg.riemann.R;
        const TorsionVector I = raise(pg.g, mean_cartan_covariant(metric, at.x, at.y));
        const TorsionVector J = mean_landsberg(metric, at, pg.spray, pg.g);
        out.I_of_t.push_back(I.contravariant);
        out.J_of_t.push_back(J.contravariant);
        out.phi_of_t.push_back(g_norm(pg.g, I.contravariant));
        out.max_I = std::max(out.max_I, out.phi_of_t.back());
    }
    // torsion that vanishes identically only carries rounding noise
    const double reference = (out.max_I + 1e-300) * 2.0 / (tr.t1 - tr.t0);
    out.DI_of_t = covariant_derivative_along(N, tr, out.I_of_t, tol, reference);
    out.D2I_of_t = covariant_derivative_along(N, tr, out.J_of_t, tol, reference);
    double max_J = 0.0;
    double max_gap = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        Vec r = matvec(R[k], out.I_of_t[k]);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] += out.D2I_of_t[k][i];
        }
        out.residual_of_t.push_back(g_norm(G[k], r));
        Vec gap = out.DI_of_t[k];
        for (std::size_t i = 0; i < gap.size(); ++i) {
            gap[i] -= out.J_of_t[k][i];
        }
        max_gap = std::max(max_gap, g_norm(G[k], gap));
        max_J = std::max(max_J, g_norm(G[k], out.J_of_t[k]));
    }
    const double scale = max_J + out.max_I * 2.0 / (tr.t1 - tr.t0);
    out.di_agreement = scale > 0.0 ? max_gap / scale : max_gap;
    return out;
}

/// Largest residual ||D D I + R(I)||_g over interior nodes.
inline double max_interior_residual(const TorsionTrace& tt)
{
    double m = 0.0;
    for (std::size_t k = 1; k + 1 < tt.residual_of_t.size(); ++k) {
        m = std::max(m, tt.residual_of_t[k]);
    }
    return m;
}

/// Three-point second differences of phi at interior nodes (non-uniform grid).
inline std::vector<double> phi_second_difference(const TorsionTrace& tt)
{
    const auto& t = tt.trace.times;
    const auto& p = tt.phi_of_t;
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
        const double h0 = t[k] - t[k - 1];
        const double h1 = t[k + 1] - t[k];
        out[k] = 2.0 * (p[k + 1] * h0 - p[k] * (h0 + h1) + p[k - 1] * h1) / (h0 * h1 * (h0 + h1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Jacobi fields.

struct JacobiField {
    std::vector<double> times;
    std::vector<Vec> V;
    std::vector<Vec> DV;
    bool exited = false;
};

/// Integrates D D V + R(V) = 0 together with the geodesic through the trace's
/// initial condition, reporting V on the trace nodes.
inline JacobiField jacobi_propagate(const MetricField& metric, const GeodesicTrace& tr, const Vec& V0,
                                    const Vec& DV0, double tol = 0.0)
{
    const int n = metric.dimension();
    if (static_cast<int>(V0.size()) != n || static_cast<int>(DV0.size()) != n) {
        throw InvalidParameterError("Jacobi initial data has wrong dimension");
    }
    if (tr.size() == 0) {
        throw InvalidParameterError("empty trace");
    }
    // state (x, y, V, W) with W = D V:  V' = W - N V,  W' = -R V - N W
    OdeRhs rhs = [&](double, const Vec& z, Vec& dz) {
        const TangentSample at{Vec(z.begin(), z.begin() + n), Vec(z.begin() + n, z.begin() + 2 * n)};
        const PointGeometry pg = point_geometry(metric, at);
        const Vec V(z.begin() + 2 * n, z.begin() + 3 * n);
        const Vec W(z.begin() + 3 * n, z.end());
        const Vec NV = matvec(pg.spray.N, V);
        const Vec NW = matvec(pg.spray.N, W);
        const Vec RV = matvec(pg.riemann.R, V);
        for (int i = 0; i < n; ++i) {
            dz[i] = z[n + i];
            dz[n + i] = -2.0 * pg.spray.G[i];
            dz[2 * n + i] = W[i] - NV[i];
            dz[3 * n + i] = -RV[i] - NW[i];
        }
    };
    const Domain& domain = metric.domain();
    OdeAdmissible inside = [&](const Vec& z) { return domain.contains(std::span<const double>(z.data(), n)); };
    Vec z0 = tr.positions[0];
    z0.insert(z0.end(), tr.velocities[0].begin(), tr.velocities[0].end());
    z0.insert(z0.end(), V0.begin(), V0.end());
    z0.insert(z0.end(), DV0.begin(), DV0.end());
    OdeOptions opt;
    opt.rtol = tol > 0.0 ? tol : tr.tol;
    opt.atol = opt.rtol;
    const OdeResult r = integrate_dop853(rhs, tr.times[0], z0, tr.times, opt, inside);
    JacobiField out;
    out.exited = r.exited;
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        out.times.push_back(r.times[k]);
        out.V.emplace_back(r.states[k].begin() + 2 * n, r.states[k].begin() + 3 * n);
        out.DV.emplace_back(r.states[k].begin() + 3 * n, r.states[k].end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Growth of the mean Cartan torsion.

struct GrowthPoint {
    double radius = 0.0;
    double estimate = 0.0; // running sup of the Cartan norm over sampled points at forward distance <= radius
    int geodesics_reaching = 0;
};

struct GrowthEstimate {
    std::vector<GrowthPoint> points;
    int geodesics = 0;
    std::string coverage_note;
};

/// Shoots unit-speed geodesics from p and records the Cartan norm along them.
/// Distances are forward distances (time along unit-speed geodesics).
inline GrowthEstimate growth_estimate(const MetricField& metric, const Vec& p, const std::vector<double>& radii,
                                      int directions = 12, std::uint64_t seed = 1, int nodes_per_geodesic = 17)
{
    if (!metric.domain().contains(p)) {
        throw DomainError("growth_estimate: base point outside the chart domain");
    }
    std::vector<double> rs = radii;
    std::sort(rs.begin(), rs.end());
    GrowthEstimate out;
    out.geodesics = directions;
    out.points.resize(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
        out.points[i].radius = rs[i];
    }
    const double base = cartan_norm(metric, p).value;
    for (auto& gp : out.points) {
        gp.estimate = base;
    }
    if (rs.empty() || rs.back() <= 0.0) {
        return out;
    }
    Rng rng(seed);
    const int n = metric.dimension();
    for (int d = 0; d < directions; ++d) {
        Vec y = random_direction(n, rng);
        const double f = metric(p, y);
        for (double& v : y) {
            v /= f;
        }
        const GeodesicTrace tr = integrate_geodesic(metric, p, y, {0.0, rs.back()}, 1e-9, nodes_per_geodesic);
        const double reach = tr.exited ? tr.exit_time : rs.back();
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const double v = cartan_norm(metric, tr.positions[k]).value;
            for (auto& gp : out.points) {
                if (tr.times[k] <= gp.radius) {
                    gp.estimate = std::max(gp.estimate, v);
                }
            }
        }
        for (auto& gp : out.points) {
            if (reach >= gp.radius) {
                ++gp.geodesics_reaching;
            }
        }
    }
    if (out.points.back().geodesics_reaching == 0) {
        out.coverage_note = "all geodesics left the chart before the largest radius";
    } else if (out.points.back().geodesics_reaching < directions) {
        out.coverage_note = std::to_string(directions - out.points.back().geodesics_reaching) + " of " +
                            std::to_string(directions) + " geodesics left the chart before the largest radius";
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV export.

inline void write_trace_csv(std::ostream& os, const GeodesicTrace& tr, const TorsionTrace* tt = nullptr)
{
    const std::size_t n = tr.positions.empty() ? 0 : tr.positions[0].size();
    os << "t";
    for (std::size_t i = 0; i < n; ++i) {
        os << ",x" << i + 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        os << ",y" << i + 1;
    }
    if (tt) {
        os << ",phi,residual";
    }
    os << "\n";
    os << std::setprecision(12);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        os << tr.times[k];
        for (double v : tr.positions[k]) {
            os << "," << v;
        }
        for (double v : tr.velocities[k]) {
            os << "," << v;
        }
        if (tt) {
            os << "," << tt->phi_of_t[k] << "," << tt->residual_of_t[k];
        }
        os << "\n";
    }
}

} // namespace finsler
