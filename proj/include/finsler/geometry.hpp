#pragma once

// Pointwise geometry of a Finsler metric: fundamental tensor, spray and
// nonlinear connection, Riemann operator, flag curvature, mean Cartan and
// mean Landsberg torsions. Every derivative is taken with jets. Each pass
// seeds a fixed, small number of directions, so the cost is polynomial in
// the dimension.
//
// Covariant operations use the nonlinear connection N^i_j = dG^i/dy^j only;
// connection coefficients Gamma^i_jk are never formed.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/metric.hpp"

namespace finsler {

struct TangentSample {
    Vec x;
    Vec y;
};

struct FundamentalTensor {
    Matrix g;
    Matrix g_inverse;
    TangentSample at;

    double inner(const Vec& u, const Vec& v) const { return bilinear(g, u, v); }
};

struct SprayData {
    Vec G;
    Matrix N; // N(i, j) = dG^i / dy^j
    TangentSample at;
};

struct RiemannOperator {
    Matrix R;         // R(i, k) = R^i_k
    Matrix R_lowered; // R_lowered(j, k) = g_ji R^i_k
    TangentSample at;

    Vec apply(const Vec& u) const { return matvec(R, u); }
};

struct TorsionVector {
    Vec covariant;
    Vec contravariant;
    TangentSample at;
};

namespace detail {

template <class S>
std::vector<S> lift(std::span<const double> v)
{
    return std::vector<S>(v.begin(), v.end());
}

inline std::vector<double> dvec(std::span<const double> v) { return {v.begin(), v.end()}; }

[[noreturn]] inline void throw_degenerate(const std::string& what, std::span<const double> x, std::span<const double> y)
{
    throw DegenerateMetricError(what, dvec(x), dvec(y));
}

template <class S>
std::vector<double> primal_vec(std::span<const S> v)
{
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = primal(v[i]);
    }
    return out;
}

/// g_ij = 1/2 d^2 F^2 / dy^i dy^j over scalar S.
template <class M, class S>
SquareMatrix<S> fundamental(const M& m, std::span<const S> x, std::span<const S> y)
{
    const int n = static_cast<int>(y.size());
    using J = Jet<S, 2, 2>;
    using Idx = typename J::Layout::MultiIndex;
    static constexpr int k20 = J::Layout::rank(Idx{2, 0});
    static constexpr int k02 = J::Layout::rank(Idx{0, 2});
    static constexpr int k11 = J::Layout::rank(Idx{1, 1});

    SquareMatrix<S> g(n);
    std::vector<J> X(x.begin(), x.end());
    std::vector<J> Y(y.begin(), y.end());
    auto run = [&](int i, int j) {
        Y[i].coeff(1) = S(1.0);
        Y[j].coeff(2) = S(1.0);
        const J f = metric_squared<M, J>(m, X, Y);
        Y[i].coeff(1) = S(0.0);
        Y[j].coeff(2) = S(0.0);
        return f;
    };
    if (n == 1) {
        const J f = run(0, 0);
        g(0, 0) = f.coeff(k11) * 0.5;
        return g;
    }
    std::vector<bool> diag_done(n, false);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const J f = run(i, j);
            // Taylor coefficients: c20 = f_ii / 2, c11 = f_ij
            g(i, j) = f.coeff(k11) * 0.5;
            g(j, i) = g(i, j);
            if (!diag_done[i]) {
                g(i, i) = f.coeff(k20);
                diag_done[i] = true;
            }
            if (!diag_done[j]) {
                g(j, j) = f.coeff(k02);
                diag_done[j] = true;
            }
        }
    }
    return g;
}

/// Spray coefficients G^i = 1/4 g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}) over scalar S.
template <class M, class S>
std::vector<S> spray(const M& m, std::span<const S> x, std::span<const S> y)
{
    const int n = static_cast<int>(y.size());
    const SquareMatrix<S> g = fundamental<M, S>(m, x, y);

    using J = Jet<S, 3, 2>;
    using Idx = typename J::Layout::MultiIndex;
    static constexpr int kx = J::Layout::rank(Idx{1, 0, 0});
    static constexpr int kmix = J::Layout::rank(Idx{0, 1, 1});

    std::vector<S> rhs(n, S(0.0));
    std::vector<J> X(x.begin(), x.end());
    std::vector<J> Y(y.begin(), y.end());
    for (int i = 0; i < n; ++i) {
        X[i].coeff(2) = y[i]; // x moves along y
    }
    for (int l = 0; l < n; ++l) {
        X[l].coeff(1) = S(1.0);
        Y[l].coeff(3) = S(1.0);
        const J f = metric_squared<M, J>(m, X, Y);
        X[l].coeff(1) = S(0.0);
        Y[l].coeff(3) = S(0.0);
        rhs[l] = f.coeff(kmix) - f.coeff(kx);
    }
    if (!solve(g, rhs)) {
        throw_degenerate("spray: singular fundamental tensor", primal_vec<S>(x), primal_vec<S>(y));
    }
    for (auto& v : rhs) {
        v = v * 0.25;
    }
    return rhs;
}

/// Covariant mean Cartan torsion I_i = 1/2 g^{jk} dg_jk/dy^i over scalar S.
template <class M, class S>
std::vector<S> cartan(const M& m, std::span<const S> x, std::span<const S> y)
{
    const int n = static_cast<int>(y.size());
    const SquareMatrix<S> g = fundamental<M, S>(m, x, y);
    SquareMatrix<S> ginv;
    if (!inverse(g, ginv)) {
        throw_degenerate("mean_cartan: singular fundamental tensor", primal_vec<S>(x), primal_vec<S>(y));
    }
    using O = Jet<S, 1, 1>;
    std::vector<O> X(x.begin(), x.end());
    std::vector<O> Y(y.begin(), y.end());
    std::vector<S> I(n, S(0.0));
    for (int i = 0; i < n; ++i) {
        Y[i].coeff(1) = S(1.0);
        const SquareMatrix<O> gi = fundamental<M, O>(m, X, Y);
        Y[i].coeff(1) = S(0.0);
        S acc(0.0);
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                acc += ginv(j, k) * gi(j, k).coeff(1);
            }
        }
        I[i] = acc * 0.5;
    }
    return I;
}

} // namespace detail

/// Throws DomainError unless the sample is a valid point of TM minus the zero section.
inline void check_sample(const MetricField& metric, const TangentSample& at)
{
    const int n = metric.dimension();
    if (static_cast<int>(at.x.size()) != n || static_cast<int>(at.y.size()) != n) {
        throw DomainError("sample dimension does not match metric dimension " + std::to_string(n));
    }
    if (!metric.domain().contains(at.x)) {
        throw DomainError("base point outside the chart domain");
    }
    bool nonzero = false;
    for (double v : at.y) {
        if (!std::isfinite(v)) {
            throw DomainError("non-finite tangent vector");
        }
        nonzero = nonzero || v != 0.0;
    }
    if (!nonzero) {
        throw DomainError("tangent vector must be non-zero");
    }
}

inline double finsler_norm(const MetricField& metric, const TangentSample& at) { return metric(at.x, at.y); }

inline FundamentalTensor fundamental_tensor(const MetricField& metric, const TangentSample& at)
{
    check_sample(metric, at);
    FundamentalTensor out;
    out.at = at;
    out.g = metric.visit([&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        return detail::fundamental<M, double>(m, at.x, at.y);
    });
    Matrix l;
    if (!cholesky(out.g, l)) {
        detail::throw_degenerate("fundamental tensor is not positive definite", at.x, at.y);
    }
    if (!inverse(out.g, out.g_inverse)) {
        detail::throw_degenerate("fundamental tensor is singular", at.x, at.y);
    }
    return out;
}

inline Vec spray_coefficients(const MetricField& metric, std::span<const double> x, std::span<const double> y)
{
    return metric.visit([&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        return detail::spray<M, double>(m, x, y);
    });
}

inline SprayData spray(const MetricField& metric, const TangentSample& at)
{
    check_sample(metric, at);
    const int n = metric.dimension();
    SprayData out;
    out.at = at;
    out.N = Matrix(n);
    metric.visit([&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        out.G = detail::spray<M, double>(m, at.x, at.y);
        using S = Jet<double, 1, 1>;
        std::vector<S> X(at.x.begin(), at.x.end());
        std::vector<S> Y(at.y.begin(), at.y.end());
        for (int j = 0; j < n; ++j) {
            Y[j].coeff(1) = 1.0;
            const std::vector<S> Gj = detail::spray<M, S>(m, X, Y);
            Y[j].coeff(1) = 0.0;
            for (int i = 0; i < n; ++i) {
                out.N(i, j) = Gj[i].coeff(1);
            }
        }
    });
    return out;
}

/// Everything needed along a geodesic at one point: g, G, N and R together.
struct PointGeometry {
    FundamentalTensor g;
    SprayData spray;
    RiemannOperator riemann;
};

namespace detail {

// R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k - N^i_j N^j_k.
// Per column k one pass seeds: u0 = x along e_k, u1 = w = (x: -y, y: 2G),
// u2 = y along e_k, so that D_{u1} D_{u2} G collects the two mixed terms.
template <class M>
void riemann_columns(const M& m, const TangentSample& at, const Vec& G, Matrix& N, Matrix& R)
{
    const int n = static_cast<int>(at.x.size());
    using S = Jet<double, 3, 2>;
    using Idx = S::Layout::MultiIndex;
    static constexpr int kx = S::Layout::rank(Idx{1, 0, 0});
    static constexpr int ky = S::Layout::rank(Idx{0, 0, 1});
    static constexpr int kmix = S::Layout::rank(Idx{0, 1, 1});

    std::vector<S> X(at.x.begin(), at.x.end());
    std::vector<S> Y(at.y.begin(), at.y.end());
    for (int i = 0; i < n; ++i) {
        X[i].coeff(2) = -at.y[i];
        Y[i].coeff(2) = 2.0 * G[i];
    }
    Matrix dGdx(n);
    Matrix mixed(n);
    N = Matrix(n);
    for (int k = 0; k < n; ++k) {
        X[k].coeff(1) = 1.0;
        Y[k].coeff(3) = 1.0;
        const std::vector<S> Gk = spray<M, S>(m, X, Y);
        X[k].coeff(1) = 0.0;
        Y[k].coeff(3) = 0.0;
        for (int i = 0; i < n; ++i) {
            dGdx(i, k) = Gk[i].coeff(kx);
            N(i, k) = Gk[i].coeff(ky);
            mixed(i, k) = Gk[i].coeff(kmix);
        }
    }
    R = Matrix(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            double nn = 0.0;
            for (int j = 0; j < n; ++j) {
                nn += N(i, j) * N(j, k);
            }
            R(i, k) = 2.0 * dGdx(i, k) + mixed(i, k) - nn;
        }
    }
}

} // namespace detail

inline PointGeometry point_geometry(const MetricField& metric, const TangentSample& at)
{
    PointGeometry out;
    out.g = fundamental_tensor(metric, at);
    out.spray.at = at;
    out.riemann.at = at;
    metric.visit([&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        out.spray.G = detail::spray<M, double>(m, at.x, at.y);
        detail::riemann_columns(m, at, out.spray.G, out.spray.N, out.riemann.R);
    });
    const int n = metric.dimension();
    out.riemann.R_lowered = Matrix(n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                s += out.g.g(j, i) * out.riemann.R(i, k);
            }
            out.riemann.R_lowered(j, k) = s;
        }
    }
    return out;
}

inline RiemannOperator riemann(const MetricField& metric, const TangentSample& at)
{
    return point_geometry(metric, at).riemann;
}

/// Flag curvature K(P, y) for P = span{y, u}.
inline double flag_curvature(const FundamentalTensor& g, const RiemannOperator& r, const Vec& u,
                             double degenerate_threshold = 1e-10)
{
    const Vec& y = g.at.y;
    const double gyy = g.inner(y, y);
    const double guu = g.inner(u, u);
    const double gyu = g.inner(y, u);
    const double gram = gyy * guu - gyu * gyu;
    if (!(gram > degenerate_threshold * gyy * guu)) {
        throw DegenerateFlagError("flag pole u is (nearly) parallel to y");
    }
    return bilinear(r.R_lowered, u, u) / gram;
}

inline double flag_curvature(const MetricField& metric, const TangentSample& at, const Vec& u,
                             double degenerate_threshold = 1e-10)
{
    if (static_cast<int>(u.size()) != metric.dimension()) {
        throw DomainError("flag pole has wrong dimension");
    }
    const PointGeometry pg = point_geometry(metric, at);
    return flag_curvature(pg.g, pg.riemann, u, degenerate_threshold);
}

inline TorsionVector raise(const FundamentalTensor& g, Vec covariant)
{
    TorsionVector t;
    t.contravariant = matvec(g.g_inverse, covariant);
    t.covariant = std::move(covariant);
    t.at = g.at;
    return t;
}

inline Vec mean_cartan_covariant(const MetricField& metric, std::span<const double> x, std::span<const double> y)
{
    return metric.visit([&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        return detail::cartan<M, double>(m, x, y);
    });
}

inline TorsionVector mean_cartan(const MetricField& metric, const TangentSample& at)
{
    const FundamentalTensor g = fundamental_tensor(metric, at);
    return raise(g, mean_cartan_covariant(metric, at.x, at.y));
}

/// J_i = y^m dI_i/dx^m - 2 G^j dI_i/dy^j - I_k N^k_i.
inline TorsionVector mean_landsberg(const MetricField& metric, const TangentSample& at, const SprayData& sp,
                                    const FundamentalTensor& g)
{
    const int n = metric.dimension();
    Vec J(n, 0.0);
    metric.visit([&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        using S = Jet<double, 1, 1>;
        std::vector<S> X(at.x.begin(), at.x.end());
        std::vector<S> Y(at.y.begin(), at.y.end());
        for (int i = 0; i < n; ++i) {
            X[i].coeff(1) = at.y[i];
            Y[i].coeff(1) = -2.0 * sp.G[i];
        }
        const std::vector<S> Iw = detail::cartan<M, S>(m, X, Y);
        for (int i = 0; i < n; ++i) {
            double s = Iw[i].coeff(1);
            for (int k = 0; k < n; ++k) {
                s -= Iw[k].value() * sp.N(k, i);
            }
            J[i] = s;
        }
    });
    return raise(g, std::move(J));
}

inline TorsionVector mean_landsberg(const MetricField& metric, const TangentSample& at)
{
    const FundamentalTensor g = fundamental_tensor(metric, at);
    const SprayData sp = spray(metric, at);
    return mean_landsberg(metric, at, sp, g);
}

/// sqrt(g_y(v, v)) for a contravariant v.
inline double g_norm(const FundamentalTensor& g, const Vec& v) { return std::sqrt(std::max(0.0, g.inner(v, v))); }

/// Third y-derivatives of the spray, T[i][j][k][l] flattened; used by the Berwald check.
inline std::vector<double> spray_third_derivatives(const MetricField& metric, const TangentSample& at)
{
    check_sample(metric, at);
    const int n = metric.dimension();
    std::vector<double> out(static_cast<std::size_t>(n) * n * n * n, 0.0);
    metric.visit([&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        using S = Jet<double, 3, 3>;
        using Idx = S::Layout::MultiIndex;
        static constexpr int k111 = S::Layout::rank(Idx{1, 1, 1});
        std::vector<S> X(at.x.begin(), at.x.end());
        std::vector<S> Y(at.y.begin(), at.y.end());
        for (int j = 0; j < n; ++j) {
            for (int k = j; k < n; ++k) {
                for (int l = k; l < n; ++l) {
                    Y[j].coeff(1) += 1.0;
                    Y[k].coeff(2) += 1.0;
                    Y[l].coeff(3) += 1.0;
                    const std::vector<S> Gd = detail::spray<M, S>(m, X, Y);
                    Y[j].coeff(1) = 0.0;
                    Y[k].coeff(2) = 0.0;
                    Y[l].coeff(3) = 0.0;
                    const int perm[6][3] = {{j, k, l}, {j, l, k}, {k, j, l}, {k, l, j}, {l, j, k}, {l, k, j}};
                    for (int i = 0; i < n; ++i) {
                        const double v = Gd[i].coeff(k111);
                        for (const auto& p : perm) {
                            out[((static_cast<std::size_t>(i) * n + p[0]) * n + p[1]) * n + p[2]] = v;
                        }
                    }
                }
            }
        }
    });
    return out;
}

} // namespace finsler
