#pragma once

// Busemann-Hausdorff volume density, distortion, S-curvature and the norm of
// the mean Cartan torsion.
//
// With r(theta) = 1 / F(x, theta) on the Euclidean unit sphere,
//
//     Vol{F < 1}      = (1/n) \oint F^{-n} dOmega
//     sigma_F         = Vol(B^n) / Vol{F < 1}
//     d_m ln sigma_F  = \oint F_{x^m} F^{-(n+1)} dOmega / ((1/n) \oint F^{-n} dOmega)
//
// The x-derivative of F inside the integral is taken with a first-order jet.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/geometry.hpp"
#include "finsler/quadrature.hpp"

namespace finsler {

struct QuadratureOptions {
    // relative tolerance on |fine - coarse| for the deterministic rules
    double rel_tol = 1e-7;
    // relative tolerance on the standard error of the QMC rule (n >= 4)
    double qmc_rel_tol = 1e-3;
};

struct VolumeEstimate {
    double sigma = 0.0;
    double error = 0.0; // absolute error estimate on sigma
};

namespace detail {

// Linear frame L with the indicatrix {F(x, L z) < 1} roughly round, found from
// the second moment of {F < 1} on the coarse rule. The volume integrals are
// equivariant under y = L z, so the frame only improves conditioning.
template <class Model>
Matrix adapted_frame(const Model& model, const Vec& x, int n)
{
    const SphereRule& rule = sphere_rule(n, 1);
    Matrix L = Matrix::identity(n);
    Vec y(n);
    for (int pass = 0; pass < 2; ++pass) {
        Matrix M(n);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Vec& z = rule.nodes[q];
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) {
                    s += L(i, k) * z[k];
                }
                y[i] = s;
            }
            const double w = rule.weights[q] * std::pow(model(std::span<const double>(x), std::span<const double>(y)),
                                                        -(n + 2));
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < n; ++k) {
                    M(i, k) += w * z[i] * z[k];
                }
            }
        }
        const double tr = [&] {
            double t = 0.0;
            for (int i = 0; i < n; ++i) {
                t += M(i, i);
            }
            return t / n;
        }();
        for (double& v : M.a) {
            v /= tr;
        }
        Matrix C;
        if (!std::isfinite(tr) || !cholesky(M, C)) {
            break;
        }
        L = matmul(L, C);
    }
    return L;
}

// I0 = (1/n) \oint F^{-n}; I1 = \oint (dir . d_x F) F^{-(n+1)} when dir is given.
inline std::vector<QuadratureEstimate> volume_integrals(const MetricField& metric, const Vec& x, const Vec* dir,
                                                        int level = 0)
{
    const int n = metric.dimension();
    const int m = dir ? 2 : 1;
    return metric.visit([&](const auto& model) {
        using S = Jet<double, 1, 1>;
        const Matrix L = adapted_frame(model, x, n);
        const double jac = std::abs(determinant(L));
        Vec y(n);
        auto out = integrate_sphere(n, m, [&](const Vec& z, std::vector<double>& out) {
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int k = 0; k < n; ++k) {
                    s += L(i, k) * z[k];
                }
                y[i] = s;
            }
            if (dir) {
                std::vector<S> X(x.begin(), x.end());
                std::vector<S> Y(y.begin(), y.end());
                for (int i = 0; i < n; ++i) {
                    X[i].coeff(1) = (*dir)[i];
                }
                const S f = model(std::span<const S>(X), std::span<const S>(Y));
                const double fv = f.value();
                const double fn = std::pow(fv, -n);
                out[0] = fn / n;
                out[1] = f.coeff(1) * fn / fv;
            } else {
                const double fv = model(std::span<const double>(x), std::span<const double>(y));
                out[0] = std::pow(fv, -n) / n;
            }
        }, level);
        for (auto& e : out) {
            e.value *= jac;
            e.error *= jac;
        }
        return out;
    });
}

// deterministic rules refine twice before giving up; QMC has a single level
inline int finest_level(int n) { return n >= 4 ? 0 : -2; }

inline double allowed(int n, const QuadratureOptions& opt) { return n >= 4 ? opt.qmc_rel_tol : opt.rel_tol; }

inline void check_volume_point(const MetricField& metric, const Vec& x)
{
    if (static_cast<int>(x.size()) != metric.dimension()) {
        throw DomainError("base point has wrong dimension");
    }
    if (!metric.domain().contains(x)) {
        throw DomainError("base point outside the chart domain");
    }
}

} // namespace detail

inline VolumeEstimate volume_density_estimate(const MetricField& metric, const Vec& x, const QuadratureOptions& opt = {})
{
    detail::check_volume_point(metric, x);
    const int n = metric.dimension();
    const double vb = unit_ball_volume(n);
    VolumeEstimate out;
    bool good = false;
    std::vector<QuadratureEstimate> q;
    for (int level = 0; level >= detail::finest_level(n) && !good; --level) {
        q = detail::volume_integrals(metric, x, nullptr, level);
        out.sigma = vb / q[0].value;
        out.error = out.sigma * q[0].error / q[0].value;
        good = std::isfinite(out.sigma) && q[0].error <= detail::allowed(n, opt) * std::abs(q[0].value);
    }
    if (!good) {
        throw QuadratureError("volume density quadrature did not converge (relative error " +
                                  std::to_string(q[0].error / std::abs(q[0].value)) + ")",
                              out.sigma);
    }
    return out;
}

inline double volume_density(const MetricField& metric, const Vec& x, const QuadratureOptions& opt = {})
{
    return volume_density_estimate(metric, x, opt).sigma;
}

/// Directional derivative dir . d_x ln sigma_F(x), differentiated through the quadrature.
inline double log_density_derivative(const MetricField& metric, const Vec& x, const Vec& dir,
                                     const QuadratureOptions& opt = {})
{
    detail::check_volume_point(metric, x);
    const int n = metric.dimension();
    double ratio = 0.0;
    bool good = false;
    for (int level = 0; level >= detail::finest_level(n) && !good; --level) {
        const auto q = detail::volume_integrals(metric, x, &dir, level);
        ratio = q[1].value / q[0].value;
        // error propagation for the quotient; the scale keeps exactly-zero targets meaningful
        const double err = q[1].error / q[0].value + std::abs(ratio) * q[0].error / q[0].value;
        const double scale = std::abs(ratio) + std::max(norm2(dir), 1e-300);
        good = std::isfinite(ratio) && err <= detail::allowed(n, opt) * scale &&
               q[0].error <= detail::allowed(n, opt) * std::abs(q[0].value);
    }
    if (!good) {
        throw QuadratureError("log-density derivative quadrature did not converge", ratio);
    }
    return ratio;
}

inline Vec log_density_gradient(const MetricField& metric, const Vec& x, const QuadratureOptions& opt = {})
{
    const int n = metric.dimension();
    Vec grad(n);
    for (int m = 0; m < n; ++m) {
        Vec e(n, 0.0);
        e[m] = 1.0;
        grad[m] = log_density_derivative(metric, x, e, opt);
    }
    return grad;
}

inline double distortion(const MetricField& metric, const TangentSample& at, const QuadratureOptions& opt = {})
{
    const FundamentalTensor g = fundamental_tensor(metric, at);
    const double sigma = volume_density(metric, at.x, opt);
    return std::log(std::sqrt(determinant(g.g)) / sigma);
}

/// S = dG^m/dy^m - y^m d_m ln sigma_F.
inline double s_curvature(const MetricField& metric, const TangentSample& at, const SprayData& sp,
                          const QuadratureOptions& opt = {})
{
    double trace = 0.0;
    for (int i = 0; i < sp.N.n; ++i) {
        trace += sp.N(i, i);
    }
    return trace - log_density_derivative(metric, at.x, at.y, opt);
}

inline double s_curvature(const MetricField& metric, const TangentSample& at, const QuadratureOptions& opt = {})
{
    return s_curvature(metric, at, spray(metric, at), opt);
}

/// sqrt(I_i g^{ij} I_j) at (x, y).
inline double cartan_magnitude(const MetricField& metric, const TangentSample& at)
{
    const TorsionVector I = mean_cartan(metric, at);
    return std::sqrt(std::max(0.0, dot(I.covariant, I.contravariant)));
}

struct CartanNorm {
    double value = 0.0;
    Vec direction; // maximizer on the indicatrix, F(x, direction) = 1
};

namespace detail {

inline std::vector<Vec> coarse_directions(int n)
{
    std::vector<Vec> dirs;
    if (n == 2) {
        const int m = 72;
        for (int k = 0; k < m; ++k) {
            const double a = 2.0 * std::numbers::pi * k / m;
            dirs.push_back({std::cos(a), std::sin(a)});
        }
        return dirs;
    }
    if (n == 3) {
        // Fibonacci lattice
        const int m = 240;
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < m; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / m;
            const double r = std::sqrt(1.0 - z * z);
            dirs.push_back({r * std::cos(golden * k), r * std::sin(golden * k), z});
        }
        return dirs;
    }
    std::mt19937_64 rng(0xca27a0ULL + static_cast<unsigned>(n));
    std::normal_distribution<double> normal;
    for (int k = 0; k < 64 * n; ++k) {
        Vec v(n);
        for (double& e : v) {
            e = normal(rng);
        }
        const double r = norm2(v);
        for (double& e : v) {
            e /= r;
        }
        dirs.push_back(std::move(v));
    }
    return dirs;
}

} // namespace detail

/// sup over the indicatrix of sqrt(I_i g^{ij} I_j): coarse sampling, then
/// coordinate pattern search on the Euclidean sphere.
inline CartanNorm cartan_norm(const MetricField& metric, const Vec& x)
{
    detail::check_volume_point(metric, x);
    const int n = metric.dimension();
    // I is homogeneous of degree -1, so evaluate on the indicatrix.
    auto value_at = [&](const Vec& theta) {
        const double f = metric(x, theta);
        Vec y = theta;
        for (double& v : y) {
            v /= f;
        }
        return cartan_magnitude(metric, TangentSample{x, y});
    };
    Vec best_dir;
    double best = -1.0;
    for (const Vec& d : detail::coarse_directions(n)) {
        const double v = value_at(d);
        if (v > best) {
            best = v;
            best_dir = d;
        }
    }
    double step = n == 2 ? 0.05 : 0.1;
    while (step > 1e-7) {
        bool improved = false;
        for (int k = 0; k < n && !improved; ++k) {
            for (double sgn : {1.0, -1.0}) {
                Vec trial = best_dir;
                trial[k] += sgn * step;
                const double r = norm2(trial);
                for (double& v : trial) {
                    v /= r;
                }
                const double v = value_at(trial);
                if (v > best) {
                    best = v;
                    best_dir = trial;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            step *= 0.5;
        }
    }
    CartanNorm out;
    out.value = best;
    const double f = metric(x, best_dir);
    out.direction = best_dir;
    for (double& v : out.direction) {
        v /= f;
    }
    return out;
}

} // namespace finsler
