#pragma once

// Quadrature on the unit sphere S^{n-1}.
//
//   n = 2   periodic trapezoid, 512 nodes
//   n = 3   Gauss-Legendre in cos(theta) x trapezoid in phi, 64 x 128 nodes
//   n >= 4  randomized quasi-Monte Carlo, 16 shifted Halton batches of 4096 points
//
// Rules are built once per (n, level) and shared read-only.

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

struct SphereRule {
    int dimension = 0;
    std::vector<Vec> nodes;
    std::vector<double> weights;
    // QMC rules are split into independent batches for a standard error
    int batches = 1;
};

inline double unit_ball_volume(int n)
{
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

inline double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

/// Gauss-Legendre nodes and weights on [-1, 1].
inline void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights)
{
    nodes.assign(m, 0.0);
    weights.assign(m, 0.0);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = z;
            for (int k = 2; k <= m; ++k) {
                const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = m * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= m; ++k) {
            const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = m * (z * p1 - p0) / (z * z - 1.0);
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        weights[i] = weights[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

/// Inverse standard normal CDF (Acklam's rational approximation, one Newton polish).
inline double inverse_normal_cdf(double p)
{
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

inline double radical_inverse(unsigned long long i, unsigned base)
{
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

namespace detail {

inline SphereRule build_sphere_rule(int n, int level)
{
    SphereRule rule;
    rule.dimension = n;
    const double two_pi = 2.0 * std::numbers::pi;
    // level 0 is the standard rule, level 1 halves it, level -k doubles it k times
    const double scale = std::ldexp(1.0, -level);
    if (n == 2) {
        const int m = static_cast<int>(512 * scale);
        for (int k = 0; k < m; ++k) {
            const double a = two_pi * k / m;
            rule.nodes.push_back({std::cos(a), std::sin(a)});
            rule.weights.push_back(two_pi / m);
        }
    } else if (n == 3) {
        const int mt = static_cast<int>(64 * scale);
        const int mp = static_cast<int>(128 * scale);
        std::vector<double> z;
        std::vector<double> w;
        gauss_legendre(mt, z, w);
        for (int i = 0; i < mt; ++i) {
            const double r = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
            for (int k = 0; k < mp; ++k) {
                const double a = two_pi * (k + 0.5) / mp;
                rule.nodes.push_back({r * std::cos(a), r * std::sin(a), z[i]});
                rule.weights.push_back(w[i] * two_pi / mp);
            }
        }
    } else {
        static constexpr unsigned primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
        if (n > 16) {
            throw InvalidParameterError("quadrature supports dimension <= 16");
        }
        const int batches = 16;
        const int per_batch = level == 0 ? 4096 : 1024;
        rule.batches = batches;
        std::mt19937_64 rng(0x5eed0000ULL + static_cast<unsigned>(n));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double w = unit_sphere_area(n) / (static_cast<double>(batches) * per_batch);
        for (int b = 0; b < batches; ++b) {
            Vec shift(n);
            for (double& s : shift) {
                s = unif(rng);
            }
            for (int i = 1; i <= per_batch; ++i) {
                Vec p(n);
                double r2 = 0.0;
                for (int d = 0; d < n; ++d) {
                    double u = radical_inverse(static_cast<unsigned long long>(i), primes[d]) + shift[d];
                    u -= std::floor(u);
                    u = std::min(std::max(u, 1e-15), 1.0 - 1e-15);
                    p[d] = inverse_normal_cdf(u);
                    r2 += p[d] * p[d];
                }
                const double r = std::sqrt(r2);
                for (double& v : p) {
                    v /= r;
                }
                rule.nodes.push_back(std::move(p));
                rule.weights.push_back(w);
            }
        }
    }
    return rule;
}

} // namespace detail

/// Shared rule for S^{n-1}; level + 1 is the coarser companion used for error estimates.
inline const SphereRule& sphere_rule(int n, int level = 0)
{
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<SphereRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{n, level}];
    if (!slot) {
        if (n < 2) {
            throw InvalidParameterError("sphere quadrature needs dimension >= 2");
        }
        slot = std::make_unique<SphereRule>(detail::build_sphere_rule(n, level));
    }
    return *slot;
}

struct QuadratureEstimate {
    double value = 0.0;
    double error = 0.0; // |fine - coarse| or QMC standard error
};

/// Integrate several functions of the node at once: f(node, out) fills out[0..m).
/// `level` < 0 selects a refined deterministic rule (n = 2, 3); QMC ignores it.
template <class Fn>
std::vector<QuadratureEstimate> integrate_sphere(int n, int m, Fn&& f, int level = 0)
{
    std::vector<QuadratureEstimate> out(m);
    if (n > 3) {
        level = 0;
    }
    const SphereRule& fine = sphere_rule(n, level);
    std::vector<double> vals(m);
    if (fine.batches > 1) {
        const std::size_t per = fine.nodes.size() / fine.batches;
        std::vector<std::vector<double>> batch_sums(m, std::vector<double>(fine.batches, 0.0));
        for (std::size_t i = 0; i < fine.nodes.size(); ++i) {
            f(fine.nodes[i], vals);
            for (int k = 0; k < m; ++k) {
                batch_sums[k][i / per] += fine.weights[i] * vals[k] * fine.batches;
            }
        }
        for (int k = 0; k < m; ++k) {
            double mean = 0.0;
            for (double v : batch_sums[k]) {
                mean += v;
            }
            mean /= fine.batches;
            double var = 0.0;
            for (double v : batch_sums[k]) {
                var += (v - mean) * (v - mean);
            }
            var /= (fine.batches - 1);
            out[k].value = mean;
            out[k].error = std::sqrt(var / fine.batches);
        }
        return out;
    }
    const SphereRule& coarse = sphere_rule(n, level + 1);
    std::vector<double> coarse_sum(m, 0.0);
    for (std::size_t i = 0; i < fine.nodes.size(); ++i) {
        f(fine.nodes[i], vals);
        for (int k = 0; k < m; ++k) {
            out[k].value += fine.weights[i] * vals[k];
        }
    }
    for (std::size_t i = 0; i < coarse.nodes.size(); ++i) {
        f(coarse.nodes[i], vals);
        for (int k = 0; k < m; ++k) {
            coarse_sum[k] += coarse.weights[i] * vals[k];
        }
    }
    for (int k = 0; k < m; ++k) {
        out[k].error = std::abs(out[k].value - coarse_sum[k]);
    }
    return out;
}

} // namespace finsler
