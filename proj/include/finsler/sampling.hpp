#pragma once

#include <cmath>
#include <random>

#include "finsler/errors.hpp"
#include "finsler/linalg.hpp"
#include "finsler/metric.hpp"

namespace finsler {

using Rng = std::mt19937_64;

/// Uniform direction on the Euclidean unit sphere.
inline Vec random_direction(int n, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        Vec v(n);
        for (double& e : v) {
            e = normal(rng);
        }
        const double r = norm2(v);
        if (r > 1e-8) {
            for (double& e : v) {
                e /= r;
            }
            return v;
        }
    }
}

/// Uniform point of the domain shrunk by `margin`, by rejection from the bounding box.
inline Vec random_point(const Domain& domain, double margin, Rng& rng)
{
    const int n = domain.dimension();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        Vec x(n);
        for (int i = 0; i < n; ++i) {
            const double lo = domain.lower[i] * (1.0 - margin);
            const double hi = domain.upper[i] * (1.0 - margin);
            x[i] = lo + (hi - lo) * unif(rng);
        }
        if (domain.contains(x) && domain.contains_shrunk(x, margin)) {
            return x;
        }
    }
    throw SamplingError("could not draw a point inside the chart domain");
}

} // namespace finsler
