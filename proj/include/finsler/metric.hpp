#pragma once

// Metric models. Every model is a small immutable value type exposing
//
//     template <class T> T operator()(std::span<const T> x, std::span<const T> y) const
//
// which evaluates F(x, y) over doubles or jets. Models with a natural
// quadratic structure additionally expose `squared` so that F^2 is evaluated
// without a square root round trip.

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

/// Chart domain: membership predicate, bounding box and an interior anchor
/// towards which the domain is shrunk when sampling with a margin.
struct Domain {
    std::function<bool(std::span<const double>)> contains_fn;
    Vec lower;
    Vec upper;

    bool contains(std::span<const double> x) const { return contains_fn(x); }

    /// Membership in the domain shrunk towards the origin by `margin` (a fraction).
    bool contains_shrunk(std::span<const double> x, double margin) const
    {
        Vec scaled(x.begin(), x.end());
        for (double& v : scaled) {
            v /= (1.0 - margin);
        }
        return contains_fn(scaled);
    }

    int dimension() const { return static_cast<int>(lower.size()); }
};

inline Domain box_domain(int n, double half_width)
{
    Domain d;
    d.lower.assign(n, -half_width);
    d.upper.assign(n, half_width);
    d.contains_fn = [](std::span<const double>) { return true; };
    return d;
}

inline Domain ball_domain(int n, double radius)
{
    Domain d;
    d.lower.assign(n, -radius);
    d.upper.assign(n, radius);
    d.contains_fn = [radius](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) {
            s += v * v;
        }
        return s < radius * radius;
    };
    return d;
}

inline Domain product_domain(const Domain& a, const Domain& b)
{
    Domain d;
    d.lower = a.lower;
    d.lower.insert(d.lower.end(), b.lower.begin(), b.lower.end());
    d.upper = a.upper;
    d.upper.insert(d.upper.end(), b.upper.begin(), b.upper.end());
    const int na = a.dimension();
    d.contains_fn = [a, b, na](std::span<const double> x) {
        return a.contains(x.subspan(0, na)) && b.contains(x.subspan(na));
    };
    return d;
}

template <class T>
T squared_norm(std::span<const T> v)
{
    T s(0.0);
    for (const auto& e : v) {
        s += e * e;
    }
    return s;
}

/// Riemannian model a_ij(x) on a chart: flat, the unit sphere in
/// stereographic coordinates, the Poincare ball, or a constant matrix.
struct RiemannianModel {
    enum class Kind { flat, sphere, hyperbolic_disk, custom };

    Kind kind = Kind::flat;
    int dim = 2;
    Matrix matrix; // custom only

    // conformal factor 4/(1 +- |x|^2)^2 for the space forms, 1 for flat
    template <class T>
    T conformal(std::span<const T> x) const
    {
        switch (kind) {
        case Kind::sphere: {
            const T d = T(1.0) + squared_norm(x);
            return T(4.0) / (d * d);
        }
        case Kind::hyperbolic_disk: {
            const T d = T(1.0) - squared_norm(x);
            return T(4.0) / (d * d);
        }
        default:
            return T(1.0);
        }
    }

    template <class T>
    T quadratic(std::span<const T> x, std::span<const T> y) const
    {
        if (kind == Kind::custom) {
            T s(0.0);
            for (int i = 0; i < dim; ++i) {
                for (int j = 0; j < dim; ++j) {
                    s += y[i] * (matrix(i, j) * y[j]);
                }
            }
            return s;
        }
        return conformal(x) * squared_norm(y);
    }

    Matrix matrix_at(std::span<const double> x) const
    {
        if (kind == Kind::custom) {
            return matrix;
        }
        Matrix m = Matrix::identity(dim);
        const double c = conformal(x);
        for (double& v : m.a) {
            v *= c;
        }
        return m;
    }

    Domain domain() const
    {
        switch (kind) {
        case Kind::hyperbolic_disk:
            return ball_domain(dim, 1.0);
        case Kind::sphere:
            return box_domain(dim, 2.0);
        default:
            return box_domain(dim, 1.0);
        }
    }

    void validate() const
    {
        if (dim < 1) {
            throw InvalidParameterError("riemannian factor dimension must be >= 1");
        }
        if (kind == Kind::custom) {
            if (matrix.n != dim) {
                throw InvalidParameterError("custom matrix has wrong size");
            }
            for (int i = 0; i < dim; ++i) {
                for (int j = 0; j < dim; ++j) {
                    if (std::abs(matrix(i, j) - matrix(j, i)) > 1e-12 * (1.0 + std::abs(matrix(i, j)))) {
                        throw InvalidParameterError("custom matrix is not symmetric");
                    }
                }
            }
            if (!is_positive_definite(matrix)) {
                throw InvalidParameterError("custom matrix is not positive definite");
            }
        }
    }
};

inline const char* to_string(RiemannianModel::Kind k)
{
    switch (k) {
    case RiemannianModel::Kind::flat:
        return "flat";
    case RiemannianModel::Kind::sphere:
        return "sphere";
    case RiemannianModel::Kind::hyperbolic_disk:
        return "hyperbolic_disk";
    case RiemannianModel::Kind::custom:
        return "custom";
    }
    return "?";
}

/// Minkowski norm sqrt(y^T A y) + b.y (Euclidean when A = I, b = 0).
struct MinkowskiNorm {
    Matrix A;
    Vec b;

    static MinkowskiNorm euclidean(int n) { return MinkowskiNorm{Matrix::identity(n), Vec(n, 0.0)}; }

    bool is_euclidean() const
    {
        for (int i = 0; i < A.n; ++i) {
            for (int j = 0; j < A.n; ++j) {
                if (A(i, j) != (i == j ? 1.0 : 0.0)) {
                    return false;
                }
            }
            if (b[i] != 0.0) {
                return false;
            }
        }
        return true;
    }

    template <class T>
    T operator()(std::span<const T> y) const
    {
        using std::sqrt;
        const int n = A.n;
        T q(0.0);
        T lin(0.0);
        for (int i = 0; i < n; ++i) {
            T row(0.0);
            for (int j = 0; j < n; ++j) {
                row += A(i, j) * y[j];
            }
            q += y[i] * row;
            lin += b[i] * y[i];
        }
        return sqrt(q) + lin;
    }

    /// sqrt(b^T A^{-1} b), which must stay below one.
    double dual_norm_b() const
    {
        Vec w = b;
        if (!solve(A, w)) {
            throw InvalidParameterError("norm matrix is singular");
        }
        return std::sqrt(std::max(0.0, dot(b, w)));
    }

    void validate(int n) const
    {
        if (A.n != n || static_cast<int>(b.size()) != n) {
            throw InvalidParameterError("Minkowski norm has wrong dimension");
        }
        if (!is_positive_definite(A)) {
            throw InvalidParameterError("Minkowski norm matrix is not positive definite");
        }
        if (dual_norm_b() >= 1.0) {
            throw InvalidParameterError("Minkowski norm requires ||b|| < 1");
        }
    }
};

struct EuclideanMetric {
    int n = 2;

    template <class T>
    T squared(std::span<const T>, std::span<const T> y) const
    {
        return squared_norm(y);
    }
    template <class T>
    T operator()(std::span<const T> x, std::span<const T> y) const
    {
        using std::sqrt;
        return sqrt(squared(x, y));
    }
};

/// x-independent norm.
struct MinkowskiMetric {
    MinkowskiNorm norm;

    template <class T>
    T operator()(std::span<const T>, std::span<const T> y) const
    {
        return norm(y);
    }
};

struct RiemannianMetric {
    RiemannianModel model;

    template <class T>
    T squared(std::span<const T> x, std::span<const T> y) const
    {
        return model.quadratic(x, y);
    }
    template <class T>
    T operator()(std::span<const T> x, std::span<const T> y) const
    {
        using std::sqrt;
        return sqrt(squared(x, y));
    }
};

/// F = alpha + beta with beta = (b0 + B x) . y.
struct RandersMetric {
    RiemannianModel alpha;
    Vec b0;
    Matrix B; // empty (n = 0) means constant b

    template <class T>
    T beta(std::span<const T> x, std::span<const T> y) const
    {
        T s(0.0);
        const int n = alpha.dim;
        for (int i = 0; i < n; ++i) {
            T bi(b0[i]);
            if (B.n == n) {
                for (int j = 0; j < n; ++j) {
                    bi += B(i, j) * x[j];
                }
            }
            s += bi * y[i];
        }
        return s;
    }

    template <class T>
    T operator()(std::span<const T> x, std::span<const T> y) const
    {
        using std::sqrt;
        return sqrt(alpha.quadratic(x, y)) + beta(x, y);
    }

    Vec b_at(std::span<const double> x) const
    {
        const int n = alpha.dim;
        Vec b = b0;
        if (B.n == n) {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    b[i] += B(i, j) * x[j];
                }
            }
        }
        return b;
    }

    /// ||beta||_x = sqrt(a^{ij} b_i b_j)
    double beta_norm(std::span<const double> x) const
    {
        const Matrix a = alpha.matrix_at(x);
        const Vec b = b_at(x);
        Vec w = b;
        solve(a, w);
        return std::sqrt(std::max(0.0, dot(b, w)));
    }
};

/// Funk metric of the unit ball plus the exact term <a,y>/(1+<a,x>), in closed form.
struct FunkShiftedMetric {
    Vec a;

    template <class T>
    T funk(std::span<const T> x, std::span<const T> y) const
    {
        using std::sqrt;
        const T xx = squared_norm(x);
        const T yy = squared_norm(y);
        const T xy = dot(x, y);
        const T lam = T(1.0) - xx;
        return (sqrt(yy - (xx * yy - xy * xy)) + xy) / lam;
    }

    template <class T>
    T shift(std::span<const T> x, std::span<const T> y) const
    {
        T ay(0.0);
        T ax(0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            ay += a[i] * y[i];
            ax += a[i] * x[i];
        }
        return ay / (T(1.0) + ax);
    }

    template <class T>
    T operator()(std::span<const T> x, std::span<const T> y) const
    {
        return funk(x, y) + shift(x, y);
    }
};

/// Funk metric of the unit phi-ball, defined implicitly by Theta = phi(y + Theta x),
/// plus the exact term <a,y>/(1+<a,x>).
struct FunkImplicitMetric {
    MinkowskiNorm phi;
    Vec a;

    /// Solve theta = phi(y + theta x) on doubles: safeguarded Newton with bisection.
    double solve_value(std::span<const double> x, std::span<const double> y) const
    {
        const int n = static_cast<int>(x.size());
        const double phi_y = phi(y);
        const double phi_x = phi(x);
        if (!(phi_x < 1.0)) {
            throw DomainError("funk_implicit: base point outside the unit phi-ball");
        }
        if (phi_y == 0.0) {
            return 0.0;
        }
        auto h = [&](double theta, double* dh) {
            using J = Jet<double, 1, 1>;
            std::vector<J> z(n);
            for (int i = 0; i < n; ++i) {
                z[i] = J(y[i] + theta * x[i]);
                z[i].coeff(1) = x[i];
            }
            const J p = phi(std::span<const J>(z));
            *dh = 1.0 - p.coeff(1);
            return theta - p.value();
        };
        double lo = 0.0;
        double hi = phi_y / (1.0 - phi_x);
        double dh = 0.0;
        if (h(hi, &dh) < 0.0) {
            hi *= 2.0;
        }
        double theta = phi_y;
        if (!(theta > lo && theta < hi)) {
            theta = 0.5 * (lo + hi);
        }
        for (int it = 0; it < 200; ++it) {
            const double r = h(theta, &dh);
            if (std::abs(r) <= 1e-15 * std::max(1.0, std::abs(theta))) {
                return theta;
            }
            if (r < 0.0) {
                lo = theta;
            } else {
                hi = theta;
            }
            double next = theta - r / dh;
            if (!(dh > 0.0) || !(next > lo && next < hi)) {
                next = 0.5 * (lo + hi);
            }
            if (std::abs(next - theta) <= 1e-16 * std::max(1.0, std::abs(theta))) {
                return next;
            }
            theta = next;
        }
        const double r = h(theta, &dh);
        if (std::abs(r) <= 1e-12 * std::max(1.0, std::abs(theta))) {
            return theta;
        }
        throw ImplicitSolveError("funk_implicit: Newton/bisection failed to converge");
    }

    template <class T>
    T theta(std::span<const T> x, std::span<const T> y) const
    {
        const int n = static_cast<int>(x.size());
        if constexpr (std::is_same_v<T, double>) {
            return solve_value(x, y);
        } else {
            Vec xv(n);
            Vec yv(n);
            for (int i = 0; i < n; ++i) {
                xv[i] = primal(x[i]);
                yv[i] = primal(y[i]);
            }
            const double t0 = solve_value(xv, yv);
            double slope;
            {
                using J = Jet<double, 1, 1>;
                std::vector<J> z(n);
                for (int i = 0; i < n; ++i) {
                    z[i] = J(yv[i] + t0 * xv[i]);
                    z[i].coeff(1) = xv[i];
                }
                slope = 1.0 - phi(std::span<const J>(z)).coeff(1);
            }
            // Chord iteration lifts the solution one order per step.
            T th(t0);
            std::vector<T> z(n);
            for (int it = 0; it <= total_order_v<T>; ++it) {
                for (int i = 0; i < n; ++i) {
                    z[i] = y[i] + th * x[i];
                }
                const T r = th - phi(std::span<const T>(z));
                th = th - r * (1.0 / slope);
            }
            return th;
        }
    }

    template <class T>
    T operator()(std::span<const T> x, std::span<const T> y) const
    {
        T out = theta(x, y);
        if (!a.empty()) {
            T ay(0.0);
            T ax(0.0);
            for (std::size_t i = 0; i < a.size(); ++i) {
                ay += a[i] * y[i];
                ax += a[i] * x[i];
            }
            out += ay / (T(1.0) + ax);
        }
        return out;
    }
};

/// Profile f(s, t) of a product metric F = sqrt(f(alpha1^2, alpha2^2)).
struct ProductProfile {
    enum class Kind { sum, szabo, power_mean };

    Kind kind = Kind::sum;
    double epsilon = 0.0; // szabo: s + t + epsilon sqrt(s^2 + t^2)
    double p = 2.0;       // power_mean: (s^p + t^p)^(1/p)

    template <class T>
    T operator()(const T& s, const T& t) const
    {
        using std::pow;
        using std::sqrt;
        switch (kind) {
        case Kind::szabo:
            return s + t + epsilon * sqrt(s * s + t * t);
        case Kind::power_mean:
            return pow(pow(s, p) + pow(t, p), 1.0 / p);
        default:
            return s + t;
        }
    }
};

inline const char* to_string(ProductProfile::Kind k)
{
    switch (k) {
    case ProductProfile::Kind::sum:
        return "sum";
    case ProductProfile::Kind::szabo:
        return "szabo";
    case ProductProfile::Kind::power_mean:
        return "power_mean";
    }
    return "?";
}

struct SzaboProductMetric {
    RiemannianModel alpha1;
    RiemannianModel alpha2;
    ProductProfile profile;

    template <class T>
    T squared(std::span<const T> x, std::span<const T> y) const
    {
        const int n1 = alpha1.dim;
        const T s = alpha1.quadratic(x.subspan(0, n1), y.subspan(0, n1));
        const T t = alpha2.quadratic(x.subspan(n1), y.subspan(n1));
        return profile(s, t);
    }
    template <class T>
    T operator()(std::span<const T> x, std::span<const T> y) const
    {
        using std::sqrt;
        return sqrt(squared(x, y));
    }
};

/// Zermelo-type metric on the solid cylinder s^2 + t^2 < 1, first two
/// coordinates (s, t), tangent (u, v, ybar).
struct IncompleteSlabMetric {
    int n = 3;

    template <class T>
    T operator()(std::span<const T> x, std::span<const T> y) const
    {
        using std::sqrt;
        const T& s = x[0];
        const T& t = x[1];
        const T w = -t * y[0] + s * y[1];
        const T lam = T(1.0) - s * s - t * t;
        return (sqrt(w * w + squared_norm(y) * lam) - w) / lam;
    }
};

using MetricModel = std::variant<EuclideanMetric, MinkowskiMetric, RiemannianMetric, RandersMetric, FunkShiftedMetric,
                                 FunkImplicitMetric, SzaboProductMetric, IncompleteSlabMetric>;

template <class M>
concept HasSquared = requires(const M& m, std::span<const double> v) {
    { m.squared(v, v) };
};

/// F^2 over scalar type T.
template <class M, class T>
T metric_squared(const M& m, std::span<const T> x, std::span<const T> y)
{
    if constexpr (HasSquared<M>) {
        return m.squared(x, y);
    } else {
        const T f = m(x, y);
        return f * f;
    }
}

/// A validated Finsler metric on a coordinate chart. Immutable and cheap to copy.
class MetricField {
public:
    MetricField(std::string kind, int dimension, Domain domain, MetricModel model)
        : kind_(std::move(kind)), dim_(dimension), domain_(std::make_shared<Domain>(std::move(domain))),
          model_(std::make_shared<MetricModel>(std::move(model)))
    {
    }

    const std::string& kind() const { return kind_; }
    int dimension() const { return dim_; }
    const Domain& domain() const { return *domain_; }
    const MetricModel& model() const { return *model_; }

    template <class Fn>
    decltype(auto) visit(Fn&& fn) const
    {
        return std::visit(std::forward<Fn>(fn), *model_);
    }

    template <class T>
    T evaluate(std::span<const T> x, std::span<const T> y) const
    {
        return visit([&](const auto& m) { return m(x, y); });
    }

    double operator()(std::span<const double> x, std::span<const double> y) const { return evaluate<double>(x, y); }
    double operator()(const Vec& x, const Vec& y) const
    {
        return evaluate<double>(std::span<const double>(x), std::span<const double>(y));
    }

    template <class T>
    T squared(std::span<const T> x, std::span<const T> y) const
    {
        return visit([&](const auto& m) { return metric_squared<std::decay_t<decltype(m)>, T>(m, x, y); });
    }

private:
    std::string kind_;
    int dim_;
    std::shared_ptr<const Domain> domain_;
    std::shared_ptr<const MetricModel> model_;
};

} // namespace finsler
