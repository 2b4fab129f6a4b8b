#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A Jet<T, D, N> holds the Taylor coefficients of a function of D seeded
// directions, truncated at total order N. Coefficients are stored densely in
// graded order (all multi-indices of degree 0, then 1, ...). The coefficient
// type T may itself be a jet, which is how mixed derivatives of derived
// quantities (spray, curvature) are obtained.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "finsler/errors.hpp"

namespace finsler {

namespace detail {

constexpr int binomial(int n, int k)
{
    if (k < 0 || k > n) {
        return 0;
    }
    long long r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return static_cast<int>(r);
}

// number of multi-indices in d variables of exact degree k
constexpr int count_exact(int d, int k)
{
    if (d == 0) {
        return k == 0 ? 1 : 0;
    }
    return binomial(k + d - 1, d - 1);
}

constexpr double factorial(int k)
{
    double r = 1.0;
    for (int i = 2; i <= k; ++i) {
        r *= i;
    }
    return r;
}

} // namespace detail

/// Static description of the coefficient layout for D directions, order N.
template <int D, int N>
struct JetLayout {
    static_assert(D >= 0 && N >= 0);

    static constexpr int size = detail::binomial(D + N, N);
    using MultiIndex = std::array<int, (D > 0 ? D : 1)>;

    // Rank of a multi-index within the graded ordering. Within one degree the
    // first component runs from high to low.
    static constexpr int rank(const MultiIndex& a)
    {
        int deg = 0;
        for (int i = 0; i < D; ++i) {
            deg += a[i];
        }
        int r = 0;
        for (int k = 0; k < deg; ++k) {
            r += detail::count_exact(D, k);
        }
        int remaining = deg;
        for (int i = 0; i < D; ++i) {
            const int vars_left = D - i - 1;
            for (int v = remaining; v > a[i]; --v) {
                r += detail::count_exact(vars_left, remaining - v);
            }
            remaining -= a[i];
        }
        return r;
    }

    static constexpr std::array<MultiIndex, size> make_indices()
    {
        std::array<MultiIndex, size> out{};
        int pos = 0;
        for (int k = 0; k <= N; ++k) {
            MultiIndex cur{};
            // recursive enumeration without recursion: odometer over compositions
            fill(out, pos, cur, 0, k);
        }
        return out;
    }

    static constexpr void fill(std::array<MultiIndex, size>& out, int& pos, MultiIndex& cur, int var, int remaining)
    {
        if (D == 0) {
            out[pos++] = cur;
            return;
        }
        if (var == D - 1) {
            cur[var] = remaining;
            out[pos++] = cur;
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            cur[var] = v;
            fill(out, pos, cur, var + 1, remaining - v);
        }
        cur[var] = 0;
    }

    static constexpr std::array<MultiIndex, size> indices = make_indices();

    static constexpr std::array<int, size> make_degrees()
    {
        std::array<int, size> out{};
        for (int i = 0; i < size; ++i) {
            int d = 0;
            for (int j = 0; j < D; ++j) {
                d += indices[i][j];
            }
            out[i] = d;
        }
        return out;
    }
    static constexpr std::array<int, size> degree = make_degrees();

    static constexpr std::array<double, size> make_factorials()
    {
        std::array<double, size> out{};
        for (int i = 0; i < size; ++i) {
            double f = 1.0;
            for (int j = 0; j < D; ++j) {
                f *= detail::factorial(indices[i][j]);
            }
            out[i] = f;
        }
        return out;
    }
    static constexpr std::array<double, size> factorials = make_factorials();

    struct Term {
        std::uint16_t a;
        std::uint16_t b;
        std::uint16_t c;
    };

    static constexpr int count_terms()
    {
        int t = 0;
        for (int i = 0; i < size; ++i) {
            for (int j = 0; j < size; ++j) {
                if (degree[i] + degree[j] <= N) {
                    ++t;
                }
            }
        }
        return t;
    }
    static constexpr int num_terms = count_terms();

    // convolution table: coefficient c accumulates a*b
    static constexpr std::array<Term, num_terms> make_terms()
    {
        std::array<Term, num_terms> out{};
        int t = 0;
        for (int i = 0; i < size; ++i) {
            for (int j = 0; j < size; ++j) {
                if (degree[i] + degree[j] <= N) {
                    MultiIndex s{};
                    for (int v = 0; v < D; ++v) {
                        s[v] = indices[i][v] + indices[j][v];
                    }
                    out[t++] = Term{static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                                    static_cast<std::uint16_t>(rank(s))};
                }
            }
        }
        return out;
    }
    static constexpr std::array<Term, num_terms> terms = make_terms();
};

template <class T, int D, int N>
class Jet;

template <class T>
struct is_jet : std::false_type {};
template <class T, int D, int N>
struct is_jet<Jet<T, D, N>> : std::true_type {};
template <class T>
inline constexpr bool is_jet_v = is_jet<T>::value;

/// Sum of truncation orders over all nesting levels.
template <class T>
struct total_order : std::integral_constant<int, 0> {};
template <class T, int D, int N>
struct total_order<Jet<T, D, N>> : std::integral_constant<int, N + total_order<T>::value> {};
template <class T>
inline constexpr int total_order_v = total_order<T>::value;

template <class T, int D, int N>
class Jet {
public:
    using Layout = JetLayout<D, N>;
    using value_type = T;
    static constexpr int directions = D;
    static constexpr int order = N;
    static constexpr int size = Layout::size;

    constexpr Jet() : c_{} {}

    // constant jet
    constexpr Jet(const T& v) : c_{} { c_[0] = v; }

    template <class U>
        requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
    constexpr Jet(U v) : c_{}
    {
        c_[0] = T(static_cast<double>(v));
    }

    /// Independent variable: value v moving with velocity `slope[d]` along direction d.
    static Jet variable(const T& v, const std::array<double, (D > 0 ? D : 1)>& slope)
    {
        Jet j(v);
        for (int d = 0; d < D; ++d) {
            j.c_[1 + d] = T(slope[d]);
        }
        return j;
    }

    constexpr const T& value() const { return c_[0]; }
    constexpr T& value() { return c_[0]; }

    constexpr const T& coeff(int i) const { return c_[i]; }
    constexpr T& coeff(int i) { return c_[i]; }

    /// Raw Taylor coefficient for a multi-index.
    const T& taylor(const typename Layout::MultiIndex& a) const { return c_[Layout::rank(a)]; }

    /// Mixed partial derivative for a multi-index (factorial normalization applied).
    T derivative(const typename Layout::MultiIndex& a) const
    {
        int deg = 0;
        for (int i = 0; i < D; ++i) {
            if (a[i] < 0) {
                throw OutOfOrderError("negative multi-index entry");
            }
            deg += a[i];
        }
        if (deg > N) {
            throw OutOfOrderError("multi-index of degree " + std::to_string(deg) + " exceeds jet order " +
                                  std::to_string(N));
        }
        const int r = Layout::rank(a);
        return c_[r] * Layout::factorials[r];
    }

    Jet& operator+=(const Jet& o)
    {
        for (int i = 0; i < size; ++i) {
            c_[i] += o.c_[i];
        }
        return *this;
    }
    Jet& operator-=(const Jet& o)
    {
        for (int i = 0; i < size; ++i) {
            c_[i] -= o.c_[i];
        }
        return *this;
    }
    Jet& operator*=(const Jet& o)
    {
        *this = *this * o;
        return *this;
    }
    Jet& operator/=(const Jet& o)
    {
        *this = *this / o;
        return *this;
    }
    Jet& operator+=(const T& s)
    {
        c_[0] += s;
        return *this;
    }
    Jet& operator-=(const T& s)
    {
        c_[0] -= s;
        return *this;
    }
    Jet& operator*=(const T& s)
    {
        for (auto& v : c_) {
            v *= s;
        }
        return *this;
    }

    friend Jet operator-(const Jet& a)
    {
        Jet r;
        for (int i = 0; i < size; ++i) {
            r.c_[i] = -a.c_[i];
        }
        return r;
    }
    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b)
    {
        Jet r;
        for (const auto& t : Layout::terms) {
            r.c_[t.c] += a.c_[t.a] * b.c_[t.b];
        }
        return r;
    }
    friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

    friend Jet operator+(Jet a, const T& s) { return a += s; }
    friend Jet operator+(const T& s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, const T& s) { return a -= s; }
    friend Jet operator-(const T& s, const Jet& a) { return -a + s; }
    friend Jet operator*(Jet a, const T& s) { return a *= s; }
    friend Jet operator*(const T& s, Jet a) { return a *= s; }
    friend Jet operator/(const Jet& a, const T& s) { return a * (T(1.0) / s); }
    friend Jet operator/(const T& s, const Jet& a) { return reciprocal(a) * s; }

    // mixed arithmetic with plain doubles when T is itself a jet
    template <class U>
        requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
    friend Jet operator+(Jet a, U s)
    {
        return a += T(static_cast<double>(s));
    }
    template <class U>
        requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
    friend Jet operator+(U s, Jet a)
    {
        return a += T(static_cast<double>(s));
    }
    template <class U>
        requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
    friend Jet operator-(Jet a, U s)
    {
        return a -= T(static_cast<double>(s));
    }
    template <class U>
        requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
    friend Jet operator-(U s, const Jet& a)
    {
        return -a + T(static_cast<double>(s));
    }
    template <class U>
        requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
    friend Jet operator*(Jet a, U s)
    {
        return a *= T(static_cast<double>(s));
    }
    template <class U>
        requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
    friend Jet operator*(U s, Jet a)
    {
        return a *= T(static_cast<double>(s));
    }
    template <class U>
        requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
    friend Jet operator/(const Jet& a, U s)
    {
        return a * T(1.0 / static_cast<double>(s));
    }
    template <class U>
        requires(std::is_arithmetic_v<U> && !std::is_same_v<U, T>)
    friend Jet operator/(U s, const Jet& a)
    {
        return reciprocal(a) * T(static_cast<double>(s));
    }

    friend bool operator==(const Jet& a, const Jet& b) { return a.c_ == b.c_; }

    /// f(a) = sum_k coeffs[k] * (a - a0)^k where coeffs[k] = f^{(k)}(a0)/k!.
    friend Jet compose(const Jet& a, const std::array<T, N + 1>& coeffs)
    {
        Jet h = a;
        h.c_[0] = T(0.0);
        Jet r(coeffs[0]);
        Jet p = h;
        for (int k = 1; k <= N; ++k) {
            for (int i = 0; i < size; ++i) {
                r.c_[i] += coeffs[k] * p.c_[i];
            }
            if (k < N) {
                p = p * h;
            }
        }
        return r;
    }

    friend Jet reciprocal(const Jet& a)
    {
        std::array<T, N + 1> c;
        const T inv = T(1.0) / a.c_[0];
        c[0] = inv;
        for (int k = 1; k <= N; ++k) {
            c[k] = -c[k - 1] * inv;
        }
        return compose(a, c);
    }

    friend Jet sqrt(const Jet& a)
    {
        using std::sqrt;
        std::array<T, N + 1> c;
        const T inv = T(1.0) / a.c_[0];
        c[0] = sqrt(a.c_[0]);
        for (int k = 1; k <= N; ++k) {
            // binomial(1/2, k) recursion
            c[k] = c[k - 1] * inv * ((0.5 - (k - 1)) / k);
        }
        return compose(a, c);
    }

    friend Jet pow(const Jet& a, double p)
    {
        using std::pow;
        std::array<T, N + 1> c;
        const T inv = T(1.0) / a.c_[0];
        c[0] = pow(a.c_[0], p);
        for (int k = 1; k <= N; ++k) {
            c[k] = c[k - 1] * inv * ((p - (k - 1)) / k);
        }
        return compose(a, c);
    }

    friend Jet exp(const Jet& a)
    {
        using std::exp;
        std::array<T, N + 1> c;
        c[0] = exp(a.c_[0]);
        for (int k = 1; k <= N; ++k) {
            c[k] = c[k - 1] * (1.0 / k);
        }
        return compose(a, c);
    }

    friend Jet log(const Jet& a)
    {
        using std::log;
        std::array<T, N + 1> c;
        const T inv = T(1.0) / a.c_[0];
        c[0] = log(a.c_[0]);
        T p = inv;
        for (int k = 1; k <= N; ++k) {
            c[k] = p * ((k % 2 == 1 ? 1.0 : -1.0) / k);
            p = p * inv;
        }
        return compose(a, c);
    }

    friend Jet sin(const Jet& a)
    {
        using std::cos;
        using std::sin;
        std::array<T, N + 1> c;
        const T s = sin(a.c_[0]);
        const T co = cos(a.c_[0]);
        for (int k = 0; k <= N; ++k) {
            const T& base = (k % 2 == 0) ? s : co;
            const double sign = (k % 4 == 0 || k % 4 == 1) ? 1.0 : -1.0;
            c[k] = base * (sign / detail::factorial(k));
        }
        return compose(a, c);
    }

    friend Jet cos(const Jet& a)
    {
        using std::cos;
        using std::sin;
        std::array<T, N + 1> c;
        const T s = sin(a.c_[0]);
        const T co = cos(a.c_[0]);
        for (int k = 0; k <= N; ++k) {
            const T& base = (k % 2 == 0) ? co : s;
            const double sign = (k % 4 == 0 || k % 4 == 3) ? 1.0 : -1.0;
            c[k] = base * (sign / detail::factorial(k));
        }
        return compose(a, c);
    }

private:
    std::array<T, size> c_;
};

/// Innermost plain value of a (possibly nested) jet.
inline double primal(double x) { return x; }
template <class T, int D, int N>
double primal(const Jet<T, D, N>& x)
{
    return primal(x.value());
}

/// Lift a double into scalar type S (a constant).
template <class S>
S constant(double v)
{
    return S(v);
}

/// Seed D directions at `point`: coordinate i has value point[i] and
/// first-order coefficient directions[d][i] along seeded direction d.
template <class T, int D, int N>
std::vector<Jet<T, D, N>> seed(std::span<const T> point, const std::array<std::vector<double>, (D > 0 ? D : 1)>& dirs)
{
    std::vector<Jet<T, D, N>> out;
    out.reserve(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        Jet<T, D, N> j(point[i]);
        for (int d = 0; d < D; ++d) {
            j.coeff(1 + d) = T(dirs[d][i]);
        }
        out.push_back(j);
    }
    return out;
}

} // namespace finsler
