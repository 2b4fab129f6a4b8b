#pragma once

// Dense n x n helpers over a generic scalar (double or jets). Dimensions are
// small (n <= 8), so plain row-major vectors are used.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

using Vec = std::vector<double>;

template <class T>
struct SquareMatrix {
    int n = 0;
    std::vector<T> a;

    SquareMatrix() = default;
    explicit SquareMatrix(int dim) : n(dim), a(static_cast<std::size_t>(dim) * dim, T(0.0)) {}

    T& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    static SquareMatrix identity(int dim)
    {
        SquareMatrix m(dim);
        for (int i = 0; i < dim; ++i) {
            m(i, i) = T(1.0);
        }
        return m;
    }
};

using Matrix = SquareMatrix<double>;

template <class T>
std::vector<T> matvec(const SquareMatrix<T>& m, std::span<const T> v)
{
    std::vector<T> out(m.n, T(0.0));
    for (int i = 0; i < m.n; ++i) {
        for (int j = 0; j < m.n; ++j) {
            out[i] += m(i, j) * v[j];
        }
    }
    return out;
}

inline Vec matvec(const Matrix& m, const Vec& v) { return matvec<double>(m, std::span<const double>(v)); }

template <class T>
SquareMatrix<T> matmul(const SquareMatrix<T>& a, const SquareMatrix<T>& b)
{
    SquareMatrix<T> c(a.n);
    for (int i = 0; i < a.n; ++i) {
        for (int k = 0; k < a.n; ++k) {
            for (int j = 0; j < a.n; ++j) {
                c(i, j) += a(i, k) * b(k, j);
            }
        }
    }
    return c;
}

template <class T>
T dot(std::span<const T> a, std::span<const T> b)
{
    T s(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double dot(const Vec& a, const Vec& b) { return dot<double>(std::span<const double>(a), std::span<const double>(b)); }

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

/// Bilinear form u^T m v.
inline double bilinear(const Matrix& m, const Vec& u, const Vec& v)
{
    double s = 0.0;
    for (int i = 0; i < m.n; ++i) {
        for (int j = 0; j < m.n; ++j) {
            s += u[i] * m(i, j) * v[j];
        }
    }
    return s;
}

inline double frobenius(const Matrix& m)
{
    double s = 0.0;
    for (double v : m.a) {
        s += v * v;
    }
    return std::sqrt(s);
}

/// Solve m X = rhs (columns of rhs stored as separate vectors) by Gaussian
/// elimination with partial pivoting on the primal values. Returns false if
/// a pivot vanishes.
template <class T>
bool solve_in_place(SquareMatrix<T> m, std::vector<std::vector<T>>& rhs)
{
    const int n = m.n;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(primal(m(col, col)));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(primal(m(r, col)));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (!(best > 0.0) || !std::isfinite(best)) {
            return false;
        }
        if (piv != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(m(col, j), m(piv, j));
            }
            for (auto& b : rhs) {
                std::swap(b[col], b[piv]);
            }
        }
        const T inv = T(1.0) / m(col, col);
        for (int r = col + 1; r < n; ++r) {
            const T f = m(r, col) * inv;
            if (primal(f) == 0.0 && !is_jet_v<T>) {
                continue;
            }
            for (int j = col; j < n; ++j) {
                m(r, j) -= f * m(col, j);
            }
            for (auto& b : rhs) {
                b[r] -= f * b[col];
            }
        }
    }
    for (auto& b : rhs) {
        for (int r = n - 1; r >= 0; --r) {
            T s = b[r];
            for (int j = r + 1; j < n; ++j) {
                s -= m(r, j) * b[j];
            }
            b[r] = s / m(r, r);
        }
    }
    return true;
}

template <class T>
bool solve(const SquareMatrix<T>& m, std::vector<T>& rhs)
{
    std::vector<std::vector<T>> cols{std::move(rhs)};
    const bool ok = solve_in_place(m, cols);
    rhs = std::move(cols[0]);
    return ok;
}

template <class T>
bool inverse(const SquareMatrix<T>& m, SquareMatrix<T>& out)
{
    const int n = m.n;
    std::vector<std::vector<T>> cols(n, std::vector<T>(n, T(0.0)));
    for (int i = 0; i < n; ++i) {
        cols[i][i] = T(1.0);
    }
    if (!solve_in_place(m, cols)) {
        return false;
    }
    out = SquareMatrix<T>(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            out(i, j) = cols[j][i];
        }
    }
    return true;
}

/// Cholesky factorization of a symmetric matrix; false if not positive definite.
inline bool cholesky(const Matrix& m, Matrix& l)
{
    const int n = m.n;
    l = Matrix(n);
    for (int j = 0; j < n; ++j) {
        double d = m(j, j);
        for (int k = 0; k < j; ++k) {
            d -= l(j, k) * l(j, k);
        }
        if (!(d > 0.0)) {
            return false;
        }
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k);
            }
            l(i, j) = s / l(j, j);
        }
    }
    return true;
}

inline bool is_positive_definite(const Matrix& m)
{
    Matrix l;
    return cholesky(m, l);
}

template <class T>
T determinant(SquareMatrix<T> m)
{
    const int n = m.n;
    T det(1.0);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(primal(m(col, col)));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(primal(m(r, col)));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) {
            return T(0.0);
        }
        if (piv != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(m(col, j), m(piv, j));
            }
            det = -det;
        }
        det = det * m(col, col);
        const T inv = T(1.0) / m(col, col);
        for (int r = col + 1; r < n; ++r) {
            const T f = m(r, col) * inv;
            for (int j = col; j < n; ++j) {
                m(r, j) -= f * m(col, j);
            }
        }
    }
    return det;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> symmetric_eigenvalues(Matrix m)
{
    const int n = m.n;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                off += m(i, j) * m(i, j);
            }
        }
        if (off < 1e-30) {
            break;
        }
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (m(p, q) == 0.0) {
                    continue;
                }
                const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double mkp = m(k, p);
                    const double mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double mpk = m(p, k);
                    const double mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) {
        ev[i] = m(i, i);
    }
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace finsler
