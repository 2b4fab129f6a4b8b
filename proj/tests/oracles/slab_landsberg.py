"""High-precision mean Landsberg norm for the incomplete slab metric.

Symbolic derivatives of F^2 (sympy) evaluated at 40 digits (mpmath), then
assembled into g, G, N, I and J_i = y^m dI_i/dx^m - 2 G^j dI_i/dy^j - I_k N^k_i.
Prints |J|_g at fixed samples as JSON. The witness threshold in
tests/data/slab_witness.json was frozen from this output.
"""

import itertools
import json

import mpmath as mp
import sympy as sp

mp.mp.dps = 40
n = 3
X = sp.symbols("s t r", real=True)
Y = sp.symbols("u v w", real=True)
s, t = X[0], X[1]
wt = -t * Y[0] + s * Y[1]
lam = 1 - s**2 - t**2
yy = sum(c**2 for c in Y)
F = (sp.sqrt(wt**2 + yy * lam) - wt) / lam
L = F**2

SAMPLES = [
    ([0.5, 0.3, 0.0], [0.3, 0.2, 0.2]),
    ([-0.2, 0.6, 0.1], [1.0, 0.0, 0.0]),
    ([0.1, -0.4, -0.3], [0.2, 0.7, -0.4]),
    ([0.7, 0.1, 0.5], [-0.5, 0.5, 0.1]),
    ([-0.35, -0.35, 0.0], [0.0, -0.3, 0.9]),
]


def derivative_table(xv, yv):
    sub = {X[i]: sp.Float(xv[i], 50) for i in range(n)}
    sub.update({Y[i]: sp.Float(yv[i], 50) for i in range(n)})
    cache = {}

    def d(xs, ys):
        key = (tuple(sorted(xs)), tuple(sorted(ys)))
        if key not in cache:
            e = L
            for i in key[0]:
                e = sp.diff(e, X[i])
            for i in key[1]:
                e = sp.diff(e, Y[i])
            cache[key] = mp.mpf(sp.N(e.subs(sub), 45))
        return cache[key]

    return d


def landsberg_norm(xv, yv):
    d = derivative_table(xv, yv)
    R = range(n)
    y = [mp.mpf(v) for v in yv]
    g = mp.matrix(n, n)
    for i, j in itertools.product(R, R):
        g[i, j] = d((), (i, j)) / 2
    gi = g**-1
    # dg[k][i,j] = d g_ij / dy^k, ddg[k][l] = d2 g_ij / dy^k dy^l
    dg = [[[d((), (i, j, k)) / 2 for j in R] for i in R] for k in R]
    ddg = [[[[d((), (i, j, k, l)) / 2 for j in R] for i in R] for l in R] for k in R]
    dxg = [[[d((m,), (i, j)) / 2 for j in R] for i in R] for m in R]
    dxdg = [[[[d((m,), (i, j, k)) / 2 for j in R] for i in R] for k in R] for m in R]

    # G^i = 1/4 g^{il} (L_{x^k y^l} y^k - L_{x^l})
    b = [sum(d((k,), (l,)) * y[k] for k in R) - d((l,), ()) for l in R]
    G = [sum(gi[i, l] * b[l] for l in R) / 4 for i in R]
    # dG^i/dy^j
    db = [[d((j,), (l,)) + sum(d((k,), (l, j)) * y[k] for k in R) - d((l,), (j,)) for j in R] for l in R]
    dgi = []  # d g^{il} / dy^j = -g^{ia} dg_ab/dy^j g^{bl}
    for j in R:
        dj = mp.matrix(n, n)
        for i, l in itertools.product(R, R):
            dj[i, l] = -sum(gi[i, a] * dg[j][a][c] * gi[c, l] for a in R for c in R)
        dgi.append(dj)
    N = [[sum(dgi[j][i, l] * b[l] + gi[i, l] * db[l][j] for l in R) / 4 for j in R] for i in R]

    # I_i = 1/2 g^{jk} dg_jk/dy^i
    I = [sum(gi[j, k] * dg[i][j][k] for j in R for k in R) / 2 for i in R]
    # dI_i/dy^l
    dIy = [[sum(dgi[l][j, k] * dg[i][j][k] + gi[j, k] * ddg[i][l][j][k] for j in R for k in R) / 2 for l in R] for i in R]
    # dI_i/dx^m with d g^{jk}/dx^m = -g^{ja} dg_ab/dx^m g^{bk}
    dIx = []
    for i in R:
        row = []
        for m in R:
            tot = mp.mpf(0)
            for j, k in itertools.product(R, R):
                dgix = -sum(gi[j, a] * dxg[m][a][c] * gi[c, k] for a in R for c in R)
                tot += dgix * dg[i][j][k] + gi[j, k] * dxdg[m][i][j][k]
            row.append(tot / 2)
        dIx.append(row)
    J = [
        sum(y[m] * dIx[i][m] for m in R) - 2 * sum(G[j] * dIy[i][j] for j in R) - sum(I[k] * N[k][i] for k in R)
        for i in R
    ]
    return mp.sqrt(sum(J[i] * gi[i, j] * J[j] for i in R for j in R))


if __name__ == "__main__":
    out = []
    for xv, yv in SAMPLES:
        out.append({"x": xv, "y": yv, "landsberg_norm": mp.nstr(landsberg_norm(xv, yv), 30)})
    print(json.dumps(out, indent=2))
