"""Symbolic Levi-Civita connection and curvature of the flat S-structure, used as an independent oracle."""

import functools

import numpy as np
import sympy as sp


@functools.lru_cache(maxsize=None)
def flat_symbolic(m: int, t: int):
    xs = sp.symbols(f"x1:{m + 1}")
    ys = sp.symbols(f"y1:{m + 1}")
    zs = sp.symbols(f"z1:{t + 1}")
    u = list(xs) + list(ys) + list(zs)
    d = len(u)
    # eta^a = 1/2 (dz_a - sum_i y_i dx_i);  g = 1/4 sum (dx^2 + dy^2) + sum_a eta^a (x) eta^a
    etas = []
    for a in range(t):
        e = [sp.Integer(0)] * d
        for i in range(m):
            e[i] = -ys[i] / 2
        e[2 * m + a] = sp.Rational(1, 2)
        etas.append(e)
    g = sp.zeros(d, d)
    for i in range(d):
        for j in range(d):
            g[i, j] = sum(e[i] * e[j] for e in etas) + (sp.Rational(1, 4) if i == j and i < 2 * m else 0)
    ginv = sp.simplify(g.inv())
    gam = [[[sp.simplify(sum(ginv[k, l] * (sp.diff(g[j, l], u[i]) + sp.diff(g[i, l], u[j]) - sp.diff(g[i, j], u[l]))
                               for l in range(d)) / 2) for j in range(d)] for i in range(d)] for k in range(d)]
    # endo[l][i][j][k] = (R(d_i, d_j) d_k)^l
    endo = [[[[sp.simplify(
        sp.diff(gam[l][j][k], u[i]) - sp.diff(gam[l][i][k], u[j])
        + sum(gam[l][i][q] * gam[q][j][k] - gam[l][j][q] * gam[q][i][k] for q in range(d))
    ) for k in range(d)] for j in range(d)] for i in range(d)] for l in range(d)]
    f_gam = sp.lambdify(u, gam, "numpy")
    f_endo = sp.lambdify(u, endo, "numpy")
    f_g = sp.lambdify(u, g, "numpy")
    return f_g, f_gam, f_endo


def flat_oracle_at(m: int, t: int, coords):
    f_g, f_gam, f_endo = flat_symbolic(m, t)
    G = np.array(f_g(*coords), dtype=float)
    gam = np.array(f_gam(*coords), dtype=float)
    endo = np.array(f_endo(*coords), dtype=float)
    values = np.einsum("wl,lijk->ijkw", G, endo)
    return G, gam, values
