"""Curvature of affine connections and the sectional/scalar curvatures built on it.

Sign convention::

    R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
    R(X,Y,Z,W) = g(R(X,Y)Z, W)
    K(X,Y) = R(X,Y,Y,X) / (g(X,X) g(Y,Y) - g(X,Y)^2)

so that round spheres have positive K and R(xi, X, X, xi) = +1 for a unit X
orthogonal to the structure vectors of a Sasakian manifold.

No symmetry of R beyond antisymmetry in its first pair is assumed anywhere:
the non-metric connection breaks pair symmetry, and sectional quantities are
evaluated in the argument order they are given.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import AffineConnection
from .diffcore import Point
from .fstructure import MetricFStructure, StructureAt
from .tensorfield import MetricField, metric_at

DEGENERATE_PLANE = 1e-12


@dataclass(frozen=True)
class CurvatureAt:
    """Full curvature at a point.

    ``values[x, y, z, w] = R(d_x, d_y, d_z, d_w)``;
    ``endo[l, x, y, z] = (R(d_x, d_y) d_z)^l``.
    """

    point: Point
    values: np.ndarray
    endo: np.ndarray
    G: np.ndarray
    symmetry_assumed: bool = False

    def __call__(self, X, Y, Z, W) -> float:
        return float(np.einsum("ijkl,i,j,k,l->", self.values, X, Y, Z, W))

    def operator(self, X, Y, Z) -> np.ndarray:
        """The vector R(X,Y)Z."""
        return np.einsum("lijk,i,j,k->l", self.endo, X, Y, Z)


def riemann_tensor(conn: AffineConnection, g: MetricField, p: Point) -> CurvatureAt:
    """R^l_{kij} from Gamma and its first derivatives, lowered with g(p).

    (R(d_i,d_j)d_k)^l = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik
    """
    gam, dgam = conn.at(p)  # dgam[k, i, j, m] = d_m Gamma^k_ij
    d_first = np.einsum("ljki->lijk", dgam)
    endo = (
        d_first
        - d_first.transpose(0, 2, 1, 3)
        + np.einsum("lim,mjk->lijk", gam, gam)
        - np.einsum("ljm,mik->lijk", gam, gam)
    )
    G = metric_at(g, p)
    values = np.einsum("wl,lijk->ijkw", G, endo)
    return CurvatureAt(p, values, endo, G)


def plane_area2(G: np.ndarray, X, Y) -> float:
    return float((X @ G @ X) * (Y @ G @ Y) - (X @ G @ Y) ** 2)


def sectional(Rp: CurvatureAt, X, Y) -> float:
    """K(X,Y) = R(X,Y,Y,X)/|X^Y|^2, evaluated in the order given."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    area = plane_area2(Rp.G, X, Y)
    if area <= DEGENERATE_PLANE:
        raise ValueError(f"degenerate plane (Gram determinant {area:.3e})")
    return Rp(X, Y, Y, X) / area


def f_sectional(Rp: CurvatureAt, st: StructureAt, X) -> float:
    """Sectional curvature of the f-section spanned by X and fX."""
    return sectional(Rp, X, st.F @ X)


def l_sectional(Rp: CurvatureAt, st: StructureAt, X, Y, tol: float = 1e-9) -> float:
    for v in (X, Y):
        leak = float(np.max(np.abs(st.eta @ v)))
        if leak > tol:
            raise ValueError(f"vector not in L (max |eta(v)| = {leak:.3e})")
    return sectional(Rp, X, Y)


def scalar_curvature(Rp: CurvatureAt, frame: np.ndarray) -> float:
    """tau = 1/2 sum_{i != j} R(e_i, e_j, e_j, e_i) over the rows of an orthonormal frame.

    Ordered pairs are summed as written, so the value is meaningful for
    connections without pair symmetry too.
    """
    E = np.asarray(frame, dtype=float)
    # M[a, b] = R(e_a, e_b, e_b, e_a)
    t = np.tensordot(E, Rp.values, axes=([1], [0]))  # a j k l
    t = np.einsum("ajkl,al->ajk", t, E)
    t = np.einsum("ajk,bj,bk->ab", t, E, E, optimize=True)
    return 0.5 * float(t.sum() - np.trace(t))


def space_form_tensor_array(c: float, s: int, st: StructureAt) -> np.ndarray:
    """Curvature tensor of an S-space-form of constant f-sectional curvature c, on coordinate arguments."""
    G, F, _, Eta = st
    gf = F.T @ G @ F  # g(fX, fY)
    Phi = G @ F  # Phi(X, Y) = g(X, fY)
    e = Eta.sum(axis=0)  # sum_a eta^a
    T = (
        np.einsum("xw,y,z->xyzw", gf, e, e)
        - np.einsum("xz,y,w->xyzw", gf, e, e)
        + np.einsum("yz,x,w->xyzw", gf, e, e)
        - np.einsum("yw,x,z->xyzw", gf, e, e)
    )
    T = T + (c + 3 * s) / 4.0 * (np.einsum("xw,yz->xyzw", gf, gf) - np.einsum("xz,yw->xyzw", gf, gf))
    T = T + (c - s) / 4.0 * (
        np.einsum("xw,yz->xyzw", Phi, Phi) - np.einsum("xz,yw->xyzw", Phi, Phi) - 2.0 * np.einsum("xy,zw->xyzw", Phi, Phi)
    )
    return T


def space_form_tensor(c: float, S: MetricFStructure, X, Y, Z, W, p: Point) -> float:
    T = space_form_tensor_array(c, S.s, S.at(p))
    return float(np.einsum("ijkl,i,j,k,l->", T, X, Y, Z, W))


def kl_closed_form(c: float, s: int, st: StructureAt, X, Y) -> float:
    """(c+3s)/4 + 3(c-s)/4 g(X, fY)^2 for orthonormal X, Y in L."""
    gxfy = float(X @ st.G @ st.F @ Y)
    return (c + 3 * s) / 4.0 + 3.0 * (c - s) / 4.0 * gxfy**2


def first_bianchi_residual(Rp: CurvatureAt) -> float:
    """max |R(X,Y)Z + R(Y,Z)X + R(Z,X)Y| over coordinate triples."""
    E = Rp.endo
    cyc = E + E.transpose(0, 2, 3, 1) + E.transpose(0, 3, 1, 2)
    return float(np.max(np.abs(cyc)))


def first_pair_antisymmetry_residual(Rp: CurvatureAt) -> float:
    V = Rp.values
    return float(np.max(np.abs(V + V.transpose(1, 0, 2, 3))))


def last_pair_antisymmetry_residual(Rp: CurvatureAt) -> float:
    V = Rp.values
    return float(np.max(np.abs(V + V.transpose(0, 1, 3, 2))))


def pair_symmetry_residual(Rp: CurvatureAt) -> float:
    V = Rp.values
    return float(np.max(np.abs(V - V.transpose(2, 3, 0, 1))))


# closed-form scalar curvatures of a (2n+s)-dimensional S-space-form M(c)


def tau_space_form(n: int, s: int, c: float) -> float:
    return n * (n - 1) * (c + 3 * s) / 2.0 + n * (c + 2 * s)


def tau_constant_kl(n: int, s: int) -> float:
    return float(n * s * (2 * n + 1))


def tau_star_space_form(n: int, s: int, c: float) -> float:
    return (n * (n + 1) * (c - s) + (4 * n * s + s * (s - 1)) * (2 - s)) / 2.0


def tau_star_constant_kl(n: int, s: int) -> float:
    return (4 * n * s + s * (s - 1)) * (2 - s) / 2.0


def tau_tilde_space_form(n: int, s: int, c: float) -> float:
    return (n * (n + 1) * (c + 3 * s) + s * (s - 1)) / 2.0


def tau_tilde_constant_kl(n: int, s: int) -> float:
    return 2 * n * s * (n + 1) + s * (s - 1) / 2.0
