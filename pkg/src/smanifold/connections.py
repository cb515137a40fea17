"""Linear connections as Christoffel coefficient fields.

``gamma[k, i, j]`` is Gamma^k_ij with ``nabla_{d_i} d_j = Gamma^k_ij d_k``; the
first lower index is the differentiation direction, which matters for the
two torsionful connections built here.

Christoffel fields carry exact values and first derivatives (they are built
from first derivatives of g, and curvature needs exactly one more).
"""

from __future__ import annotations

from enum import Enum
from typing import Sequence

import numpy as np

from .diffcore import ArrayNode, Chart, ChartMismatchError, Point, arrays_to_jets, evaluate, field_sum, jets_to_arrays
from .fstructure import MetricFStructure
from .tensorfield import MetricField, VectorField, _objarray, lie_bracket


class ConnectionKind(str, Enum):
    RIEMANNIAN = "riemannian"
    SEMI_SYMMETRIC_METRIC = "semi_symmetric_metric"
    SEMI_SYMMETRIC_NON_METRIC = "semi_symmetric_non_metric"
    GENERIC = "generic"


class AffineConnection:
    def __init__(self, chart: Chart, gamma: np.ndarray, kind: ConnectionKind = ConnectionKind.GENERIC):
        d = chart.dim
        if gamma.shape != (d, d, d):
            raise ValueError(f"Christoffel array must have shape {(d, d, d)}")
        self.chart = chart
        self.gamma = gamma
        self.kind = ConnectionKind(kind)

    def at(self, p: Point) -> tuple[np.ndarray, np.ndarray]:
        """(Gamma[k,i,j], dGamma[k,i,j,m] = d_m Gamma^k_ij) at p."""
        return evaluate(self.gamma, p, 1)

    def christoffel_at(self, p: Point) -> np.ndarray:
        return evaluate(self.gamma, p)

    def __repr__(self):
        return f"AffineConnection({self.kind.value}, dim={self.chart.dim})"


class _LeviCivita(ArrayNode):
    """Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij), with its first derivatives."""

    def __init__(self, g: MetricField):
        d = g.chart.dim
        super().__init__(g.chart, (d, d, d))
        self.g = g

    def _compute(self, ctx):
        d = self.chart.dim
        jets = [c._eval(ctx) for c in self.g.comps.flat]
        G, dG, ddG = jets_to_arrays(jets, (d, d), ctx.dim, 2)
        G = 0.5 * (G + G.T)
        inv = np.linalg.inv(G)
        dinv = -np.einsum("ab,bcm,cd->adm", inv, dG, inv)
        # first kind: C[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
        C = 0.5 * (np.einsum("jli->lij", dG) + np.einsum("ilj->lij", dG) - np.einsum("ijl->lij", dG))
        dC = 0.5 * (
            np.einsum("jlim->lijm", ddG) + np.einsum("iljm->lijm", ddG) - np.einsum("ijlm->lijm", ddG)
        )
        gamma = np.einsum("kl,lij->kij", inv, C)
        dgamma = np.einsum("klm,lij->kijm", dinv, C) + np.einsum("kl,lijm->kijm", inv, dC)
        return arrays_to_jets(gamma, dgamma)


def levi_civita(g: MetricField) -> AffineConnection:
    return AffineConnection(g.chart, _LeviCivita(g).components(), ConnectionKind.RIEMANNIAN)


def _structure_sums(S: MetricFStructure):
    d = S.dim
    P = [field_sum((X.comps[k] for X in S.xi), S.chart) for k in range(d)]  # sum_a xi_a^k
    pi = [field_sum((e.comps[j] for e in S.eta), S.chart) for j in range(d)]  # sum_a eta^a_j
    return P, pi


def semi_symmetric_metric(S: MetricFStructure, lc: AffineConnection) -> AffineConnection:
    """nabla*_X Y = nabla_X Y + sum_a eta^a(Y) X - g(X,Y) sum_a xi_a.

    Gamma*^k_ij = Gamma^k_ij + pi_j delta^k_i - g_ij P^k.
    """
    _require_same_chart(S, lc)
    d = S.dim
    P, pi = _structure_sums(S)
    gamma = _objarray(
        (
            lc.gamma[k, i, j] + (pi[j] if k == i else 0.0) - S.g.comps[i, j] * P[k]
            for k in range(d)
            for i in range(d)
            for j in range(d)
        ),
        (d, d, d),
    )
    return AffineConnection(S.chart, gamma, ConnectionKind.SEMI_SYMMETRIC_METRIC)


def semi_symmetric_non_metric(S: MetricFStructure, lc: AffineConnection) -> AffineConnection:
    """nabla~_X Y = nabla_X Y + sum_a eta^a(Y) X, i.e. Gamma~^k_ij = Gamma^k_ij + pi_j delta^k_i."""
    _require_same_chart(S, lc)
    d = S.dim
    _, pi = _structure_sums(S)
    gamma = _objarray(
        (lc.gamma[k, i, j] + (pi[j] if k == i else 0.0) for k in range(d) for i in range(d) for j in range(d)),
        (d, d, d),
    )
    return AffineConnection(S.chart, gamma, ConnectionKind.SEMI_SYMMETRIC_NON_METRIC)


def _require_same_chart(S, conn):
    if S.chart is not conn.chart:
        raise ChartMismatchError("structure and connection live on different charts")


# ---------------------------------------------------------------------------
# derived operators
# ---------------------------------------------------------------------------


def covariant_derivative(conn: AffineConnection, X: VectorField, Y: VectorField) -> VectorField:
    """(nabla_X Y)^k = X^i d_i Y^k + Gamma^k_ij X^i Y^j."""
    if X.chart is not conn.chart or Y.chart is not conn.chart:
        raise ChartMismatchError("fields and connection live on different charts")
    d = conn.chart.dim
    comps = []
    for k in range(d):
        terms = [X.derivative(Y.comps[k])]
        terms += [conn.gamma[k, i, j] * X.comps[i] * Y.comps[j] for i in range(d) for j in range(d)]
        comps.append(field_sum(terms, conn.chart))
    return VectorField(conn.chart, _objarray(comps, d))


def torsion(conn: AffineConnection, X: VectorField, Y: VectorField, p: Point) -> np.ndarray:
    """T(X,Y) = nabla_X Y - nabla_Y X - [X,Y] at p."""
    T = covariant_derivative(conn, X, Y) - covariant_derivative(conn, Y, X) - lie_bracket(X, Y)
    return T.at(p)


def torsion_at(conn: AffineConnection, p: Point) -> np.ndarray:
    """T[k, i, j] = T(d_i, d_j)^k = Gamma^k_ij - Gamma^k_ji."""
    G = conn.christoffel_at(p)
    return G - G.transpose(0, 2, 1)


def covariant_metric_derivative_at(conn: AffineConnection, g: MetricField, p: Point) -> np.ndarray:
    """Q[i, j, k] = (nabla_{d_i} g)(d_j, d_k) = d_i g_jk - Gamma^l_ij g_lk - Gamma^l_ik g_jl."""
    Gm, dGm = evaluate(g.comps, p, 1)
    gam = conn.christoffel_at(p)
    dg = np.einsum("jki->ijk", dGm)
    return dg - np.einsum("lij,lk->ijk", gam, Gm) - np.einsum("lik,jl->ijk", gam, Gm)


def metric_compat_residual(conn: AffineConnection, g: MetricField, points: Sequence[Point]) -> float:
    """max over coordinate triples and points of |X g(Y,Z) - g(nabla_X Y, Z) - g(Y, nabla_X Z)|."""
    return max(
        (float(np.max(np.abs(covariant_metric_derivative_at(conn, g, p)))) for p in points),
        default=0.0,
    )


def semi_symmetric_torsion_at(S: MetricFStructure, p: Point) -> np.ndarray:
    """Expected torsion sum_a (eta^a(Y) X - eta^a(X) Y) on coordinate arguments, as T[k, i, j]."""
    d = S.dim
    pi = S.at(p).eta.sum(axis=0)
    I = np.eye(d)
    # T(d_i, d_j)^k = pi_j delta^k_i - pi_i delta^k_j
    return np.einsum("j,ki->kij", pi, I) - np.einsum("i,kj->kij", pi, I)


def expected_non_metricity_at(S: MetricFStructure, p: Point) -> np.ndarray:
    """-sum_a (eta^a(Y) g(X,Z) + eta^a(Z) g(X,Y)) on coordinate arguments, as Q[x, y, z]."""
    st = S.at(p)
    pi = st.eta.sum(axis=0)
    return -(np.einsum("y,xz->xyz", pi, st.G) + np.einsum("z,xy->xyz", pi, st.G))
