"""Metric f-structures, their axioms, normality, the S-manifold condition and f-bases."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .diffcore import Chart, Point, evaluate, field_sum
from .records import Check, ValidationReport
from .tensorfield import (
    EndomorphismField,
    MetricField,
    OneForm,
    TwoForm,
    VectorField,
    _objarray,
    exterior_d,
)

DEFAULT_TOL = 1e-9
# below this norm a projected seed vector is treated as degenerate
BASIS_SEED_FLOOR = 1e-8


class StructureAt(NamedTuple):
    """All structure tensors evaluated at one point.

    ``F[k, j] = f^k_j``, ``xi[a, k] = xi_a^k``, ``eta[a, j] = eta^a_j``.
    """

    G: np.ndarray
    F: np.ndarray
    xi: np.ndarray
    eta: np.ndarray


@dataclass(eq=False)
class MetricFStructure:
    chart: Chart
    s: int
    f: EndomorphismField
    xi: list[VectorField]
    eta: list[OneForm]
    g: MetricField
    _phi: TwoForm | None = field(default=None, repr=False)
    _deta: list[TwoForm] | None = field(default=None, repr=False)

    def __post_init__(self):
        d = self.chart.dim
        if self.s < 1:
            raise ValueError("structure count s must be positive")
        if len(self.xi) != self.s or len(self.eta) != self.s:
            raise ValueError("need exactly s structure vector fields and s 1-forms")
        if (d - self.s) <= 0 or (d - self.s) % 2:
            raise ValueError(f"dim - s must be even and positive (dim={d}, s={self.s})")
        for obj in [self.f, self.g, *self.xi, *self.eta]:
            if obj.chart is not self.chart:
                raise ValueError("structure members live on different charts")

    @property
    def n(self) -> int:
        return (self.chart.dim - self.s) // 2

    @property
    def dim(self) -> int:
        return self.chart.dim

    def at(self, p: Point) -> StructureAt:
        G = evaluate(self.g.comps, p)
        return StructureAt(
            0.5 * (G + G.T),
            evaluate(self.f.comps, p),
            np.array([X.at(p) for X in self.xi]).reshape(self.s, -1),
            np.array([e.at(p) for e in self.eta]).reshape(self.s, -1),
        )

    @property
    def phi(self) -> TwoForm:
        if self._phi is None:
            self._phi = fundamental_form(self)
        return self._phi

    @property
    def d_eta(self) -> list[TwoForm]:
        if self._deta is None:
            self._deta = [exterior_d(e) for e in self.eta]
        return self._deta


# ---------------------------------------------------------------------------
# axioms
# ---------------------------------------------------------------------------


def _maxabs(a) -> float:
    return float(np.max(np.abs(a), initial=0.0))


def axiom_residuals(S: MetricFStructure, p: Point) -> dict[str, float]:
    G, F, Xi, Eta = S.at(p)
    d = S.dim
    I = np.eye(d)
    eta_xi = Eta.T @ Xi  # sum_a eta^a_j xi_a^k, as [j, k]
    return {
        "f2=-I+sum(eta(x)xi)": _maxabs(F @ F + I - eta_xi.T),
        "eta(xi)=delta": _maxabs(Eta @ Xi.T - np.eye(S.s)),
        "f(xi)=0": _maxabs(F @ Xi.T),
        "eta.f=0": _maxabs(Eta @ F),
        "g(fX,fY)=g(X,Y)-sum(eta(X)eta(Y))": _maxabs(F.T @ G @ F - G + Eta.T @ Eta),
        "eta(X)=g(X,xi)": _maxabs(Eta - Xi @ G),
        "g(X,fY)=-g(fX,Y)": _maxabs(G @ F + F.T @ G),
        "f3+f=0": _maxabs(F @ F @ F + F),
    }


def validate_axioms(S: MetricFStructure, points: Sequence[Point], tol: float = DEFAULT_TOL) -> ValidationReport:
    """Max residual of every metric f-structure axiom over coordinate arguments and points."""
    worst: dict[str, float] = {}
    pd_fail = 0
    for p in points:
        for k, v in axiom_residuals(S, p).items():
            worst[k] = max(worst.get(k, 0.0), v)
        try:
            np.linalg.cholesky(S.at(p).G)
        except np.linalg.LinAlgError:
            pd_fail += 1
    checks = [Check(k, v, tol, anchor=k) for k, v in worst.items()]
    checks.append(Check("g_positive_definite", float(pd_fail), 0.5, anchor="g Riemannian"))
    return ValidationReport(checks)


def fundamental_form(S: MetricFStructure) -> TwoForm:
    """Phi(X,Y) = g(X, fY), i.e. Phi_ij = g_ik f^k_j."""
    d = S.dim
    comps = _objarray(
        (field_sum((S.g.comps[i, k] * S.f.comps[k, j] for k in range(d)), S.chart) for i in range(d) for j in range(d)),
        (d, d),
    )
    return TwoForm(S.chart, comps)


def phi_at(S: MetricFStructure, p: Point) -> np.ndarray:
    st = S.at(p)
    return st.G @ st.F


def d_eta_at(S: MetricFStructure, p: Point) -> np.ndarray:
    """(d eta^a)_ij at p, shape (s, d, d), with the 1/2 convention."""
    out = []
    for e in S.eta:
        _, grads = evaluate(e.comps, p, 1)  # grads[j, i] = d_i eta_j
        out.append(0.5 * (grads.T - grads))
    return np.array(out)


def nijenhuis_tensor_at(f: EndomorphismField, p: Point) -> np.ndarray:
    """N[k, i, j] = ([f,f](d_i, d_j))^k from the jets of f at p.

    With coordinate arguments the brackets reduce to
    N^k_ij = f^l_i d_l f^k_j - f^l_j d_l f^k_i + f^k_m d_j f^m_i - f^k_m d_i f^m_j.
    """
    F, dF = evaluate(f.comps, p, 1)  # dF[k, j, l] = d_l f^k_j
    t1 = np.einsum("li,kjl->kij", F, dF)
    t3 = np.einsum("km,mij->kij", F, dF)
    return t1 - t1.transpose(0, 2, 1) + t3 - t3.transpose(0, 2, 1)


def normality_residual_at(S: MetricFStructure, p: Point) -> float:
    N = nijenhuis_tensor_at(S.f, p)
    dEta = d_eta_at(S, p)
    Xi = S.at(p).xi
    total = N + 2.0 * np.einsum("aij,ak->kij", dEta, Xi)
    return _maxabs(total)


def check_normality(S: MetricFStructure, points: Sequence[Point], tol: float = DEFAULT_TOL) -> ValidationReport:
    worst = max((normality_residual_at(S, p) for p in points), default=0.0)
    return ValidationReport(
        [Check("normality:[f,f]+2sum(d_eta(x)xi)=0", worst, tol, anchor="[f,f]+2 sum d eta^a (x) xi_a = 0")]
    )


def check_s_manifold(S: MetricFStructure, points: Sequence[Point], tol: float = DEFAULT_TOL) -> ValidationReport:
    """d eta^a = Phi for every a, plus an f-basis rank surrogate for the volume condition."""
    worst_d = 0.0
    worst_frame = 0.0
    rank_fail = 0
    for p in points:
        Phi = phi_at(S, p)
        for de in d_eta_at(S, p):
            worst_d = max(worst_d, _maxabs(de - Phi))
        try:
            B = f_basis(S, p, tol=1e-6)
        except ValueError:
            rank_fail += 1
            continue
        gram = B @ S.at(p).G @ B.T
        worst_frame = max(worst_frame, _maxabs(gram - np.eye(S.dim)))
    return ValidationReport(
        [
            Check("s_manifold:d_eta=Phi", worst_d, tol, anchor="Phi = d eta^a"),
            Check(
                "s_manifold:f_basis_spans",
                worst_frame if not rank_fail else float("inf"),
                tol,
                anchor="eta^1^...^eta^s^(d eta)^n != 0 (frame rank surrogate)",
                detail={"rank_failures": rank_fail},
            ),
        ]
    )


# ---------------------------------------------------------------------------
# frames and sampling
# ---------------------------------------------------------------------------


def project_to_l(st: StructureAt, v: np.ndarray) -> np.ndarray:
    """v - sum_a eta^a(v) xi_a."""
    return v - (st.eta @ v) @ st.xi


def _g_orthonormalize(v: np.ndarray, basis: Sequence[np.ndarray], G: np.ndarray) -> tuple[np.ndarray, float]:
    for _ in range(2):
        for b in basis:
            v = v - (b @ G @ v) * b
    norm = float(np.sqrt(max(v @ G @ v, 0.0)))
    return v, norm


def f_basis(S: MetricFStructure, p: Point, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Rows E_1..E_n, fE_1..fE_n, xi_1..xi_s, orthonormal for g(p).

    E_k is seeded from the coordinate directions in chart order, projected
    onto the distribution orthogonal to the structure vectors; seeds whose
    projection falls below BASIS_SEED_FLOOR are skipped.
    """
    st = S.at(p)
    d, n = S.dim, S.n
    Es: list[np.ndarray] = []
    chosen: list[np.ndarray] = []
    for k in range(d):
        if len(Es) == n:
            break
        v = project_to_l(st, np.eye(d)[k])
        v, norm = _g_orthonormalize(v, chosen, st.G)
        if norm < BASIS_SEED_FLOOR:
            continue
        E = v / norm
        fE = st.F @ E
        Es.append(E)
        chosen.extend([E, fE])
    if len(Es) < n:
        raise ValueError(f"f-basis construction degenerated: found {len(Es)} of {n} vectors")
    B = np.array(Es + [st.F @ E for E in Es] + list(st.xi))
    gram = B @ st.G @ B.T
    err = _maxabs(gram - np.eye(d))
    if err > tol:
        raise ValueError(f"f-basis not orthonormal (residual {err:.3e}); structure invalid at {p}")
    return B


def random_l_vector(S: MetricFStructure, p: Point, rng: np.random.Generator) -> np.ndarray:
    st = S.at(p)
    return project_to_l(st, rng.uniform(-1.0, 1.0, S.dim))


def orthonormal_l_pair(S: MetricFStructure, p: Point, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A random g-orthonormal pair X, Y in L at p."""
    st = S.at(p)
    while True:
        X, nx = _g_orthonormalize(random_l_vector(S, p, rng), [], st.G)
        if nx < 1e-6:
            continue
        X = X / nx
        Y, ny = _g_orthonormalize(random_l_vector(S, p, rng), [X], st.G)
        if ny < 1e-6:
            continue
        return X, Y / ny


def unit_l_vector(S: MetricFStructure, p: Point, rng: np.random.Generator) -> np.ndarray:
    st = S.at(p)
    while True:
        X, nx = _g_orthonormalize(random_l_vector(S, p, rng), [], st.G)
        if nx > 1e-6:
            return X / nx


def random_orthonormal_frame(G: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Rows form a g-orthonormal frame obtained from a random matrix by Gram-Schmidt."""
    d = G.shape[0]
    rows: list[np.ndarray] = []
    while len(rows) < d:
        v, norm = _g_orthonormalize(rng.uniform(-1.0, 1.0, d), rows, G)
        if norm > 1e-6:
            rows.append(v / norm)
    return np.array(rows)
