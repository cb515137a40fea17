"""Concrete S-structures: the standard flat one and a deformed hypersurface one.

``flat_example(m, t)`` is R^{2m+t} with coordinates
(x_1..x_m, y_1..y_m, z_1..z_t) and

    xi_a  = 2 d/dz_a
    eta^a = 1/2 (dz_a - sum_i y_i dx_i)
    g     = sum_a eta^a (x) eta^a + 1/4 sum_i (dx_i^2 + dy_i^2)
    f(d/dx_i) = -d/dy_i,  f(d/dy_i) = d/dx_i + y_i sum_a d/dz_a,  f(d/dz_a) = 0

an S-space-form with f-sectional curvature -3t.

``sphere_example(n, s)`` starts from ``flat_example(n+1, s-1)``, adds

    xi_s = sum_i (-y_i d/dx_i + x_i d/dy_i) - sum_{i,a} y_i^2 d/dz_a,  eta^s = g(., xi_s)

deforms (xi_a -> s xi_a, eta^a -> eta^a / s, g -> g/s + (1-s)/s^2 sum_a eta^a (x) eta^a)
and restricts to S^{2n+1}(2) x R^{s-1} through the graph chart
x_{n+1} = +sqrt(4 - sum_{i<=n} x_i^2 - sum_i y_i^2).  The result is an
S-space-form with f-sectional curvature s.

The restricted f is the tangential part of the ambient f with respect to the
ambient metric.  The ambient f does not preserve the hypersurface: on it,
f(X) = f_M(X) + eta^s(X) N with N the unit normal and xi_s = -f N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import curvature as cv
from .diffcore import Chart, Point, ScalarField, compose, constant, coordinate, field_sum, reciprocal, sqrt, zero
from .fstructure import MetricFStructure
from .tensorfield import (
    EndomorphismField,
    MetricField,
    OneForm,
    VectorField,
    _objarray,
    endomorphism,
    metric,
    one_form,
    vector_field,
)

SPHERE_RADIUS = 2.0
# graph chart radicand floor and sampling box for the hypersurface
PATCH_RADICAND_FLOOR = 0.25
SPHERE_SAMPLE_HALFWIDTH = 0.5
Z_SAMPLE_HALFWIDTH = 1.0
FLAT_SAMPLE_HALFWIDTH = 1.0


class OutsidePatchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# flat example
# ---------------------------------------------------------------------------


def _flat_fields(chart: Chart, m: int, t: int):
    u = [coordinate(chart, i) for i in range(chart.dim)]
    xs, ys = u[:m], u[m : 2 * m]
    d = chart.dim
    ix = lambda i: i  # noqa: E731
    iy = lambda i: m + i  # noqa: E731
    iz = lambda a: 2 * m + a  # noqa: E731

    xi = []
    eta = []
    for a in range(t):
        xi.append(vector_field(chart, [2.0 if k == iz(a) else 0.0 for k in range(d)]))
        comps = [zero(chart)] * d
        for i in range(m):
            comps[ix(i)] = ys[i] * -0.5
        comps[iz(a)] = constant(chart, 0.5)
        eta.append(one_form(chart, comps))

    F = [[zero(chart) for _ in range(d)] for _ in range(d)]
    for i in range(m):
        F[iy(i)][ix(i)] = constant(chart, -1.0)
        F[ix(i)][iy(i)] = constant(chart, 1.0)
        for a in range(t):
            F[iz(a)][iy(i)] = ys[i]
    f = endomorphism(chart, F)

    G = [[zero(chart) for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            G[i][j] = field_sum((e.comps[i] * e.comps[j] for e in eta), chart)
    for i in range(2 * m):
        G[i][i] = G[i][i] + 0.25
    g = metric(chart, G)
    return f, xi, eta, g, xs, ys


def flat_chart(m: int, t: int) -> Chart:
    names = [f"x{i + 1}" for i in range(m)] + [f"y{i + 1}" for i in range(m)] + [f"z{a + 1}" for a in range(t)]
    return Chart(2 * m + t, tuple(names))


# ---------------------------------------------------------------------------
# embedding and pullback
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Embedding:
    """A map from a domain chart into an ambient chart, with its Jacobian as fields.

    ``jacobian[a, k]`` = d(maps[a]) / du_k, supplied as ScalarFields so that
    pulled-back tensors stay differentiable to second order.
    """

    domain: Chart
    ambient: Chart
    maps: tuple[ScalarField, ...]
    jacobian: np.ndarray

    def __post_init__(self):
        if len(self.maps) != self.ambient.dim:
            raise ValueError("need one map per ambient coordinate")
        if self.jacobian.shape != (self.ambient.dim, self.domain.dim):
            raise ValueError("Jacobian shape must be (ambient dim, domain dim)")
        if self.ambient.dim < self.domain.dim:
            raise ValueError("ambient dimension must not be below the domain dimension")

    def image(self, p: Point) -> Point:
        return Point(self.ambient, [m(p) for m in self.maps])

    def jacobian_at(self, p: Point) -> np.ndarray:
        return np.array([[c(p) for c in row] for row in self.jacobian])

    def min_singular_value(self, p: Point) -> float:
        return float(np.linalg.svd(self.jacobian_at(p), compute_uv=False).min())

    def pull(self, field: ScalarField) -> ScalarField:
        return compose(field, self.maps, key=self)


def identity_embedding(chart: Chart) -> Embedding:
    maps = tuple(coordinate(chart, i) for i in range(chart.dim))
    jac = _objarray((constant(chart, 1.0 if a == k else 0.0) for a in range(chart.dim) for k in range(chart.dim)), (chart.dim, chart.dim))
    return Embedding(chart, chart, maps, jac)


def _matmul_fields(A: np.ndarray, B: np.ndarray, chart: Chart) -> np.ndarray:
    r, k = A.shape
    k2, c = B.shape
    assert k == k2
    return _objarray(
        (field_sum((A[i, l] * B[l, j] for l in range(k)), chart) for i in range(r) for j in range(c)), (r, c)
    )


@dataclass(eq=False)
class PulledBack:
    structure: MetricFStructure
    embedding: Embedding
    ambient_xi: list[VectorField]
    ambient_f: EndomorphismField
    ambient_g: MetricField

    def xi_tangency_residual(self, p: Point) -> float:
        """max_a |J xi_pulled_a - xi_a(image)|: ambient structure vectors must be tangent."""
        J = self.embedding.jacobian_at(p)
        q = self.embedding.image(p)
        return max(float(np.max(np.abs(J @ xp.at(p) - xa.at(q)))) for xp, xa in zip(self.structure.xi, self.ambient_xi))

    def f_normal_component(self, p: Point) -> float:
        """Size of the ambient-g-normal part of f(J v) over coordinate v (diagnostic only)."""
        J = self.embedding.jacobian_at(p)
        q = self.embedding.image(p)
        F = self.ambient_f.at(q)
        fM = self.structure.f.at(p)
        return float(np.max(np.abs(F @ J - J @ fM)))


def pullback_structure(
    e: Embedding,
    f: EndomorphismField,
    xi: Sequence[VectorField],
    eta: Sequence[OneForm],
    g: MetricField,
) -> PulledBack:
    """Restrict an ambient metric f-structure to the image of ``e``.

    g_M = J^T G J, eta_M = eta J, and vectors are carried back by the
    G-orthogonal projection J^+ = (J^T G J)^{-1} J^T G:
    xi_M = J^+ xi (exact when xi is tangent), f_M = J^+ F J (the tangential
    part of f).
    """
    D = e.domain
    d = D.dim
    N = e.ambient.dim
    J = e.jacobian
    Gc = _objarray((e.pull(c) for c in g.comps.flat), (N, N))
    Fc = _objarray((e.pull(c) for c in f.comps.flat), (N, N))
    GJ = _matmul_fields(Gc, J, D)  # (N, d)
    H = _matmul_fields(J.T.copy(), GJ, D)  # (d, d)
    # exact symmetry for the metric components
    for k in range(d):
        for l in range(k + 1, d):
            H[l, k] = H[k, l]
    gM = MetricField(D, H)
    Hinv = gM.inverse()
    JtG = GJ.T.copy()  # (d, N) since G symmetric

    xiM = []
    for X in xi:
        xc = _objarray((e.pull(c) for c in X.comps), (N, 1))
        v = _matmul_fields(Hinv, _matmul_fields(JtG, xc, D), D)
        xiM.append(VectorField(D, _objarray(v[:, 0], d)))
    etaM = []
    for w in eta:
        wc = _objarray((e.pull(c) for c in w.comps), (1, N))
        etaM.append(OneForm(D, _objarray(_matmul_fields(wc, J, D)[0], d)))
    FJ = _matmul_fields(Fc, J, D)
    fM = EndomorphismField(D, _matmul_fields(Hinv, _matmul_fields(JtG, FJ, D), D))
    S = MetricFStructure(D, len(xi), fM, xiM, etaM, gM)
    return PulledBack(S, e, list(xi), f, g)


# ---------------------------------------------------------------------------
# named examples
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class NamedExample:
    tag: str
    params: dict[str, int]
    structure: MetricFStructure
    expected_c: float
    expected: dict[str, float | None]
    sampler: object = field(repr=False, default=None)
    pulled: PulledBack | None = field(repr=False, default=None)
    ambient_fields: tuple | None = field(repr=False, default=None)
    constant_kl: bool = False

    @property
    def chart(self) -> Chart:
        return self.structure.chart

    @property
    def label(self) -> str:
        return f"{self.tag}:" + ",".join(str(v) for v in self.params.values())

    def sample_points(self, count: int, rng: np.random.Generator) -> list[Point]:
        return [self.sampler(rng) for _ in range(count)]


def _expected_constants(n: int, s: int, c: float, constant_kl: bool) -> dict[str, float | None]:
    if constant_kl:
        return {
            "c": c,
            "K_L": float(s),
            "tau": cv.tau_constant_kl(n, s),
            "tau_star": cv.tau_star_constant_kl(n, s),
            "tau_tilde": cv.tau_tilde_constant_kl(n, s),
        }
    return {
        "c": c,
        "K_L": None,
        "tau": cv.tau_space_form(n, s, c),
        "tau_star": cv.tau_star_space_form(n, s, c),
        "tau_tilde": cv.tau_tilde_space_form(n, s, c),
    }


def flat_example(m: int, t: int) -> NamedExample:
    if m < 1 or t < 1:
        raise ValueError("flat example needs m >= 1 and t >= 1")
    chart = flat_chart(m, t)
    f, xi, eta, g, _, _ = _flat_fields(chart, m, t)
    S = MetricFStructure(chart, t, f, xi, eta, g)
    c = -3.0 * t

    def sampler(rng):
        return Point(chart, rng.uniform(-FLAT_SAMPLE_HALFWIDTH, FLAT_SAMPLE_HALFWIDTH, chart.dim))

    return NamedExample(
        "flat",
        {"m": m, "t": t},
        S,
        c,
        _expected_constants(m, t, c, constant_kl=False),
        sampler,
    )


def sphere_embedding(n: int, s: int) -> Embedding:
    """Graph chart of S^{2n+1}(2) x R^{s-1} inside R^{2n+2+(s-1)}.

    Domain coordinates: (x_1..x_n, y_1..y_{n+1}, z_1..z_{s-1}); the missing
    x_{n+1} is the positive root.
    """
    m, t = n + 1, s - 1
    ambient = flat_chart(m, t)
    names = [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(m)] + [f"z{a + 1}" for a in range(t)]
    D = Chart(2 * n + 1 + t, tuple(names))
    u = [coordinate(D, k) for k in range(D.dim)]
    sphere_coords = u[: 2 * n + 1]
    radicand = constant(D, SPHERE_RADIUS**2) - field_sum((c * c for c in sphere_coords), D)
    w = _PatchGuard(sqrt(radicand), radicand)
    inv_w = reciprocal(w)

    # ambient index -> domain index (None for x_{n+1})
    amb_to_dom: list[int | None] = []
    for i in range(m):
        amb_to_dom.append(i if i < n else None)
    for i in range(m):
        amb_to_dom.append(n + i)
    for a in range(t):
        amb_to_dom.append(2 * n + 1 + a)

    maps = tuple(w if k is None else u[k] for k in amb_to_dom)
    jac = np.empty((ambient.dim, D.dim), dtype=object)
    for a, k in enumerate(amb_to_dom):
        for l in range(D.dim):
            if k is not None:
                jac[a, l] = constant(D, 1.0 if k == l else 0.0)
            elif l < 2 * n + 1:
                jac[a, l] = -(u[l] * inv_w)
            else:
                jac[a, l] = zero(D)
    return Embedding(D, ambient, maps, jac)


class _PatchGuard(ScalarField):
    """Passes ``inner`` through, refusing points where the radicand leaves the patch."""

    __slots__ = ("inner", "radicand")

    def __init__(self, inner: ScalarField, radicand: ScalarField):
        super().__init__(inner.chart)
        self.inner, self.radicand = inner, radicand

    def _compute(self, ctx):
        r = self.radicand._eval(ctx).value
        if r <= PATCH_RADICAND_FLOOR:
            raise OutsidePatchError(f"point outside the chart patch (radicand {r:.4f} <= {PATCH_RADICAND_FLOOR})")
        return self.inner._eval(ctx)


def sphere_ambient_structure(n: int, s: int, chart: Chart | None = None):
    """The undeformed ambient pieces: flat structure on R^{2n+2+(s-1)} plus xi_s and eta^s."""
    m, t = n + 1, s - 1
    A = flat_chart(m, t) if chart is None else chart
    f, xi, eta, g, xs, ys = _flat_fields(A, m, t)
    comps = []
    for i in range(m):
        comps.append(-ys[i])
    for i in range(m):
        comps.append(xs[i])
    ysq = field_sum((y * y for y in ys), A)
    for _ in range(t):
        comps.append(-ysq)
    xi_s = vector_field(A, comps)
    eta_s = g.flat(xi_s)
    return A, f, xi + [xi_s], eta + [eta_s], g


def deform(chart: Chart, s: int, f, xi, eta, g):
    """xi -> s xi, eta -> eta/s, g -> g/s + (1-s)/s^2 sum_a eta^a (x) eta^a."""
    d = chart.dim
    xi_t = [X * float(s) for X in xi]
    eta_t = [e * (1.0 / s) for e in eta]
    k = (1.0 - s) / s**2
    G = [
        [g.comps[i, j] * (1.0 / s) + field_sum((e.comps[i] * e.comps[j] for e in eta), chart) * k for j in range(d)]
        for i in range(d)
    ]
    return f, xi_t, eta_t, metric(chart, G)


def sphere_example(n: int, s: int) -> NamedExample:
    if n < 1 or s < 2:
        raise ValueError("sphere example needs n >= 1 and s >= 2")
    e = sphere_embedding(n, s)
    A, f, xi, eta, g = sphere_ambient_structure(n, s, e.ambient)
    ambient_undeformed = (f, xi, eta, g)
    fd, xid, etad, gd = deform(A, s, f, xi, eta, g)
    pb = pullback_structure(e, fd, xid, etad, gd)
    D = e.domain

    def sampler(rng):
        sph = rng.uniform(-SPHERE_SAMPLE_HALFWIDTH, SPHERE_SAMPLE_HALFWIDTH, 2 * n + 1)
        z = rng.uniform(-Z_SAMPLE_HALFWIDTH, Z_SAMPLE_HALFWIDTH, s - 1)
        return Point(D, np.concatenate([sph, z]))

    ex = NamedExample(
        "sphere",
        {"n": n, "s": s},
        pb.structure,
        float(s),
        _expected_constants(n, s, float(s), constant_kl=True),
        sampler,
        pulled=pb,
        ambient_fields=ambient_undeformed,
        constant_kl=True,
    )
    return ex


def build(tag: str, a: int, b: int) -> NamedExample:
    if tag == "flat":
        return flat_example(a, b)
    if tag == "sphere":
        return sphere_example(a, b)
    raise ValueError(f"unknown example tag {tag!r}")


def parse_tag(text: str) -> NamedExample:
    """``flat:m,t`` or ``sphere:n,s``."""
    tag, _, rest = text.partition(":")
    try:
        a, b = (int(v) for v in rest.split(","))
    except ValueError as exc:
        raise ValueError(f"malformed example tag {text!r}") from exc
    return build(tag, a, b)
