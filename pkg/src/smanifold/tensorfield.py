"""Vector fields, 1-forms, 2-forms, (1,1)-tensors and metrics over a chart.

Components are dense object arrays of :class:`~smanifold.diffcore.ScalarField`.
Index conventions:

* ``VectorField.comps[k]``     = X^k
* ``OneForm.comps[i]``         = eta_i
* ``TwoForm.comps[i, j]``      = omega(d_i, d_j)
* ``EndomorphismField.comps[k, j]`` = f^k_j, i.e. ``(fX)^k = f^k_j X^j``
* ``MetricField.comps[i, j]``  = g_ij

Exterior derivative convention (carries a factor 1/2)::

    d eta(X, Y) = 1/2 (X eta(Y) - Y eta(X) - eta([X, Y]))
    (d eta)_ij  = 1/2 (d_i eta_j - d_j eta_i)

This is the only normalisation under which the standard flat S-structure
satisfies ``d eta^a = Phi`` with ``Phi(X, Y) = g(X, fY)``; with the other
common normalisation (no 1/2) every S-manifold check below fails by a factor
of two.  Nothing else in the package depends on the choice.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .diffcore import (
    ArrayNode,
    Chart,
    ChartMismatchError,
    Jet,
    Point,
    ScalarField,
    arrays_to_jets,
    constant,
    evaluate,
    field_sum,
    jets_to_arrays,
    partial,
    zero,
)


def _objarray(items, shape) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    flat = list(items)
    for k, item in enumerate(flat):
        arr.flat[k] = item
    return arr


def _check_chart(*objs):
    chart = objs[0].chart
    for o in objs[1:]:
        if o.chart is not chart:
            raise ChartMismatchError("tensor fields live on different charts")
    return chart


class _Tensor:
    rank_shape: int = 0

    def __init__(self, chart: Chart, comps):
        comps = np.asarray(comps, dtype=object) if not isinstance(comps, np.ndarray) else comps
        expected = (chart.dim,) * self.rank_shape
        if comps.shape != expected:
            raise ValueError(f"expected component shape {expected}, got {comps.shape}")
        for c in comps.flat:
            if not isinstance(c, ScalarField) or c.chart is not chart:
                raise ChartMismatchError("component is not a ScalarField on this chart")
        self.chart = chart
        self.comps = comps

    def at(self, p: Point) -> np.ndarray:
        return evaluate(self.comps, p)

    def jets(self, p: Point, order: int = 1):
        return evaluate(self.comps, p, order)


class VectorField(_Tensor):
    rank_shape = 1

    def __add__(self, o: "VectorField") -> "VectorField":
        _check_chart(self, o)
        return VectorField(self.chart, _objarray((a + b for a, b in zip(self.comps, o.comps)), self.chart.dim))

    def __sub__(self, o: "VectorField") -> "VectorField":
        _check_chart(self, o)
        return VectorField(self.chart, _objarray((a - b for a, b in zip(self.comps, o.comps)), self.chart.dim))

    def __neg__(self):
        return self * -1.0

    def __mul__(self, c) -> "VectorField":
        """Multiply by a real or a ScalarField."""
        return VectorField(self.chart, _objarray((a * c for a in self.comps), self.chart.dim))

    __rmul__ = __mul__

    def derivative(self, phi: ScalarField) -> ScalarField:
        """X(phi) = X^i d_i phi."""
        return field_sum((self.comps[i] * partial(phi, i) for i in range(self.chart.dim)), self.chart)


class OneForm(_Tensor):
    rank_shape = 1

    def __call__(self, X: VectorField) -> ScalarField:
        _check_chart(self, X)
        return field_sum((a * b for a, b in zip(self.comps, X.comps)), self.chart)

    def __add__(self, o: "OneForm") -> "OneForm":
        _check_chart(self, o)
        return OneForm(self.chart, _objarray((a + b for a, b in zip(self.comps, o.comps)), self.chart.dim))

    def __mul__(self, c) -> "OneForm":
        return OneForm(self.chart, _objarray((a * c for a in self.comps), self.chart.dim))

    __rmul__ = __mul__


class TwoForm(_Tensor):
    rank_shape = 2

    def __call__(self, X: VectorField, Y: VectorField) -> ScalarField:
        _check_chart(self, X, Y)
        d = self.chart.dim
        return field_sum(
            (self.comps[i, j] * X.comps[i] * Y.comps[j] for i in range(d) for j in range(d)), self.chart
        )


class EndomorphismField(_Tensor):
    rank_shape = 2

    def __call__(self, X: VectorField) -> VectorField:
        return endo_apply(self, X)

    def compose(self, o: "EndomorphismField") -> "EndomorphismField":
        """(self o o)^k_j = self^k_l o^l_j."""
        _check_chart(self, o)
        d = self.chart.dim
        return EndomorphismField(
            self.chart,
            _objarray(
                (
                    field_sum((self.comps[k, l] * o.comps[l, j] for l in range(d)), self.chart)
                    for k in range(d)
                    for j in range(d)
                ),
                (d, d),
            ),
        )

    def __neg__(self):
        d = self.chart.dim
        return EndomorphismField(self.chart, _objarray((-c for c in self.comps.flat), (d, d)))


class _MatrixInverse(ArrayNode):
    """Exact second-order jets of the inverse of a matrix field.

    d_m A^{-1} = -A^{-1} (d_m A) A^{-1}
    d_m d_n A^{-1} = A^{-1} (A_m A^{-1} A_n + A_n A^{-1} A_m - A_mn) A^{-1}
    """

    def __init__(self, comps: np.ndarray):
        super().__init__(comps.flat[0].chart, comps.shape)
        self.inputs = comps

    def _compute(self, ctx):
        flat = [c._eval(ctx) for c in self.inputs.flat]
        n = ctx.dim
        have_hess = all(j.hess is not None for j in flat)
        if have_hess:
            A, dA, ddA = jets_to_arrays(flat, self.shape, n, 2)
        else:
            A, dA = jets_to_arrays(flat, self.shape, n, 1)
        inv = np.linalg.inv(A)
        dinv = -np.einsum("ab,bcm,cd->adm", inv, dA, inv)
        if not have_hess:
            return arrays_to_jets(inv, dinv)
        t = np.einsum("abm,bc,cdn->admn", dA, inv, dA)
        inner = t + t.transpose(0, 1, 3, 2) - ddA
        ddinv = np.einsum("ab,bcmn,cd->admn", inv, inner, inv)
        return arrays_to_jets(inv, dinv, ddinv)


class MetricField(_Tensor):
    rank_shape = 2

    def __init__(self, chart: Chart, comps):
        super().__init__(chart, comps)
        self._inverse = None

    def pair(self, X: VectorField, Y: VectorField) -> ScalarField:
        _check_chart(self, X, Y)
        d = self.chart.dim
        return field_sum(
            (self.comps[i, j] * X.comps[i] * Y.comps[j] for i in range(d) for j in range(d)), self.chart
        )

    def inverse(self) -> np.ndarray:
        """g^{ij} as ScalarFields (exact to second order)."""
        if self._inverse is None:
            self._inverse = _MatrixInverse(self.comps).components()
        return self._inverse

    def flat(self, X: VectorField) -> OneForm:
        d = self.chart.dim
        return OneForm(
            self.chart,
            _objarray((field_sum((self.comps[i, j] * X.comps[j] for j in range(d)), self.chart) for i in range(d)), d),
        )

    def at(self, p: Point) -> np.ndarray:
        return metric_at(self, p)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def vector_field(chart: Chart, comps: Sequence) -> VectorField:
    return VectorField(chart, _objarray((_as_field(chart, c) for c in comps), chart.dim))


def one_form(chart: Chart, comps: Sequence) -> OneForm:
    return OneForm(chart, _objarray((_as_field(chart, c) for c in comps), chart.dim))


def endomorphism(chart: Chart, comps) -> EndomorphismField:
    d = chart.dim
    rows = list(comps)
    return EndomorphismField(chart, _objarray((_as_field(chart, c) for row in rows for c in row), (d, d)))


def metric(chart: Chart, comps) -> MetricField:
    d = chart.dim
    rows = list(comps)
    return MetricField(chart, _objarray((_as_field(chart, c) for row in rows for c in row), (d, d)))


def two_form(chart: Chart, comps) -> TwoForm:
    d = chart.dim
    rows = list(comps)
    return TwoForm(chart, _objarray((_as_field(chart, c) for row in rows for c in row), (d, d)))


def _as_field(chart: Chart, c) -> ScalarField:
    if isinstance(c, ScalarField):
        if c.chart is not chart:
            raise ChartMismatchError("component lives on a different chart")
        return c
    return constant(chart, float(c))


def coordinate_vector(chart: Chart, i: int) -> VectorField:
    return vector_field(chart, [1.0 if k == i else 0.0 for k in range(chart.dim)])


def constant_vector(chart: Chart, v: Sequence[float]) -> VectorField:
    return vector_field(chart, list(np.asarray(v, dtype=float)))


def identity_endomorphism(chart: Chart) -> EndomorphismField:
    return endomorphism(chart, np.eye(chart.dim))


def identity_metric(chart: Chart) -> MetricField:
    return metric(chart, np.eye(chart.dim))


def exact_form(phi: ScalarField) -> OneForm:
    """d phi as a OneForm (components are first partials)."""
    return OneForm(phi.chart, _objarray((partial(phi, i) for i in range(phi.chart.dim)), phi.chart.dim))


# ---------------------------------------------------------------------------
# differential operators
# ---------------------------------------------------------------------------


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X,Y]^k = X^i d_i Y^k - Y^i d_i X^k."""
    chart = _check_chart(X, Y)
    d = chart.dim
    comps = []
    for k in range(d):
        terms = []
        for i in range(d):
            terms.append(X.comps[i] * partial(Y.comps[k], i))
            terms.append(-(Y.comps[i] * partial(X.comps[k], i)))
        comps.append(field_sum(terms, chart))
    return VectorField(chart, _objarray(comps, d))


def exterior_d(eta: OneForm) -> TwoForm:
    """(d eta)_ij = 1/2 (d_i eta_j - d_j eta_i); see module docstring."""
    chart = eta.chart
    d = chart.dim
    comps = np.empty((d, d), dtype=object)
    for i in range(d):
        comps[i, i] = zero(chart)
        for j in range(i + 1, d):
            c = (partial(eta.comps[j], i) - partial(eta.comps[i], j)) * 0.5
            comps[i, j] = c
            comps[j, i] = -c
    return TwoForm(chart, comps)


def endo_apply(f: EndomorphismField, X: VectorField) -> VectorField:
    chart = _check_chart(f, X)
    d = chart.dim
    return VectorField(
        chart,
        _objarray((field_sum((f.comps[k, j] * X.comps[j] for j in range(d)), chart) for k in range(d)), d),
    )


def nijenhuis_field(f: EndomorphismField, X: VectorField, Y: VectorField) -> VectorField:
    """[f,f](X,Y) = f^2[X,Y] + [fX,fY] - f[fX,Y] - f[X,fY]."""
    _check_chart(f, X, Y)
    fX, fY = endo_apply(f, X), endo_apply(f, Y)
    return (
        endo_apply(f, endo_apply(f, lie_bracket(X, Y)))
        + lie_bracket(fX, fY)
        - endo_apply(f, lie_bracket(fX, Y))
        - endo_apply(f, lie_bracket(X, fY))
    )


def nijenhuis(f: EndomorphismField, X: VectorField, Y: VectorField, p: Point) -> np.ndarray:
    return nijenhuis_field(f, X, Y).at(p)


# ---------------------------------------------------------------------------
# pointwise contractions
# ---------------------------------------------------------------------------


def evaluate_vector(X: VectorField, p: Point) -> np.ndarray:
    return X.at(p)


def metric_at(g: MetricField, p: Point) -> np.ndarray:
    G = evaluate(g.comps, p)
    return 0.5 * (G + G.T)


def metric_pair(g: MetricField, X: VectorField, Y: VectorField, p: Point) -> float:
    return float(X.at(p) @ metric_at(g, p) @ Y.at(p))


def oneform_apply(eta: OneForm, X: VectorField, p: Point) -> float:
    return float(eta.at(p) @ X.at(p))


def two_form_apply(omega: TwoForm, X: VectorField, Y: VectorField, p: Point) -> float:
    return float(X.at(p) @ omega.at(p) @ Y.at(p))


def metric_inverse_at(g: MetricField, p: Point) -> np.ndarray:
    """Inverse metric at p; raises numpy.linalg.LinAlgError if g(p) is not positive definite."""
    G = metric_at(g, p)
    L = np.linalg.cholesky(G)
    Linv = np.linalg.inv(L)
    return Linv.T @ Linv


def is_positive_definite(g: MetricField, p: Point) -> bool:
    try:
        np.linalg.cholesky(metric_at(g, p))
    except np.linalg.LinAlgError:
        return False
    return True


__all__ = [
    "VectorField",
    "OneForm",
    "TwoForm",
    "EndomorphismField",
    "MetricField",
    "Jet",
    "vector_field",
    "one_form",
    "endomorphism",
    "metric",
    "two_form",
    "coordinate_vector",
    "constant_vector",
    "identity_endomorphism",
    "identity_metric",
    "exact_form",
    "lie_bracket",
    "exterior_d",
    "endo_apply",
    "nijenhuis",
    "nijenhuis_field",
    "evaluate_vector",
    "metric_at",
    "metric_pair",
    "oneform_apply",
    "two_form_apply",
    "metric_inverse_at",
    "is_positive_definite",
]
