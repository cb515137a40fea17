"""Second-order forward-mode differentiation over a coordinate chart.

A :class:`ScalarField` is a node in an expression DAG.  Evaluating it at a
:class:`Point` propagates a :class:`Jet` (value, gradient, Hessian) through
the DAG, so every derivative is exact up to floating-point round-off.  Each
point carries a memo, so shared sub-expressions are evaluated once per point.

The core rule set is ``+``, ``-``, ``*`` and scalar multiples.  Three extra
rules exist for the hypersurface chart and for derived quantities:

* :func:`sqrt`: ``d sqrt(u) = u' / (2 sqrt u)``,
  ``d2 sqrt(u) = u'' / (2 sqrt u) - u' u'^T / (4 u^{3/2})``.
* :func:`reciprocal`: ``d (1/u) = -u'/u^2``,
  ``d2 (1/u) = -u''/u^2 + 2 u' u'^T / u^3``.
* :func:`partial`: the exact partial derivative of a field.  The result has
  an exact value and gradient but no Hessian (that would need third
  derivatives), so Hessian-consuming code raises on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class ChartMismatchError(ValueError):
    pass


class MissingDerivativeError(ValueError):
    """Raised when a derivative order beyond what a field carries is requested."""


@dataclass(frozen=True, eq=False)
class Chart:
    dim: int
    coord_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"chart dimension must be >= 1, got {self.dim}")
        if not self.coord_names:
            object.__setattr__(self, "coord_names", tuple(f"u{i}" for i in range(self.dim)))
        if len(self.coord_names) != self.dim:
            raise ValueError("coord_names must have exactly dim entries")

    def point(self, coords) -> "Point":
        return Point(self, coords)


class Point:
    """A point of a chart.  Also owns the per-point evaluation memo."""

    __slots__ = ("chart", "coords", "_memo", "_seeds")

    def __init__(self, chart: Chart, coords):
        coords = np.asarray(coords, dtype=float).reshape(-1)
        if coords.shape[0] != chart.dim:
            raise ValueError(f"expected {chart.dim} coordinates, got {coords.shape[0]}")
        self.chart = chart
        self.coords = coords
        self.coords.setflags(write=False)
        self._memo: dict[int, tuple[object, object]] = {}
        self._seeds: list[Jet] | None = None

    def seeds(self) -> list["Jet"]:
        if self._seeds is None:
            d = self.chart.dim
            eye = np.eye(d)
            zero = np.zeros((d, d))
            self._seeds = [Jet(float(c), eye[i].copy(), zero) for i, c in enumerate(self.coords)]
        return self._seeds

    def __repr__(self):
        return f"Point({np.array2string(self.coords, precision=6)})"


class _Context:
    """Evaluation context: the input jets plus a memo keyed by node identity."""

    __slots__ = ("inputs", "memo", "dim")

    def __init__(self, inputs: Sequence["Jet"], memo: dict, dim: int):
        self.inputs = inputs
        self.memo = memo
        self.dim = dim


class Jet:
    """Value, gradient and (optionally) Hessian of a scalar at a point."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray | None, hess: np.ndarray | None):
        self.value = value
        self.grad = grad
        self.hess = hess

    @staticmethod
    def const(v: float, dim: int) -> "Jet":
        return Jet(float(v), np.zeros(dim), np.zeros((dim, dim)))

    def __add__(self, o: "Jet") -> "Jet":
        return Jet(
            self.value + o.value,
            None if self.grad is None or o.grad is None else self.grad + o.grad,
            None if self.hess is None or o.hess is None else self.hess + o.hess,
        )

    def __sub__(self, o: "Jet") -> "Jet":
        return Jet(
            self.value - o.value,
            None if self.grad is None or o.grad is None else self.grad - o.grad,
            None if self.hess is None or o.hess is None else self.hess - o.hess,
        )

    def __mul__(self, o: "Jet") -> "Jet":
        a, b = self, o
        grad = hess = None
        if a.grad is not None and b.grad is not None:
            grad = a.value * b.grad + b.value * a.grad
            if a.hess is not None and b.hess is not None:
                cross = np.outer(a.grad, b.grad)
                hess = a.value * b.hess + b.value * a.hess + cross + cross.T
        return Jet(a.value * b.value, grad, hess)

    def scale(self, c: float) -> "Jet":
        return Jet(
            c * self.value,
            None if self.grad is None else c * self.grad,
            None if self.hess is None else c * self.hess,
        )

    def compose(self, f0: float, f1: float, f2: float) -> "Jet":
        """Chain rule for a univariate function with value/derivatives f0, f1, f2 at self.value."""
        grad = hess = None
        if self.grad is not None:
            grad = f1 * self.grad
            if self.hess is not None:
                hess = f1 * self.hess + f2 * np.outer(self.grad, self.grad)
        return Jet(f0, grad, hess)


# ---------------------------------------------------------------------------
# DAG nodes
# ---------------------------------------------------------------------------


class ScalarField:
    """A smooth real function on a chart, evaluated with exact derivatives."""

    __slots__ = ("chart", "__weakref__")

    def __init__(self, chart: Chart):
        self.chart = chart

    # -- evaluation -------------------------------------------------------
    def _compute(self, ctx: _Context) -> Jet:
        raise NotImplementedError

    def _eval(self, ctx: _Context) -> Jet:
        key = id(self)
        hit = ctx.memo.get(key)
        if hit is not None:
            return hit[1]
        jet = self._compute(ctx)
        # keep the node alive so its id cannot be recycled while memoised
        ctx.memo[key] = (self, jet)
        return jet

    def jet(self, p: Point) -> Jet:
        if p.chart is not self.chart:
            raise ChartMismatchError("point and field live on different charts")
        return self._eval(_Context(p.seeds(), p._memo, p.chart.dim))

    def __call__(self, p: Point) -> float:
        return self.jet(p).value

    def gradient(self, p: Point) -> np.ndarray:
        g = self.jet(p).grad
        if g is None:
            raise MissingDerivativeError("field carries no gradient")
        return g

    def hessian(self, p: Point) -> np.ndarray:
        h = self.jet(p).hess
        if h is None:
            raise MissingDerivativeError("field carries no Hessian")
        return h

    @property
    def is_zero(self) -> bool:
        return False

    # -- arithmetic -------------------------------------------------------
    def _lift(self, other) -> "ScalarField":
        if isinstance(other, ScalarField):
            if other.chart is not self.chart:
                raise ChartMismatchError("fields live on different charts")
            return other
        return constant(self.chart, float(other))

    def __add__(self, other):
        return _add(self, self._lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return _add(self, _scale(self._lift(other), -1.0))

    def __rsub__(self, other):
        return _add(self._lift(other), _scale(self, -1.0))

    def __neg__(self):
        return _scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return _mul(self, self._lift(other))
        return _scale(self, float(other))

    __rmul__ = __mul__


class _Const(ScalarField):
    __slots__ = ("v",)

    def __init__(self, chart, v):
        super().__init__(chart)
        self.v = v

    @property
    def is_zero(self):
        return self.v == 0.0

    def _compute(self, ctx):
        return Jet.const(self.v, ctx.dim)


class _Coord(ScalarField):
    __slots__ = ("i",)

    def __init__(self, chart, i):
        super().__init__(chart)
        self.i = i

    def _compute(self, ctx):
        return ctx.inputs[self.i]


class _Add(ScalarField):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__(a.chart)
        self.a, self.b = a, b

    def _compute(self, ctx):
        return self.a._eval(ctx) + self.b._eval(ctx)


class _Mul(ScalarField):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__(a.chart)
        self.a, self.b = a, b

    def _compute(self, ctx):
        return self.a._eval(ctx) * self.b._eval(ctx)


class _Scale(ScalarField):
    __slots__ = ("a", "c")

    def __init__(self, a, c):
        super().__init__(a.chart)
        self.a, self.c = a, c

    def _compute(self, ctx):
        return self.a._eval(ctx).scale(self.c)


class _Unary(ScalarField):
    __slots__ = ("a", "rule")

    def __init__(self, a, rule: Callable[[float], tuple[float, float, float]]):
        super().__init__(a.chart)
        self.a, self.rule = a, rule

    def _compute(self, ctx):
        j = self.a._eval(ctx)
        return j.compose(*self.rule(j.value))


class _Partial(ScalarField):
    __slots__ = ("a", "i")

    def __init__(self, a, i):
        super().__init__(a.chart)
        self.a, self.i = a, i

    def _compute(self, ctx):
        j = self.a._eval(ctx)
        if j.grad is None:
            raise MissingDerivativeError("cannot differentiate a field without a gradient")
        return Jet(float(j.grad[self.i]), None if j.hess is None else j.hess[self.i].copy(), None)


class _Compose(ScalarField):
    """An outer field evaluated on the jets of ``maps`` (one per outer coordinate)."""

    __slots__ = ("outer", "maps", "key")

    def __init__(self, outer: ScalarField, maps: tuple[ScalarField, ...], key: object):
        super().__init__(maps[0].chart)
        self.outer, self.maps, self.key = outer, maps, key

    def _compute(self, ctx):
        subkey = ("sub", id(self.key))
        hit = ctx.memo.get(subkey)
        if hit is None:
            inputs = [m._eval(ctx) for m in self.maps]
            hit = (self.key, _Context(inputs, {}, ctx.dim))
            ctx.memo[subkey] = hit
        return self.outer._eval(hit[1])


class ArrayNode:
    """A DAG node producing a whole array of jets at once (vectorised linear algebra).

    Subclasses implement ``_compute(ctx) -> list[Jet]`` (flat, row-major);
    :meth:`components` returns ScalarField views into it.
    """

    def __init__(self, chart: Chart, shape: tuple[int, ...]):
        self.chart = chart
        self.shape = shape

    def _compute(self, ctx: _Context) -> list[Jet]:
        raise NotImplementedError

    def _eval(self, ctx: _Context) -> list[Jet]:
        key = id(self)
        hit = ctx.memo.get(key)
        if hit is not None:
            return hit[1]
        out = self._compute(ctx)
        ctx.memo[key] = (self, out)
        return out

    def components(self) -> np.ndarray:
        flat = [_Index(self, k) for k in range(int(np.prod(self.shape)))]
        arr = np.empty(len(flat), dtype=object)
        arr[:] = flat
        return arr.reshape(self.shape)


class _Index(ScalarField):
    __slots__ = ("node", "k")

    def __init__(self, node: ArrayNode, k: int):
        super().__init__(node.chart)
        self.node, self.k = node, k

    def _compute(self, ctx):
        return self.node._eval(ctx)[self.k]


# ---------------------------------------------------------------------------
# constructors with light algebraic simplification (zero/one pruning)
# ---------------------------------------------------------------------------


def _is_const(a: ScalarField) -> bool:
    return isinstance(a, _Const)


def _add(a: ScalarField, b: ScalarField) -> ScalarField:
    if a.chart is not b.chart:
        raise ChartMismatchError("fields live on different charts")
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if _is_const(a) and _is_const(b):
        return _Const(a.chart, a.v + b.v)
    return _Add(a, b)


def _mul(a: ScalarField, b: ScalarField) -> ScalarField:
    if a.chart is not b.chart:
        raise ChartMismatchError("fields live on different charts")
    if _is_const(a):
        return _scale(b, a.v)
    if _is_const(b):
        return _scale(a, b.v)
    return _Mul(a, b)


def _scale(a: ScalarField, c: float) -> ScalarField:
    if c == 0.0 or a.is_zero:
        return _Const(a.chart, 0.0)
    if c == 1.0:
        return a
    if _is_const(a):
        return _Const(a.chart, c * a.v)
    return _Scale(a, c)


def constant(chart: Chart, v: float) -> ScalarField:
    return _Const(chart, float(v))


def zero(chart: Chart) -> ScalarField:
    return _Const(chart, 0.0)


def coordinate(chart: Chart, i: int) -> ScalarField:
    if not 0 <= i < chart.dim:
        raise IndexError(f"coordinate index {i} out of range for dim {chart.dim}")
    return _Coord(chart, i)


def coordinates(chart: Chart) -> list[ScalarField]:
    return [coordinate(chart, i) for i in range(chart.dim)]


def _sqrt_rule(u: float):
    if u <= 0.0:
        raise ValueError(f"sqrt of non-positive value {u} (point outside chart patch)")
    r = np.sqrt(u)
    return r, 0.5 / r, -0.25 / (u * r)


def _recip_rule(u: float):
    if u == 0.0:
        raise ZeroDivisionError("reciprocal of zero")
    return 1.0 / u, -1.0 / u**2, 2.0 / u**3


def sqrt(a: ScalarField) -> ScalarField:
    if _is_const(a):
        return constant(a.chart, _sqrt_rule(a.v)[0])
    return _Unary(a, _sqrt_rule)


def reciprocal(a: ScalarField) -> ScalarField:
    if _is_const(a):
        return constant(a.chart, 1.0 / a.v)
    return _Unary(a, _recip_rule)


def partial(a: ScalarField, i: int) -> ScalarField:
    """Exact ``d a / d u_i``; the result carries value and gradient only."""
    if not 0 <= i < a.chart.dim:
        raise IndexError(f"coordinate index {i} out of range for dim {a.chart.dim}")
    if _is_const(a):
        return zero(a.chart)
    if isinstance(a, _Coord):
        return constant(a.chart, 1.0 if a.i == i else 0.0)
    return _Partial(a, i)


def compose(outer: ScalarField, maps: Sequence[ScalarField], key: object | None = None) -> ScalarField:
    """``outer`` (on a chart of dim ``len(maps)``) pulled back along ``maps``.

    ``key`` identifies the map tuple so that all fields composed along the same
    map share their inner evaluation memo; pass the owning object (e.g. an
    embedding).  Constants are carried over directly.
    """
    maps = tuple(maps)
    if outer.chart.dim != len(maps):
        raise ChartMismatchError("number of maps must equal the outer chart dimension")
    if _is_const(outer):
        return constant(maps[0].chart, outer.v)
    return _Compose(outer, maps, maps if key is None else key)


def field_sum(fields, chart: Chart) -> ScalarField:
    out = zero(chart)
    for f in fields:
        out = out + f
    return out


# ---------------------------------------------------------------------------
# batched evaluation
# ---------------------------------------------------------------------------


def evaluate(fields, p: Point, order: int = 0):
    """Evaluate an object array of ScalarFields at ``p``.

    Returns the value array for ``order=0``; ``(values, grads)`` for
    ``order=1``; ``(values, grads, hessians)`` for ``order=2``.  Derivative
    axes are appended last.
    """
    arr = np.asarray(fields, dtype=object)
    jets = [f.jet(p) for f in arr.reshape(-1)]
    shape = arr.shape
    d = p.chart.dim
    vals = np.array([j.value for j in jets], dtype=float).reshape(shape)
    if order == 0:
        return vals
    if any(j.grad is None for j in jets):
        raise MissingDerivativeError("a field carries no gradient")
    grads = np.array([j.grad for j in jets], dtype=float).reshape(shape + (d,))
    if order == 1:
        return vals, grads
    if any(j.hess is None for j in jets):
        raise MissingDerivativeError("a field carries no Hessian")
    hess = np.array([j.hess for j in jets], dtype=float).reshape(shape + (d, d))
    return vals, grads, hess


def jets_to_arrays(jets: Sequence[Jet], shape: tuple[int, ...], dim: int, order: int):
    vals = np.array([j.value for j in jets]).reshape(shape)
    grads = np.array([j.grad for j in jets]).reshape(shape + (dim,))
    if order == 1:
        return vals, grads
    hess = np.array([j.hess for j in jets]).reshape(shape + (dim, dim))
    return vals, grads, hess


def arrays_to_jets(vals, grads, hess=None) -> list[Jet]:
    vals = np.asarray(vals)
    n = vals.size
    d = grads.shape[-1]
    v = vals.reshape(n)
    g = grads.reshape(n, d)
    h = None if hess is None else hess.reshape(n, d, d)
    return [Jet(float(v[k]), g[k].copy(), None if h is None else h[k].copy()) for k in range(n)]


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------

FD_STEP = 1e-5
FD_RTOL = 1e-6


@dataclass
class OracleResult:
    grad_error: float
    hess_error: float
    hess_asymmetry: float
    points: int = field(default=0)

    @property
    def max_error(self) -> float:
        return max(self.grad_error, self.hess_error)


def _fresh(p: Point, coords) -> Point:
    return Point(p.chart, coords)


def fd_gradient(f: ScalarField, p: Point, h: float = FD_STEP) -> np.ndarray:
    """Central differences of the value only."""
    d = p.chart.dim
    out = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out[i] = (f(_fresh(p, p.coords + e)) - f(_fresh(p, p.coords - e))) / (2 * h)
    return out


def fd_hessian(f: ScalarField, p: Point, h: float = FD_STEP) -> np.ndarray:
    """Central differences of the propagated gradient.

    Differencing values twice at h=1e-5 leaves ~1e-6 round-off, which is the
    tolerance itself; the gradient is separately checked against value
    differences by :func:`fd_gradient`.
    """
    d = p.chart.dim
    out = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out[:, i] = (f.gradient(_fresh(p, p.coords + e)) - f.gradient(_fresh(p, p.coords - e))) / (2 * h)
    return out


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """Max-norm error relative to max(1, |b|_max)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b), initial=0.0) / max(1.0, float(np.max(np.abs(b), initial=0.0))))


def oracle_check(f: ScalarField, points: Sequence[Point], h: float = FD_STEP) -> OracleResult:
    ge = he = asym = 0.0
    for p in points:
        j = f.jet(p)
        ge = max(ge, relative_error(j.grad, fd_gradient(f, p, h)))
        he = max(he, relative_error(j.hess, fd_hessian(f, p, h)))
        asym = max(asym, relative_error(j.hess, j.hess.T))
    return OracleResult(ge, he, asym, len(points))


def oracle_check_many(fields, points: Sequence[Point], h: float = FD_STEP) -> OracleResult:
    """:func:`oracle_check` over many fields at once; perturbed points are shared so the memo is reused."""
    arr = [f for f in np.asarray(fields, dtype=object).reshape(-1)]
    ge = he = asym = 0.0
    for p in points:
        vals, grads, hess = evaluate(arr, p, order=2)
        d = p.chart.dim
        fd_g = np.empty_like(grads)
        fd_h = np.empty_like(hess)
        for i in range(d):
            e = np.zeros(d)
            e[i] = h
            vp, gp = evaluate(arr, _fresh(p, p.coords + e), order=1)
            vm, gm = evaluate(arr, _fresh(p, p.coords - e), order=1)
            fd_g[:, i] = (vp - vm) / (2 * h)
            fd_h[:, :, i] = (gp - gm) / (2 * h)
        for k in range(len(arr)):
            ge = max(ge, relative_error(grads[k], fd_g[k]))
            he = max(he, relative_error(hess[k], fd_h[k]))
            asym = max(asym, relative_error(hess[k], hess[k].T))
    return OracleResult(ge, he, asym, len(points))
