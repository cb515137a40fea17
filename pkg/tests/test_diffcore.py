import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smanifold.diffcore import (
    Chart,
    ChartMismatchError,
    MissingDerivativeError,
    Point,
    compose,
    constant,
    coordinates,
    fd_gradient,
    fd_hessian,
    field_sum,
    oracle_check,
    oracle_check_many,
    partial,
    reciprocal,
    relative_error,
    sqrt,
)

from conftest import SMALL_EXAMPLES, example, example_id, points

C2 = Chart(2, ("x", "y"))
C3 = Chart(3)


def test_polynomial_value_gradient_hessian():
    x, y = coordinates(C2)
    f = x * x * y
    j = f.jet(Point(C2, [1.0, 2.0]))
    assert j.value == 2.0
    np.testing.assert_array_equal(j.grad, [4.0, 1.0])
    np.testing.assert_array_equal(j.hess, [[4.0, 2.0], [2.0, 0.0]])


def test_constants_have_zero_derivatives():
    c = constant(C3, 3.5)
    p = Point(C3, [0.1, -2.0, 5.0])
    assert c(p) == 3.5
    assert not c.gradient(p).any()
    assert not c.hessian(p).any()


def test_coordinate_seeds_are_unit_gradients():
    p = Point(C3, [1.0, 2.0, 3.0])
    for i, u in enumerate(coordinates(C3)):
        np.testing.assert_array_equal(u.gradient(p), np.eye(3)[i])


def test_sqrt_and_reciprocal_match_closed_forms():
    x, y = coordinates(C2)
    r = sqrt(4.0 - x * x - y * y)
    p = Point(C2, [0.5, 1.0])
    R = np.sqrt(4 - 1.25)
    assert r(p) == pytest.approx(R)
    np.testing.assert_allclose(r.gradient(p), [-0.5 / R, -1.0 / R])
    w = reciprocal(x)
    np.testing.assert_allclose(w.hessian(p), [[2.0 / 0.125, 0.0], [0.0, 0.0]])


def test_sqrt_outside_domain_raises():
    x, _ = coordinates(C2)
    with pytest.raises(ValueError):
        sqrt(x - 10.0)(Point(C2, [0.0, 0.0]))


def test_partial_is_exact_first_derivative_without_hessian():
    x, y = coordinates(C2)
    f = x * x * x * y
    p = Point(C2, [2.0, -1.0])
    df = partial(f, 0)
    assert df(p) == pytest.approx(3 * 4 * -1)
    np.testing.assert_allclose(df.gradient(p), [6 * 2 * -1, 12.0])
    with pytest.raises(MissingDerivativeError):
        df.hessian(p)


def test_compose_chain_rule():
    u, v = coordinates(C2)
    outer = u * v + u * u
    x, y, z = coordinates(C3)
    h = compose(outer, [x * y, z])
    p = Point(C3, [1.0, 2.0, 3.0])
    # h = x y z + x^2 y^2
    assert h(p) == pytest.approx(6 + 4)
    np.testing.assert_allclose(h.gradient(p), [2 * 3 + 2 * 1 * 4, 1 * 3 + 2 * 1 * 2, 2])
    assert oracle_check(h, [p]).max_error < 1e-6


def test_chart_mismatch_is_rejected():
    x, _ = coordinates(C2)
    with pytest.raises(ChartMismatchError):
        x(Point(C3, [0, 0, 0]))
    with pytest.raises(ChartMismatchError):
        _ = x + coordinates(C3)[0]


def test_relative_error_definition():
    assert relative_error([1.0], [0.5]) == pytest.approx(0.5)
    assert relative_error([201.0], [200.0]) == pytest.approx(1 / 200)


_coef = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(
    coefs=st.lists(_coef, min_size=6, max_size=6),
    pt=st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3),
)
def test_random_polynomials_agree_with_finite_differences(coefs, pt):
    x, y, z = coordinates(C3)
    monos = [x, y * z, x * x * y, z * z * z, x * y * z, y * y]
    f = field_sum((c * m for c, m in zip(coefs, monos)), C3) + 1.0
    p = Point(C3, pt)
    res = oracle_check(f, [p])
    assert res.grad_error < 1e-6
    assert res.hess_error < 1e-6
    assert res.hess_asymmetry == 0.0


@settings(max_examples=30, deadline=None)
@given(pt=st.lists(st.floats(-1.5, 1.5, allow_nan=False), min_size=2, max_size=2))
def test_product_rule(pt):
    x, y = coordinates(C2)
    a = x * x + 2.0 * y
    b = y * y * x - 1.0
    p = Point(C2, pt)
    ja, jb, jab = a.jet(p), b.jet(p), (a * b).jet(p)
    np.testing.assert_allclose(jab.grad, ja.value * jb.grad + jb.value * ja.grad, atol=1e-12)
    expected = ja.value * jb.hess + jb.value * ja.hess + np.outer(ja.grad, jb.grad) + np.outer(jb.grad, ja.grad)
    np.testing.assert_allclose(jab.hess, expected, atol=1e-12)


@pytest.mark.parametrize("case", SMALL_EXAMPLES, ids=example_id)
def test_example_fields_agree_with_finite_differences(case):
    tag, (a, b) = case
    S = example(tag, a, b).structure
    pts = points(tag, a, b)
    fields = list(S.g.comps.reshape(-1)) + list(S.f.comps.reshape(-1))
    for X in S.xi:
        fields += list(X.comps)
    for e in S.eta:
        fields += list(e.comps)
    r = oracle_check_many([f for f in fields if not f.is_zero], pts)
    assert r.grad_error < 1e-6
    assert r.hess_error < 1e-6
    assert r.hess_asymmetry < 1e-12


def test_batched_oracle_matches_single_field_oracle():
    x, y = coordinates(C2)
    f, g = x * x * y, sqrt(9.0 - x * x)
    pts = [Point(C2, [0.3, -0.7]), Point(C2, [1.1, 0.2])]
    both = oracle_check_many([f, g], pts)
    single = max(oracle_check(f, pts).max_error, oracle_check(g, pts).max_error)
    assert both.max_error == pytest.approx(single, abs=1e-15)


def test_fd_helpers_on_known_function():
    x, y = coordinates(C2)
    f = x * x * y
    p = Point(C2, [1.0, 2.0])
    np.testing.assert_allclose(fd_gradient(f, p), [4.0, 1.0], atol=1e-8)
    np.testing.assert_allclose(fd_hessian(f, p), [[4.0, 2.0], [2.0, 0.0]], atol=1e-8)
