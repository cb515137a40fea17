import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smanifold.diffcore import Chart, Point, coordinates
from smanifold.examples import flat_example
from smanifold.fstructure import nijenhuis_tensor_at
from smanifold.tensorfield import (
    coordinate_vector,
    endo_apply,
    endomorphism,
    exact_form,
    exterior_d,
    lie_bracket,
    metric_at,
    metric_inverse_at,
    nijenhuis,
    one_form,
    two_form_apply,
    vector_field,
)

C2 = Chart(2, ("x", "y"))
C3 = Chart(3)


def _generic_fields(chart):
    u = coordinates(chart)
    x, y, z = u
    X = vector_field(chart, [y * z, x * x - 1.0, 2.0 * x + z * y])
    Y = vector_field(chart, [1.0 + z, x * y * z, y * y])
    Z = vector_field(chart, [x, -z * z, x * y + 3.0])
    return X, Y, Z


def test_bracket_of_rotation_like_field():
    x, y = coordinates(C2)
    X = vector_field(C2, [y, 0.0])  # y d_x
    p = Point(C2, [0.4, -1.3])
    np.testing.assert_allclose(lie_bracket(X, coordinate_vector(C2, 1)).at(p), [-1.0, 0.0])
    np.testing.assert_allclose(lie_bracket(coordinate_vector(C2, 0), coordinate_vector(C2, 1)).at(p), [0.0, 0.0])


_pt3 = st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3)


@settings(max_examples=25, deadline=None)
@given(pt=_pt3)
def test_bracket_antisymmetry_and_jacobi(pt):
    X, Y, Z = _generic_fields(C3)
    p = Point(C3, pt)
    np.testing.assert_allclose(lie_bracket(X, Y).at(p), -lie_bracket(Y, X).at(p), atol=1e-12)
    jac = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) + lie_bracket(Z, lie_bracket(X, Y))
    np.testing.assert_allclose(jac.at(p), 0.0, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(pt=_pt3)
def test_d_of_exact_form_vanishes(pt):
    x, y, z = coordinates(C3)
    phi = x * x * y + z * y * y * y - x * z
    np.testing.assert_allclose(exterior_d(exact_form(phi)).at(Point(C3, pt)), 0.0, atol=1e-12)


def test_exterior_derivative_uses_half_convention():
    x, y = coordinates(C2)
    eta = one_form(C2, [-0.5 * y, 0.0])
    w = exterior_d(eta)
    p = Point(C2, [0.0, 2.0])
    # (d eta)_xy = 1/2 (d_x eta_y - d_y eta_x) = 1/2 * 1/2
    assert two_form_apply(w, coordinate_vector(C2, 0), coordinate_vector(C2, 1), p) == pytest.approx(0.25)
    np.testing.assert_allclose(w.at(p), -w.at(p).T)


def test_exterior_derivative_of_flat_eta_is_a_quarter():
    ex = flat_example(1, 1)
    S = ex.structure
    p = Point(S.chart, [0.3, 2.0, -1.0])
    dE = exterior_d(S.eta[0]).at(p)
    assert dE[0, 1] == pytest.approx(0.25)
    assert dE[1, 0] == pytest.approx(-0.25)
    assert np.count_nonzero(np.abs(dE) > 1e-15) == 2


def test_flat_metric_component_value():
    S = flat_example(1, 1).structure
    G = metric_at(S.g, Point(S.chart, [0.0, 2.0, 0.0]))
    # g = 1/4 (dx^2 + dy^2) + eta (x) eta, eta = 1/2 (dz - y dx)
    assert G[0, 0] == pytest.approx(0.25 + 1.0)
    assert G[0, 2] == pytest.approx(-0.25 * 2.0)
    assert G[2, 2] == pytest.approx(0.25)


def test_metric_inverse_exact_and_pointwise_agree():
    S = flat_example(2, 2).structure
    p = Point(S.chart, np.linspace(-0.8, 0.9, S.chart.dim))
    inv_fields = np.array([[c(p) for c in row] for row in S.g.inverse()])
    np.testing.assert_allclose(inv_fields, metric_inverse_at(S.g, p), atol=1e-12)
    np.testing.assert_allclose(inv_fields @ metric_at(S.g, p), np.eye(S.chart.dim), atol=1e-12)


def _generic_endo(chart):
    x, y, z = coordinates(chart)
    return endomorphism(chart, [[y, 1.0, x * z], [0.0, z * z, -x], [x * y, 2.0, 1.0 + y]])


@settings(max_examples=20, deadline=None)
@given(pt=_pt3)
def test_nijenhuis_is_tensorial(pt):
    f = _generic_endo(C3)
    X, Y, _ = _generic_fields(C3)
    x, y, z = coordinates(C3)
    phi = x * y + z + 2.0
    p = Point(C3, pt)
    lhs = nijenhuis(f, X * phi, Y, p)
    np.testing.assert_allclose(lhs, phi(p) * nijenhuis(f, X, Y, p), atol=1e-9)
    np.testing.assert_allclose(nijenhuis(f, X, Y, p), -nijenhuis(f, Y, X, p), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(pt=_pt3)
def test_nijenhuis_component_formula_matches_definition(pt):
    f = _generic_endo(C3)
    p = Point(C3, pt)
    N = nijenhuis_tensor_at(f, p)  # N[k, i, j]
    for i in range(3):
        for j in range(3):
            direct = nijenhuis(f, coordinate_vector(C3, i), coordinate_vector(C3, j), p)
            np.testing.assert_allclose(N[:, i, j], direct, atol=1e-10)


def test_endo_apply_flat_f():
    S = flat_example(1, 1).structure
    p = Point(S.chart, [0.1, 0.7, 0.2])
    # f d_y1 = d_x1 + y1 d_z
    np.testing.assert_allclose(endo_apply(S.f, coordinate_vector(S.chart, 1)).at(p), [1.0, 0.0, 0.7])
    np.testing.assert_allclose(endo_apply(S.f, coordinate_vector(S.chart, 0)).at(p), [0.0, -1.0, 0.0])
