import numpy as np
import pytest

from smanifold.fstructure import (
    MetricFStructure,
    check_normality,
    check_s_manifold,
    f_basis,
    normality_residual_at,
    orthonormal_l_pair,
    phi_at,
    random_orthonormal_frame,
    validate_axioms,
)
from smanifold.tensorfield import EndomorphismField

from conftest import ALL_EXAMPLES, example, example_id, points


@pytest.mark.parametrize("case", ALL_EXAMPLES, ids=example_id)
def test_examples_satisfy_all_structure_conditions(case):
    tag, (a, b) = case
    S = example(tag, a, b).structure
    pts = points(tag, a, b)
    for rep in (validate_axioms(S, pts, 1e-8), check_normality(S, pts, 1e-8), check_s_manifold(S, pts, 1e-8)):
        assert rep.passed, [(c.name, c.residual) for c in rep.checks if not c.passed]


def _variant(S, **kw):
    args = dict(chart=S.chart, s=S.s, f=S.f, xi=list(S.xi), eta=list(S.eta), g=S.g)
    args.update(kw)
    return MetricFStructure(**args)


def test_scaled_structure_vector_fails_duality_by_one():
    S = example("flat", 1, 1).structure
    pts = points("flat", 1, 1, 5)
    bad = _variant(S, xi=[S.xi[0] * 2.0])
    rep = validate_axioms(bad, pts)
    assert not rep.passed
    assert rep["eta(xi)=delta"].residual == pytest.approx(1.0)


def test_negated_f_keeps_normality_but_breaks_d_eta_equals_phi():
    S = example("flat", 2, 1).structure
    pts = points("flat", 2, 1, 5)
    bad = _variant(S, f=EndomorphismField(S.chart, -S.f.comps))
    assert check_normality(bad, pts).passed
    assert not check_s_manifold(bad, pts)["s_manifold:d_eta=Phi"].passed


def test_doubled_one_form_breaks_normality_and_axioms():
    S = example("flat", 1, 2).structure
    pts = points("flat", 1, 2, 5)
    bad = _variant(S, eta=[S.eta[0] * 2.0, S.eta[1]])
    assert not check_normality(bad, pts).passed
    assert normality_residual_at(bad, pts[0]) > 0.1
    assert not validate_axioms(bad, pts).passed


def test_phi_is_antisymmetric_and_f_compatible():
    S = example("sphere", 1, 2).structure
    p = points("sphere", 1, 2)[0]
    Phi = phi_at(S, p)
    np.testing.assert_allclose(Phi, -Phi.T, atol=1e-12)
    st = S.at(p)
    np.testing.assert_allclose(Phi, st.G @ st.F, atol=1e-12)


@pytest.mark.parametrize("case", [("flat", (2, 3)), ("sphere", (2, 2))], ids=example_id)
def test_f_basis_is_orthonormal_and_f_adapted(case):
    tag, (a, b) = case
    S = example(tag, a, b).structure
    for p in points(tag, a, b, 5):
        B = f_basis(S, p)
        st = S.at(p)
        n = S.n
        np.testing.assert_allclose(B @ st.G @ B.T, np.eye(S.dim), atol=1e-10)
        np.testing.assert_allclose(B[n : 2 * n], (st.F @ B[:n].T).T, atol=1e-12)
        np.testing.assert_allclose(st.eta @ B[: 2 * n].T, 0.0, atol=1e-12)


def test_orthonormal_l_pair(rng):
    S = example("flat", 3, 2).structure
    p = points("flat", 3, 2)[0]
    st = S.at(p)
    for _ in range(10):
        X, Y = orthonormal_l_pair(S, p, rng)
        np.testing.assert_allclose([X @ st.G @ X, Y @ st.G @ Y, X @ st.G @ Y], [1, 1, 0], atol=1e-12)
        np.testing.assert_allclose(st.eta @ np.stack([X, Y]).T, 0.0, atol=1e-12)


def test_random_frame_is_orthonormal(rng):
    A = rng.normal(size=(5, 5))
    G = A @ A.T + 5 * np.eye(5)
    E = random_orthonormal_frame(G, rng)
    np.testing.assert_allclose(E @ G @ E.T, np.eye(5), atol=1e-12)
