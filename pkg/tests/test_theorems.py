import pytest

from smanifold.cli import make_rng
from smanifold.theorems import theorem_suite

from conftest import ALL_EXAMPLES, example, example_id, points


@pytest.mark.parametrize("case", ALL_EXAMPLES, ids=example_id)
def test_full_suite_passes(case):
    tag, (a, b) = case
    ex = example(tag, a, b)
    rep = theorem_suite(ex, list(points(tag, a, b)), make_rng(1), ("riemannian", "ssm", "ssnm"))
    assert rep.passed, [(c.name, c.connection, c.residual) for c in rep.checks if not c.passed]


def test_observations_record_open_behaviour():
    ex = example("flat", 2, 2)
    rep = theorem_suite(ex, list(points("flat", 2, 2, 5)), make_rng(1), ("riemannian", "ssm", "ssnm"))
    lo, hi = rep.observations["ssm_sectional_random_planes_range"]
    assert hi - lo > 1.0  # nabla* sectional curvature of the flat example is not constant
    assert rep.observations["ssnm_tau_frame_gap"] < 1e-9
    assert rep.observations["ssm_pair_symmetry_residual"] > 0.1
