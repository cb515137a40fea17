import functools

import numpy as np
import pytest

from smanifold.cli import make_rng
from smanifold.examples import build

FLAT_PARAMS = [(m, t) for m in (1, 2, 3) for t in (1, 2, 3)]
SPHERE_PARAMS = [(1, 2), (2, 2), (2, 3)]
ALL_EXAMPLES = [("flat", p) for p in FLAT_PARAMS] + [("sphere", p) for p in SPHERE_PARAMS]
SMALL_EXAMPLES = [("flat", (1, 1)), ("flat", (2, 2)), ("sphere", (1, 2)), ("sphere", (2, 2))]


@functools.lru_cache(maxsize=None)
def example(tag: str, a: int, b: int):
    return build(tag, a, b)


@functools.lru_cache(maxsize=None)
def points(tag: str, a: int, b: int, count: int = 20, seed: int = 42):
    return tuple(example(tag, a, b).sample_points(count, make_rng(seed)))


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(7)


def example_id(case) -> str:
    tag, (a, b) = case
    return f"{tag}:{a},{b}"


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
