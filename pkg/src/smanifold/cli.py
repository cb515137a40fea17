"""``verify`` command: build an example, run every check, print and optionally save a report.

Exit codes: 0 all checks pass, 1 some check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .examples import NamedExample, build
from .fstructure import check_normality, check_s_manifold, validate_axioms
from .records import Check
from .theorems import ALL_CONNECTIONS, theorem_suite

SCHEMA_VERSION = "1"
EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_PARAM_NAMES = {"flat": ("m", "t"), "sphere": ("n", "s")}
_PARAM_MIN = {"flat": (1, 1), "sphere": (1, 2)}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    example: str
    params: tuple[int, int]
    connection: str = "all"
    points: int = 20
    planes_per_point: int = 10
    seed: int = 42
    tol: float = 1e-8
    output: Path | None = None

    def validate(self) -> None:
        if self.example not in _PARAM_NAMES:
            raise UsageError(f"unknown example tag {self.example!r}")
        if self.connection not in ("all", *ALL_CONNECTIONS):
            raise UsageError(f"unknown connection {self.connection!r}")
        lo = _PARAM_MIN[self.example]
        for name, v, m in zip(_PARAM_NAMES[self.example], self.params, lo):
            if v < m:
                raise UsageError(f"--{name} must be >= {m}")
        if self.points < 1:
            raise UsageError("--points must be >= 1")
        if self.planes_per_point < 1:
            raise UsageError("--planes must be >= 1")
        if self.seed < 0:
            raise UsageError("--seed must be non-negative")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise UsageError("--tol must be positive")

    @property
    def connections(self) -> tuple[str, ...]:
        return ALL_CONNECTIONS if self.connection == "all" else (self.connection,)

    def echo(self) -> dict[str, Any]:
        names = _PARAM_NAMES[self.example]
        return {
            "example": self.example,
            "params": {names[0]: self.params[0], names[1]: self.params[1]},
            "connection": self.connection,
            "points": self.points,
            "planes_per_point": self.planes_per_point,
            "seed": self.seed,
            "tol": self.tol,
        }


@dataclass
class Report:
    config: dict[str, Any]
    checks: list[Check]
    observations: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)


def make_rng(seed: int) -> np.random.Generator:
    # counter-based, so streams are reproducible across numpy versions and platforms
    return np.random.Generator(np.random.Philox(seed))


def _structure_checks(ex: NamedExample, points, tol: float) -> list[Check]:
    S = ex.structure
    out: list[Check] = []
    for rep in (validate_axioms(S, points, tol), check_normality(S, points, tol), check_s_manifold(S, points, tol)):
        for c in rep.checks:
            c.connection = "none"
            out.append(c)
    if ex.pulled is not None:
        worst = max(ex.pulled.xi_tangency_residual(p) for p in points)
        out.append(Check("pullback:xi_tangent", worst, tol, anchor="xi_a tangent to the hypersurface"))
        worst_rank = min(ex.pulled.embedding.min_singular_value(p) for p in points)
        out.append(Check("pullback:jacobian_full_rank", worst_rank, 1e-8, anchor="embedding is an immersion", comparison=">"))
    return out


def run(config: RunConfig) -> Report:
    config.validate()
    t0 = time.perf_counter()
    ex = build(config.example, *config.params)
    rng = make_rng(config.seed)
    points = ex.sample_points(config.points, rng)
    checks = _structure_checks(ex, points, config.tol)
    thm = theorem_suite(ex, points, rng, config.connections, config.planes_per_point, config.tol)
    checks.extend(thm.checks)
    checks.sort(key=lambda c: (c.name, c.connection))
    echo = config.echo()
    echo["label"] = ex.label
    echo["dim"] = ex.structure.dim
    echo["n"], echo["s"] = ex.structure.n, ex.structure.s
    echo["expected"] = dict(ex.expected)
    return Report(echo, checks, thm.observations, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _render(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_render(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_render(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _render(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def emit_json(report: Report) -> bytes:
    """Stable key order, 17 significant digits, schema version "1"."""
    if not report.checks:
        raise ValueError("a report must contain at least one check")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": report.config,
        "overall_pass": report.passed,
        "checks": [c.as_dict() for c in report.checks],
        "observations": report.observations,
        "wall_time_s": report.wall_time,
    }
    return (_render(doc) + "\n").encode("utf-8")


def format_text(report: Report) -> str:
    lines = [f"example {report.config['label']}  (dim {report.config['dim']}, seed {report.config['seed']})"]
    for c in report.checks:
        flag = "PASS" if c.passed else "FAIL"
        lines.append(f"  {flag}  {c.name:<48} {c.connection:<10} {c.residual:.3e} {c.comparison} {c.tol:.1e}")
    for k, v in report.observations.items():
        lines.append(f"  note  {k}: {v}")
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'}  ({report.wall_time:.2f}s)")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="verify", description="Verify curvature identities on an S-structure example.")
    ap.add_argument("example", choices=sorted(_PARAM_NAMES))
    ap.add_argument("--m", type=int, help="flat: half the dimension of L (default 2)")
    ap.add_argument("--t", type=int, help="flat: number of structure vector fields (default 2)")
    ap.add_argument("--n", type=int, help="sphere: S^{2n+1}(2) factor (default 2)")
    ap.add_argument("--s", type=int, help="sphere: number of structure vector fields (default 2)")
    ap.add_argument("--connection", choices=["all", *ALL_CONNECTIONS], default="all")
    ap.add_argument("--all", action="store_true", help="same as --connection all")
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--planes", type=int, default=10)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--json", type=Path, dest="output")
    ap.add_argument("-q", "--quiet", action="store_true")
    return ap


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    args = _parser().parse_args(argv)
    a_name, b_name = _PARAM_NAMES[args.example]
    other = [k for ks in _PARAM_NAMES.values() for k in ks if k not in (a_name, b_name)]
    for k in other:
        if getattr(args, k) is not None:
            raise UsageError(f"--{k} does not apply to the {args.example} example")
    a = getattr(args, a_name)
    b = getattr(args, b_name)
    return RunConfig(
        example=args.example,
        params=(2 if a is None else a, 2 if b is None else b),
        connection="all" if args.all else args.connection,
        points=args.points,
        planes_per_point=args.planes,
        seed=args.seed,
        tol=args.tol,
        output=args.output,
    ), args.quiet


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config, quiet = config_from_args(argv)
        report = run(config)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"verify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not quiet:
        print(format_text(report))
    if config.output is not None:
        config.output.write_bytes(emit_json(report))
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
