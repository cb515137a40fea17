from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class Check:
    """One verified identity: an observed residual compared against a threshold.

    ``comparison`` is ``"<"`` for residual checks (pass iff residual < tol);
    ``">"`` and ``">="`` mark witness checks whose observed value must clear a floor.
    """

    name: str
    residual: float
    tol: float
    anchor: str = ""
    connection: str = "none"
    comparison: str = "<"
    detail: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.residual):
            return False
        if self.comparison == "<":
            return self.residual < self.tol
        if self.comparison == ">=":
            return self.residual >= self.tol
        return self.residual > self.tol

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "connection": self.connection,
            "anchor": self.anchor,
            "max_residual": self.residual,
            "comparison": self.comparison,
            "tol": self.tol,
            "pass": self.passed,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks if c.comparison == "<"), default=0.0)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self) -> list[str]:
        return [c.name for c in self.checks]
