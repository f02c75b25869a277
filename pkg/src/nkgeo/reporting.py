"""Check-report containers shared by the structure and residual verifiers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .expr.zero import ZeroVerdict


@dataclass
class CheckResult:
    """Outcome of one named identity check."""

    name: str
    passed: bool
    max_residual: float
    tolerance: float
    symbolic: bool = False
    witness: Optional[dict] = None
    detail: Optional[str] = None

    @classmethod
    def from_verdict(cls, name: str, verdict: ZeroVerdict,
                     detail: Optional[str] = None) -> "CheckResult":
        witness = None
        if verdict.witness is not None:
            witness = {k: float(v) for k, v in verdict.witness.items()}
        return cls(
            name=name,
            passed=verdict.ok,
            max_residual=float(verdict.max_abs),
            tolerance=float(verdict.tol),
            symbolic=(verdict.status == "symbolic"),
            witness=witness,
            detail=detail,
        )

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "passed": self.passed,
            "max_residual": float(self.max_residual),
            "tolerance": float(self.tolerance),
            "symbolic": self.symbolic,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.detail is not None:
            out["detail"] = self.detail
        return out

    def __str__(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        how = "exact" if self.symbolic else f"max residual {self.max_residual:.3e}"
        return f"[{tag}] {self.name}: {how}"


@dataclass
class CheckReport:
    """An ordered collection of named checks."""

    title: str
    checks: List[CheckResult] = field(default_factory=list)
    meta: Dict[str, object] = field(default_factory=dict)

    def add(self, result: CheckResult) -> CheckResult:
        self.checks.append(result)
        return result

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        out = {
            "title": self.title,
            "passed": self.passed,
            "checks": {c.name: c.to_json() for c in self.checks},
        }
        out.update(self.meta)
        return out

    def summary_lines(self) -> List[str]:
        return [str(c) for c in self.checks]

    def __str__(self) -> str:
        head = f"{self.title}: {'PASS' if self.passed else 'FAIL'}"
        return "\n".join([head] + ["  " + s for s in self.summary_lines()])


@dataclass
class ResidualReport:
    """Verdict for one PDE system evaluated on a potential.

    ``passed`` is true exactly when the residuals vanish symbolically or
    their sampled maximum stays below the tolerance.  ``point_values``
    records the per-point residual maxima of the numeric sweep (empty
    when the verdict is symbolic).
    """

    system: str
    passed: bool
    symbolic_zero: bool
    max_residual: float
    tolerance: float
    n_points: int
    point_values: List[float] = field(default_factory=list)
    witness: Optional[dict] = None

    def __post_init__(self) -> None:
        want = self.symbolic_zero or self.max_residual < self.tolerance
        if self.passed != want:
            raise ValueError(
                "inconsistent report: pass must equal "
                "(symbolic_zero or max_residual < tolerance)")

    @classmethod
    def from_verdict(cls, system: str, verdict: ZeroVerdict) -> "ResidualReport":
        witness = None
        if verdict.witness is not None:
            witness = {k: float(v) for k, v in verdict.witness.items()}
        return cls(
            system=system,
            passed=verdict.ok,
            symbolic_zero=(verdict.status == "symbolic"),
            max_residual=float(verdict.max_abs),
            tolerance=float(verdict.tol),
            n_points=verdict.n_points,
            point_values=[float(v) for v in verdict.values],
            witness=witness,
        )

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "pass": self.passed,
            "symbolic_zero": self.symbolic_zero,
            "max_residual": float(self.max_residual),
            "tolerance": float(self.tolerance),
            "points": self.n_points,
            "witness": self.witness,
        }

    def __str__(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        how = "exact" if self.symbolic_zero else \
            f"max residual {self.max_residual:.3e} at {self.n_points} points"
        return f"[{tag}] {self.system}: {how}"


def canonical_json(data) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
