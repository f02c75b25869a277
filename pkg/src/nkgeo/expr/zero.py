"""Deterministic zero checking: exact attempt first, then random sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .evaluate import EvalError, compile_exprs
from .nodes import Const, Expr, ZERO
from .poly import proves_zero
from .simplify import simplify

DEFAULT_POINTS = 50
DEFAULT_TOL = 1e-9
DEFAULT_SEED = 0
_RETRY_FACTOR = 200


class SamplingError(Exception):
    """Every sampled point hit the excluded/singular locus."""


@dataclass
class ZeroVerdict:
    """Outcome of an is_zero query."""

    status: str  # 'symbolic' | 'numeric' | 'nonzero'
    max_abs: float
    tol: float
    n_points: int
    seed: int
    variables: tuple
    witness: Optional[dict] = None
    witness_value: Optional[complex] = None
    skipped_points: int = 0
    values: tuple = ()  # per-point max |value| over the expression list

    @property
    def ok(self) -> bool:
        return self.status != "nonzero"

    def to_json(self) -> dict:
        out = {
            "status": self.status,
            "max_abs": float(self.max_abs),
            "tol": float(self.tol),
            "n_points": self.n_points,
            "seed": self.seed,
            "variables": list(self.variables),
            "skipped_points": self.skipped_points,
            "ok": self.ok,
        }
        if self.witness is not None:
            out["witness"] = {k: float(v) for k, v in self.witness.items()}
            out["witness_value"] = [self.witness_value.real, self.witness_value.imag]
        return out


def _as_list(exprs) -> list:
    if isinstance(exprs, Expr):
        return [exprs]
    return list(exprs)


def away_from(**radii: float) -> Callable[[Mapping[str, float]], bool]:
    """Exclusion predicate rejecting points with |p[var]| < radius.

    Example: is_zero(e, exclude=away_from(x1=0.3)) skips the x1 = 0 locus.
    """

    def exclude(point: Mapping[str, float]) -> bool:
        return any(abs(point[v]) < r for v, r in radii.items())

    return exclude


def sample_points(
    variables: Sequence[str],
    n_points: int = DEFAULT_POINTS,
    *,
    seed: int = DEFAULT_SEED,
    low: float = -2.0,
    high: float = 2.0,
    exclude: Optional[Callable[[Mapping[str, float]], bool]] = None,
) -> list:
    """Deterministic list of sample points; rejection sampling on exclude."""
    rng = np.random.Generator(np.random.PCG64(seed))
    points = []
    attempts = 0
    cap = max(n_points * _RETRY_FACTOR, 1000)
    while len(points) < n_points:
        if attempts >= cap:
            raise SamplingError(
                f"could not find {n_points} admissible points in {cap} draws; "
                "the excluded locus covers the sampling box"
            )
        vals = rng.uniform(low, high, size=len(variables))
        attempts += 1
        point = {v: float(x) for v, x in zip(variables, vals)}
        if exclude is not None and exclude(point):
            continue
        points.append(point)
    return points


def is_zero(
    exprs,
    variables: Optional[Sequence[str]] = None,
    *,
    n_points: int = DEFAULT_POINTS,
    tol: float = DEFAULT_TOL,
    seed: int = DEFAULT_SEED,
    low: float = -2.0,
    high: float = 2.0,
    exclude: Optional[Callable[[Mapping[str, float]], bool]] = None,
    try_symbolic: bool = True,
) -> ZeroVerdict:
    """Decide whether expression(s) vanish identically.

    Tries an exact proof (structural simplification, then rational-function
    canonicalization) and falls back to evaluation at deterministic random
    points in [low, high]^dim.  All expressions share the same points.
    """
    todo = _as_list(exprs)
    if variables is None:
        free: set = set()
        for e in todo:
            free |= e.free
        variables = sorted(free)
    variables = list(variables)

    if try_symbolic:
        all_zero = True
        for e in todo:
            s = simplify(e)
            if isinstance(s, Const) and s.is_zero_const:
                continue
            if proves_zero(s):
                continue
            all_zero = False
            break
        if all_zero:
            return ZeroVerdict(
                status="symbolic", max_abs=0.0, tol=tol, n_points=0,
                seed=seed, variables=tuple(variables),
            )

    if not variables:
        # constant expressions that did not simplify to zero: evaluate once
        fn = compile_exprs(todo, [])
        vals = fn()
        max_abs = max(abs(v) for v in vals)
        if max_abs > tol:
            return ZeroVerdict(
                status="nonzero", max_abs=max_abs, tol=tol, n_points=1,
                seed=seed, variables=(), witness={}, witness_value=max(vals, key=abs),
                values=(max_abs,),
            )
        return ZeroVerdict(status="numeric", max_abs=max_abs, tol=tol,
                           n_points=1, seed=seed, variables=(),
                           values=(max_abs,))

    points = sample_points(variables, n_points, seed=seed, low=low, high=high,
                           exclude=exclude)
    fn = compile_exprs(todo, variables)
    max_abs = 0.0
    witness = None
    witness_value = None
    skipped = 0
    used = 0
    per_point = []
    for point in points:
        try:
            vals = fn(*[point[v] for v in variables])
        except EvalError:
            skipped += 1
            continue
        used += 1
        point_max = 0.0
        for v in vals:
            a = abs(v)
            if a > point_max:
                point_max = a
            if a > max_abs:
                max_abs = a
                if a > tol:
                    witness = point
                    witness_value = v
        per_point.append(point_max)
    if used == 0:
        raise SamplingError("every sampled point was singular for the expression")
    if max_abs > tol:
        return ZeroVerdict(
            status="nonzero", max_abs=max_abs, tol=tol, n_points=used,
            seed=seed, variables=tuple(variables), witness=witness,
            witness_value=witness_value, skipped_points=skipped,
            values=tuple(per_point),
        )
    return ZeroVerdict(
        status="numeric", max_abs=max_abs, tol=tol, n_points=used, seed=seed,
        variables=tuple(variables), skipped_points=skipped,
        values=tuple(per_point),
    )
