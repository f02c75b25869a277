"""Coordinate charts, optionally carrying bound-symbol derivative rules.

A chart with `aux` rules treats extra symbols as functions of one base
coordinate: chart.diff applies the total derivative, substituting the given
right-hand sides for the bound symbols' derivatives.  Identities that hold
"modulo an ODE system" become literal identities in the free symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Tuple

from ..expr import Expr, add, diff, mul


@dataclass(frozen=True)
class AuxRule:
    """d(var)/d(wrt) = rhs, with rhs free of every chart coordinate but wrt."""

    var: str
    wrt: str
    rhs: Expr


@dataclass(frozen=True)
class Chart:
    coords: Tuple[str, ...]
    aux: Tuple[AuxRule, ...] = ()

    def __post_init__(self):
        names = set(self.coords)
        for rule in self.aux:
            if rule.var in names:
                raise ValueError(f"aux symbol {rule.var} shadows a coordinate")
            if rule.wrt not in names:
                raise ValueError(f"aux rule for {rule.var} differentiates "
                                 f"along unknown coordinate {rule.wrt}")
            bad = rule.rhs.free.intersection(names - {rule.wrt})
            if bad:
                raise ValueError(
                    f"aux rule rhs for {rule.var} may depend only on "
                    f"{rule.wrt} and other aux symbols, found {sorted(bad)}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, name: str) -> int:
        return self.coords.index(name)

    def diff(self, e: Expr, coord: str) -> Expr:
        """Total derivative along a coordinate, honoring the aux rules."""
        pieces = [diff(e, coord)]
        for rule in self.aux:
            if rule.wrt == coord and rule.var in e.free:
                pieces.append(mul(rule.rhs, diff(e, rule.var)))
        return add(*pieces)

    def with_rules(self, *rules: AuxRule) -> "Chart":
        return Chart(self.coords, self.aux + tuple(rules))


def chart(*names: str) -> Chart:
    if len(names) == 1 and (" " in names[0] or "," in names[0]):
        names = tuple(names[0].replace(",", " ").split())
    return Chart(tuple(names))


def lie_bracket(ch: Chart, v, w) -> list:
    """[V, W]^a = V^b d_b W^a - W^b d_b V^a for component lists v, w."""
    n = ch.dim
    out = []
    for a in range(n):
        pieces = []
        for b in range(n):
            pieces.append(mul(v[b], ch.diff(w[a], ch.coords[b])))
            pieces.append(mul(-1, mul(w[b], ch.diff(v[a], ch.coords[b]))))
        out.append(add(*pieces))
    return out
