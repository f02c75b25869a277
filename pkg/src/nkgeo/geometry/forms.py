"""Differential forms with sorted-index component storage."""

from __future__ import annotations

from itertools import combinations
from typing import Dict, Sequence, Tuple

from ..expr import Expr, ONE, ZERO, add, mul, neg, simplify
from .charts import Chart
from .matrices import sym_det


def _sort_with_sign(idx: Sequence[int]) -> Tuple[Tuple[int, ...], int]:
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return tuple(idx), 0
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return tuple(idx), sign


class Form:
    """Exterior form; components indexed by strictly increasing tuples."""

    def __init__(self, chart: Chart, degree: int, comps: Dict[tuple, Expr]):
        self.chart = chart
        self.degree = degree
        clean: Dict[tuple, Expr] = {}
        for idx, val in comps.items():
            if len(idx) != degree:
                raise ValueError(f"index {idx} has wrong length for degree {degree}")
            if list(idx) != sorted(idx):
                raise ValueError(f"component index {idx} must be sorted")
            val = simplify(val)
            if val != ZERO:
                clean[tuple(idx)] = val
        self.comps = clean

    def component(self, *idx: int) -> Expr:
        """Component with antisymmetry applied for arbitrary index order."""
        sidx, sign = _sort_with_sign(idx)
        if sign == 0:
            return ZERO
        val = self.comps.get(sidx, ZERO)
        return val if sign == 1 else neg(val)

    def is_zero_form(self) -> bool:
        return not self.comps

    def __add__(self, other: "Form") -> "Form":
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        keys = set(self.comps) | set(other.comps)
        return Form(self.chart, self.degree,
                    {k: add(self.comps.get(k, ZERO), other.comps.get(k, ZERO))
                     for k in keys})

    def __sub__(self, other: "Form") -> "Form":
        return self + other.scale(-1)

    def scale(self, c) -> "Form":
        return Form(self.chart, self.degree,
                    {k: mul(c, v) for k, v in self.comps.items()})

    def wedge(self, other: "Form") -> "Form":
        if self.chart.coords != other.chart.coords:
            raise ValueError("wedge needs a common chart")
        out: Dict[tuple, Expr] = {}
        for a, va in self.comps.items():
            for b, vb in other.comps.items():
                merged, sign = _sort_with_sign(a + b)
                if sign == 0:
                    continue
                term = mul(va, vb) if sign == 1 else neg(mul(va, vb))
                out[merged] = add(out.get(merged, ZERO), term)
        return Form(self.chart, self.degree + other.degree, out)

    def d(self) -> "Form":
        """Exterior derivative (uses the chart's total derivative)."""
        ch = self.chart
        out: Dict[tuple, Expr] = {}
        for idx, val in self.comps.items():
            for c in range(ch.dim):
                if c in idx:
                    continue
                dval = ch.diff(val, ch.coords[c])
                if dval == ZERO:
                    continue
                merged, sign = _sort_with_sign((c,) + idx)
                term = dval if sign == 1 else neg(dval)
                out[merged] = add(out.get(merged, ZERO), term)
        return Form(ch, self.degree + 1, out)

    def __call__(self, *vectors) -> Expr:
        """Evaluate on vector fields (lists of components)."""
        if len(vectors) != self.degree:
            raise ValueError(f"need {self.degree} vectors")
        pieces = []
        for idx, val in self.comps.items():
            m = [[vec[i] for i in idx] for vec in vectors]
            pieces.append(mul(val, sym_det(m)))
        return simplify(add(*pieces))

    def matrix(self) -> list:
        """Degree-2 only: the full antisymmetric component matrix."""
        if self.degree != 2:
            raise ValueError("matrix() is for 2-forms")
        n = self.chart.dim
        return [[self.component(a, b) for b in range(n)] for a in range(n)]


def zero_form(chart: Chart, degree: int) -> Form:
    return Form(chart, degree, {})

def one_form(chart: Chart, comps: Sequence[Expr]) -> Form:
    return Form(chart, 1, {(i,): c for i, c in enumerate(comps)})


def two_form_from_matrix(chart: Chart, m: Sequence[Sequence[Expr]]) -> Form:
    n = chart.dim
    comps = {}
    for a in range(n):
        for b in range(a + 1, n):
            comps[(a, b)] = m[a][b]
    for a in range(n):
        for b in range(a + 1, n):
            if simplify(add(m[a][b], m[b][a])) != ZERO:
                raise ValueError(f"matrix not antisymmetric at ({a},{b})")
    return Form(chart, 2, comps)


def coordinate_differential(chart: Chart, name: str) -> Form:
    return Form(chart, 1, {(chart.index(name),): ONE})
