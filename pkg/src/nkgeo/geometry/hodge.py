"""Hodge star on 2-forms and the Weyl self-dual/anti-self-dual split (d=4).

Split signature makes det g > 0, so sqrt(det g) is taken directly.  The star
acts on lowered 2-forms; with the default orientation +1 the volume form is
sqrt(det g) dx^0^dx^1^dx^2^dx^3 in chart order.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product

from ..expr import Expr, ZERO, add, mul, neg, pw, rational, simplify
from .forms import Form, two_form_from_matrix
from .metric import Metric

PAIRS4 = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _perm_sign(p) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


_EPS4 = {}
for _p in permutations(range(4)):
    _EPS4[_p] = _perm_sign(_p)


def eps4(a: int, b: int, c: int, d: int) -> int:
    return _EPS4.get((a, b, c, d), 0)


def sqrt_det(metric: Metric) -> Expr:
    return simplify(pw(metric.det(), Fraction(1, 2)))


def star_matrix(metric: Metric, orientation: int = 1) -> list:
    """6x6 matrix M with (star F)_I = sum_J M[I][J] F_J over sorted pairs."""
    if metric.dim != 4:
        raise ValueError("the 2-form star is implemented for dimension 4")
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    ginv = metric.inverse()
    root = sqrt_det(metric)
    out = [[ZERO] * 6 for _ in range(6)]
    for i_idx, (a, b) in enumerate(PAIRS4):
        for j_idx, (c, d) in enumerate(PAIRS4):
            pieces = []
            for m, n in product(range(4), repeat=2):
                s = eps4(a, b, m, n)
                if s == 0:
                    continue
                term = mul(ginv[m][c], ginv[n][d])
                if term == ZERO:
                    continue
                pieces.append(term if s == 1 else neg(term))
            val = simplify(mul(rational(orientation), root, add(*pieces)))
            out[i_idx][j_idx] = val
    return out


def star_two_form(metric: Metric, form: Form, orientation: int = 1) -> Form:
    m = star_matrix(metric, orientation)
    comps = {}
    for i_idx, pair in enumerate(PAIRS4):
        val = add(*[mul(m[i_idx][j_idx], form.comps.get(PAIRS4[j_idx], ZERO))
                    for j_idx in range(6)])
        comps[pair] = val
    mat = [[ZERO] * 4 for _ in range(4)]
    for (a, b), v in comps.items():
        mat[a][b] = v
        mat[b][a] = neg(v)
    return two_form_from_matrix(metric.chart, mat)


def weyl_lowered(metric: Metric) -> list:
    """C_{abcd} for d=4."""
    if metric.dim != 4:
        raise ValueError("Weyl split implemented for dimension 4")
    n = 4
    g = metric.g
    riem = metric.riemann_lowered()
    ric = metric.ricci()
    scal = metric.scalar_curvature()
    out = [[[[ZERO] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    half = rational(1, 2)
    sixth = rational(1, 6)
    for a, b, c, d in product(range(n), repeat=4):
        if a == b or c == d:
            continue
        val = add(
            riem[a][b][c][d],
            neg(mul(half, add(
                mul(g[a][c], ric[d][b]),
                neg(mul(g[a][d], ric[c][b])),
                neg(mul(g[b][c], ric[d][a])),
                mul(g[b][d], ric[c][a]),
            ))),
            mul(sixth, scal, add(mul(g[a][c], g[d][b]),
                                 neg(mul(g[a][d], g[c][b])))),
        )
        out[a][b][c][d] = simplify(val)
    return out


def weyl_pair_matrix(metric: Metric) -> list:
    """Weyl tensor as a 6x6 matrix over sorted index pairs."""
    c = weyl_lowered(metric)
    return [[c[i][j][k][l] for (k, l) in PAIRS4] for (i, j) in PAIRS4]


def weyl_split(metric: Metric, orientation: int = 1) -> tuple:
    """(C_plus, C_minus) as 6x6 pair matrices: C_pm = (C +- C o star)/2.

    C_plus is the self-dual half: it vanishes exactly when the metric is
    anti-self-dual for the given orientation.
    """
    w = weyl_pair_matrix(metric)
    m = star_matrix(metric, orientation)
    n = 6
    cstar = [[simplify(add(*[mul(w[i][k], m[j][k]) for k in range(n)]))
              for j in range(n)] for i in range(n)]
    half = rational(1, 2)
    cp = [[simplify(mul(half, add(w[i][j], cstar[i][j]))) for j in range(n)]
          for i in range(n)]
    cm = [[simplify(mul(half, add(w[i][j], neg(cstar[i][j])))) for j in range(n)]
          for i in range(n)]
    return cp, cm
