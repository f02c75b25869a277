"""Metrics and curvature: Christoffel symbols, Riemann, Ricci, scalar.

Index conventions: Gamma[a][b][c] = Gamma^a_{bc};
R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
            + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb},
so that [nabla_c, nabla_d] V^a = R^a_{bcd} V^b; Ricci r_{ab} = R^c_{acb}.
"""

from __future__ import annotations

from itertools import product
from typing import List, Sequence

from ..expr import Expr, ZERO, add, mul, neg, simplify
from .charts import Chart
from .matrices import sym_det, sym_inverse


class Metric:
    """A symmetric metric tensor on a chart, with cached curvature tables.

    An explicit ``inverse`` matrix may be supplied when it is known in closed
    form (block metrics, conformal rescalings); otherwise the adjugate/det
    inverse is computed on demand.
    """

    def __init__(self, chart: Chart, components: Sequence[Sequence[Expr]],
                 *, inverse: Sequence[Sequence[Expr]] = None):
        dim = chart.dim
        if len(components) != dim or any(len(r) != dim for r in components):
            raise ValueError(f"need a {dim}x{dim} component matrix")
        g = [[simplify(components[i][j]) for j in range(dim)] for i in range(dim)]
        for i in range(dim):
            for j in range(i):
                if simplify(g[i][j] - g[j][i]) != ZERO:
                    raise ValueError(f"metric not symmetric at ({i},{j})")
                g[i][j] = g[j][i]
        self.chart = chart
        self.g = g
        self._cache: dict = {}
        if inverse is not None:
            if len(inverse) != dim or any(len(r) != dim for r in inverse):
                raise ValueError(f"need a {dim}x{dim} inverse matrix")
            self._cache["inverse"] = [[simplify(v) for v in row]
                                      for row in inverse]

    @property
    def dim(self) -> int:
        return self.chart.dim

    def _memo(self, name: str, build):
        got = self._cache.get(name)
        if got is None:
            got = build()
            self._cache[name] = got
        return got

    def det(self) -> Expr:
        return self._memo("det", lambda: sym_det(self.g))

    def inverse(self) -> List[List[Expr]]:
        return self._memo("inverse", lambda: sym_inverse(self.g))

    def _dg(self) -> list:
        def build():
            ch = self.chart
            n = self.dim
            return [[[ch.diff(self.g[a][b], ch.coords[c]) for b in range(n)]
                     for a in range(n)] for c in range(n)]

        return self._memo("dg", build)

    def christoffel(self) -> list:
        """Gamma[a][b][c] = Gamma^a_{bc}."""

        def build():
            n = self.dim
            dg = self._dg()
            ginv = self.inverse()
            gamma = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
            for a in range(n):
                for b in range(n):
                    for c in range(b, n):
                        pieces = []
                        for d in range(n):
                            if ginv[a][d] == ZERO:
                                continue
                            inner = add(dg[b][d][c], dg[c][d][b], neg(dg[d][b][c]))
                            pieces.append(mul(ginv[a][d], inner))
                        val = simplify(mul(0.5, add(*pieces))) if pieces else ZERO
                        gamma[a][b][c] = val
                        gamma[a][c][b] = val
            return gamma

        return self._memo("christoffel", build)

    def riemann(self) -> list:
        """R[a][b][c][d] = R^a_{bcd}."""

        def build():
            n = self.dim
            ch = self.chart
            gam = self.christoffel()
            dgam = [[[[ch.diff(gam[a][b][c], ch.coords[e]) for c in range(n)]
                      for b in range(n)] for a in range(n)] for e in range(n)]
            riem = [[[[ZERO] * n for _ in range(n)] for _ in range(n)]
                    for _ in range(n)]
            for a, b in product(range(n), repeat=2):
                for c in range(n):
                    for d in range(c + 1, n):
                        pieces = [dgam[c][a][d][b], neg(dgam[d][a][c][b])]
                        for e in range(n):
                            if gam[a][c][e] != ZERO and gam[e][d][b] != ZERO:
                                pieces.append(mul(gam[a][c][e], gam[e][d][b]))
                            if gam[a][d][e] != ZERO and gam[e][c][b] != ZERO:
                                pieces.append(neg(mul(gam[a][d][e], gam[e][c][b])))
                        val = simplify(add(*pieces))
                        riem[a][b][c][d] = val
                        riem[a][b][d][c] = simplify(neg(val))
            return riem

        return self._memo("riemann", build)

    def riemann_lowered(self) -> list:
        """R[a][b][c][d] = R_{abcd} = g_{ae} R^e_{bcd}."""

        def build():
            n = self.dim
            up = self.riemann()
            out = [[[[ZERO] * n for _ in range(n)] for _ in range(n)]
                   for _ in range(n)]
            for a, b, c, d in product(range(n), repeat=4):
                out[a][b][c][d] = simplify(
                    add(*[mul(self.g[a][e], up[e][b][c][d]) for e in range(n)]))
            return out

        return self._memo("riemann_lowered", build)

    def ricci(self) -> list:
        def build():
            n = self.dim
            riem = self.riemann()
            return [[simplify(add(*[riem[c][a][c][b] for c in range(n)]))
                     for b in range(n)] for a in range(n)]

        return self._memo("ricci", build)

    def scalar_curvature(self) -> Expr:
        def build():
            n = self.dim
            ric = self.ricci()
            ginv = self.inverse()
            return simplify(add(*[mul(ginv[a][b], ric[a][b])
                                  for a in range(n) for b in range(n)]))

        return self._memo("scalar", build)


def _get(tensor, idx):
    for i in idx:
        tensor = tensor[i]
    return tensor


def _nested_zeros(dims):
    if not dims:
        return ZERO
    return [_nested_zeros(dims[1:]) for _ in range(dims[0])]


def _set(tensor, idx, value):
    for i in idx[:-1]:
        tensor = tensor[i]
    tensor[idx[-1]] = value


def covariant_derivative(metric: Metric, tensor, variance: str):
    """Covariant derivative; the new (derivative) index comes first.

    variance is one letter per tensor slot: 'u' contravariant, 'd' covariant.
    Rank up to 3 is supported; a scalar has variance ''.
    """
    if len(variance) > 3:
        raise ValueError("covariant_derivative supports rank <= 3")
    ch = metric.chart
    n = metric.dim
    if not variance:
        return [ch.diff(tensor, ch.coords[c]) for c in range(n)]
    gam = metric.christoffel()
    out = _nested_zeros([n] * (len(variance) + 1))
    for c in range(n):
        for idx in product(range(n), repeat=len(variance)):
            pieces = [ch.diff(_get(tensor, idx), ch.coords[c])]
            for slot, var in enumerate(variance):
                for e in range(n):
                    idx2 = idx[:slot] + (e,) + idx[slot + 1:]
                    val = _get(tensor, idx2)
                    if val == ZERO:
                        continue
                    if var == "u":
                        pieces.append(mul(gam[idx[slot]][c][e], val))
                    elif var == "d":
                        pieces.append(neg(mul(gam[e][c][idx[slot]], val)))
                    else:
                        raise ValueError(f"bad variance letter {var!r}")
            _set(out, (c,) + idx, simplify(add(*pieces)))
    return out
