"""Shared test utilities: deterministic random polynomial potentials."""

from __future__ import annotations

import numpy as np
import pytest

from nkgeo.expr import add, mul, pw, sym


def random_polynomial(rng, names, degree=4, terms=6, max_coeff=3):
    """Random integer-coefficient polynomial in the given variables."""
    pieces = []
    for _ in range(terms):
        total = int(rng.integers(0, degree + 1))
        exps = np.zeros(len(names), dtype=int)
        for _ in range(total):
            exps[int(rng.integers(0, len(names)))] += 1
        coeff = int(rng.integers(1, max_coeff + 1))
        if rng.random() < 0.5:
            coeff = -coeff
        factors = [coeff] + [pw(sym(nm), int(e))
                             for nm, e in zip(names, exps) if e]
        pieces.append(mul(*factors))
    return add(*pieces)


def chart_names(n):
    m = 2 * n
    return [f"x{i}" for i in range(1, m + 1)] + \
        [f"y{i}" for i in range(1, m + 1)]


@pytest.fixture
def poly_theta():
    """Factory for deterministic random polynomial potentials."""

    def make(seed, n=1, degree=4, terms=6):
        rng = np.random.default_rng(seed)
        return random_polynomial(rng, chart_names(n), degree=degree,
                                 terms=terms)

    return make
