"""Symbolic matrix helpers over expression entries."""

from __future__ import annotations

from fractions import Fraction

from ..expr import Expr, ZERO, add, mul, neg, pw, simplify


def mat(rows) -> list:
    return [list(r) for r in rows]


def mat_mul(a: list, b: list) -> list:
    n, m, k = len(a), len(b[0]), len(b)
    return [[add(*[mul(a[i][l], b[l][j]) for l in range(k)]) for j in range(m)]
            for i in range(n)]


def mat_add(a: list, b: list) -> list:
    return [[add(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: list, b: list) -> list:
    return [[add(x, neg(y)) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(c, a: list) -> list:
    return [[mul(c, x) for x in row] for row in a]


def mat_comm(a: list, b: list) -> list:
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def mat_trace(a: list) -> Expr:
    return add(*[a[i][i] for i in range(len(a))])


def mat_transpose(a: list) -> list:
    return [list(col) for col in zip(*a)]


def mat_zero(n: int, m: int | None = None) -> list:
    m = n if m is None else m
    return [[ZERO for _ in range(m)] for _ in range(n)]


def mat_eye(n: int) -> list:
    from ..expr import ONE

    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def sym_det(a: list) -> Expr:
    """Determinant by cofactor expansion along the sparsest row."""
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return add(mul(a[0][0], a[1][1]), neg(mul(a[0][1], a[1][0])))
    best = min(range(n), key=lambda i: sum(0 if x == ZERO else 1 for x in a[i]))
    total = []
    for j in range(n):
        if a[best][j] == ZERO:
            continue
        minor = [row[:j] + row[j + 1:] for k, row in enumerate(a) if k != best]
        sign = 1 if (best + j) % 2 == 0 else -1
        piece = mul(a[best][j], sym_det(minor))
        total.append(piece if sign == 1 else neg(piece))
    return simplify(add(*total))


def sym_inverse(a: list) -> list:
    """Inverse via adjugate over the symbolic determinant."""
    n = len(a)
    det = sym_det(a)
    if det == ZERO:
        raise ZeroDivisionError("matrix is symbolically singular")
    inv_det = pw(det, Fraction(-1))
    out = mat_zero(n)
    for i in range(n):
        for j in range(n):
            minor = [row[:i] + row[i + 1:] for k, row in enumerate(a) if k != j]
            sign = 1 if (i + j) % 2 == 0 else -1
            cof = sym_det(minor)
            entry = mul(inv_det, cof)
            out[i][j] = simplify(entry if sign == 1 else neg(entry))
    return out
