"""Exact differentiation of expression trees."""

from __future__ import annotations

from fractions import Fraction

from .nodes import (
    Add,
    Const,
    Expr,
    Func,
    MINUS_ONE,
    Mul,
    ONE,
    PiConst,
    Pow,
    Var,
    ZERO,
    add,
    fn,
    mul,
    neg,
    pw,
)


def diff(e: Expr, var, n: int = 1) -> Expr:
    """n-th partial derivative of e with respect to var."""
    name = var.name if isinstance(var, Var) else str(var)
    out = e
    for _ in range(n):
        out = _diff1(out, name, {})
    return out


def _diff1(e: Expr, name: str, memo: dict) -> Expr:
    if name not in e.free:
        return ZERO
    got = memo.get(e.key)
    if got is not None:
        return got
    if isinstance(e, Var):
        out = ONE if e.name == name else ZERO
    elif isinstance(e, (Const, PiConst)):
        out = ZERO
    elif isinstance(e, Add):
        out = add(*[_diff1(t, name, memo) for t in e.terms])
    elif isinstance(e, Mul):
        pieces = []
        for i, f in enumerate(e.factors):
            df = _diff1(f, name, memo)
            if df is ZERO or df == ZERO:
                continue
            others = e.factors[:i] + e.factors[i + 1:]
            pieces.append(mul(df, *others))
        out = add(*pieces)
    elif isinstance(e, Pow):
        db = _diff1(e.base, name, memo)
        out = mul(Const.make(e.expo), pw(e.base, e.expo - 1), db)
    elif isinstance(e, Func):
        da = _diff1(e.arg, name, memo)
        out = mul(_func_derivative(e), da)
    else:
        raise TypeError(f"cannot differentiate {type(e).__name__}")
    memo[e.key] = out
    return out


def _func_derivative(e: Func) -> Expr:
    a = e.arg
    f = e.fname
    if f == "sin":
        return fn("cos", a)
    if f == "cos":
        return neg(fn("sin", a))
    if f == "sinh":
        return fn("cosh", a)
    if f == "cosh":
        return fn("sinh", a)
    if f == "tanh":
        return add(ONE, neg(pw(fn("tanh", a), Fraction(2))))
    if f == "exp":
        return e
    if f == "ln":
        return pw(a, Fraction(-1))
    raise TypeError(f"no derivative rule for {f}")


def gradient(e: Expr, variables) -> list:
    return [diff(e, v) for v in variables]
