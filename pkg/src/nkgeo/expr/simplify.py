"""Light structural simplification (idempotent, no canonical-form claim)."""

from __future__ import annotations

from .nodes import Add, Expr, Func, Mul, Pow, add, fn, mul, pw


def simplify(e: Expr) -> Expr:
    """Rebuild the tree through the normalizing constructors to a fixpoint.

    This folds constants, collects like terms and like powers, merges exp
    factors, and applies exact special values; it does not expand products
    or apply function identities.
    """
    current = e
    for _ in range(8):
        nxt = _pass(current, {})
        if nxt.key == current.key:
            return nxt
        current = nxt
    return current


def _pass(e: Expr, memo: dict) -> Expr:
    got = memo.get(e.key)
    if got is not None:
        return got
    if isinstance(e, Add):
        out = add(*[_pass(t, memo) for t in e.terms])
    elif isinstance(e, Mul):
        out = mul(*[_pass(f, memo) for f in e.factors])
    elif isinstance(e, Pow):
        out = pw(_pass(e.base, memo), e.expo)
    elif isinstance(e, Func):
        out = fn(e.fname, _pass(e.arg, memo))
    else:
        out = e
    memo[e.key] = out
    return out
