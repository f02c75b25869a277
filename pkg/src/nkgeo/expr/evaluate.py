"""Numeric evaluation: a direct tree walker and a compiling fast path."""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Mapping, Sequence

from .nodes import Add, Const, Expr, Func, Mul, PiConst, Pow, Var


class EvalError(Exception):
    """Evaluation failed (unbound variable or singular point)."""

    def __init__(self, message: str, node: Expr | None = None):
        super().__init__(message)
        self.node = node


_CFUNCS = {
    "sin": cmath.sin,
    "cos": cmath.cos,
    "sinh": cmath.sinh,
    "cosh": cmath.cosh,
    "tanh": cmath.tanh,
    "exp": cmath.exp,
    "ln": cmath.log,
}


def evaluate(e: Expr, env: Mapping[str, complex]) -> complex:
    """Evaluate e at a point given as {variable name: complex value}."""
    if isinstance(e, Const):
        return e.as_complex()
    if isinstance(e, PiConst):
        return complex(math.pi)
    if isinstance(e, Var):
        try:
            return complex(env[e.name])
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}", e) from None
    if isinstance(e, Add):
        return sum(evaluate(t, env) for t in e.terms)
    if isinstance(e, Mul):
        out = complex(1)
        for f in e.factors:
            out *= evaluate(f, env)
        return out
    if isinstance(e, Pow):
        base = evaluate(e.base, env)
        return _cpow(base, e.expo, e)
    if isinstance(e, Func):
        arg = evaluate(e.arg, env)
        try:
            return _CFUNCS[e.fname](arg)
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"{e.fname} failed at {arg}: {exc}", e) from None
    raise TypeError(f"cannot evaluate {type(e).__name__}")


def _cpow(base: complex, expo: Fraction, node: Expr) -> complex:
    try:
        if expo.denominator == 1:
            return base ** expo.numerator
        return base ** float(expo)
    except ZeroDivisionError:
        raise EvalError(f"singular point: {node} with zero base", node) from None
    except (ValueError, OverflowError) as exc:
        raise EvalError(f"power failed: {exc}", node) from None


# ---------------------------------------------------------------------------
# compilation


def compile_exprs(exprs: Sequence[Expr], params: Sequence[str]):
    """Compile expressions into one function (*values) -> tuple of complex.

    Shared subtrees are evaluated once.  Raises EvalError for free variables
    not listed in params; the returned callable raises EvalError at singular
    points.
    """
    param_list = list(params)
    missing = set()
    for e in exprs:
        missing |= e.free.difference(param_list)
    if missing:
        raise EvalError(f"unbound variables {sorted(missing)!r}")

    names: dict = {}
    lines: list = []
    counter = [0]

    def new_name() -> str:
        counter[0] += 1
        return f"t{counter[0]}"

    def emit(node: Expr) -> str:
        got = names.get(node.key)
        if got is not None:
            return got
        if isinstance(node, Const):
            name = repr(node.as_complex())
            if len(name) > 24:
                hold = new_name()
                lines.append(f"{hold} = {name}")
                name = hold
        elif isinstance(node, PiConst):
            name = "_pi"
        elif isinstance(node, Var):
            name = f"v_{node.name}"
        elif isinstance(node, Add):
            parts = [emit(t) for t in node.terms]
            name = new_name()
            lines.append(f"{name} = " + " + ".join(parts))
        elif isinstance(node, Mul):
            parts = [emit(f) for f in node.factors]
            name = new_name()
            lines.append(f"{name} = " + " * ".join(parts))
        elif isinstance(node, Pow):
            base = emit(node.base)
            name = new_name()
            if node.expo == Fraction(1, 2):
                lines.append(f"{name} = _sqrt({base})")
            elif node.expo.denominator == 1:
                lines.append(f"{name} = {base} ** {node.expo.numerator}")
            else:
                lines.append(f"{name} = {base} ** {float(node.expo)!r}")
        elif isinstance(node, Func):
            arg = emit(node.arg)
            name = new_name()
            lines.append(f"{name} = _{node.fname}({arg})")
        else:
            raise TypeError(f"cannot compile {type(node).__name__}")
        names[node.key] = name
        return name

    results = [emit(e) for e in exprs]
    args = ", ".join(f"v_{p}" for p in param_list)
    body = "\n    ".join(lines) if lines else "pass"
    src = (
        f"def _compiled({args}):\n"
        f"    {body}\n"
        f"    return ({', '.join(results)}{',' if len(results) == 1 else ''})\n"
    )
    scope = {f"_{k}": v for k, v in _CFUNCS.items()}
    scope["_pi"] = complex(math.pi)
    scope["_sqrt"] = cmath.sqrt
    exec(src, scope)  # noqa: S102 - generated from a closed expression grammar
    raw = scope["_compiled"]

    def call(*values):
        try:
            return raw(*[complex(v) for v in values])
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise EvalError(f"singular point: {exc}") from None

    call.source = src
    call.params = tuple(param_list)
    return call


def compile_expr(e: Expr, params: Sequence[str]):
    """Compile a single expression to a scalar-valued callable."""
    tup = compile_exprs([e], params)

    def call(*values):
        return tup(*values)[0]

    call.params = tup.params
    return call
