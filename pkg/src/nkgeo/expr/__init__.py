"""Small exact expression kernel used by all geometry modules."""

from .nodes import (
    Add,
    Const,
    Expr,
    ExprError,
    Func,
    HALF,
    I_UNIT,
    MINUS_ONE,
    Mul,
    ONE,
    PI,
    PiConst,
    Pow,
    TWO,
    Var,
    ZERO,
    add,
    cos,
    cosh,
    div,
    exp,
    fn,
    free_variables,
    iter_nodes,
    ln,
    mul,
    neg,
    pw,
    rational,
    sin,
    sinh,
    substitute,
    sym,
    syms,
    tanh,
)
from .parser import ParseError, parse
from .printer import to_str
from .calculus import diff, gradient
from .simplify import simplify
from .evaluate import EvalError, compile_expr, compile_exprs, evaluate
from .poly import (
    NotPolynomialError,
    content_prim,
    expand_in,
    integrate_in,
    poly_coeffs,
    proves_zero,
)
from .zero import (
    DEFAULT_POINTS,
    DEFAULT_SEED,
    DEFAULT_TOL,
    SamplingError,
    ZeroVerdict,
    away_from,
    is_zero,
    sample_points,
)

__all__ = [
    "Add", "Const", "Expr", "ExprError", "Func", "HALF", "I_UNIT", "MINUS_ONE",
    "Mul", "ONE", "PI", "PiConst", "Pow", "TWO", "Var", "ZERO",
    "add", "cos", "cosh", "div", "exp", "fn", "free_variables", "iter_nodes",
    "ln", "mul", "neg", "pw", "rational", "sin", "sinh", "substitute", "sym",
    "syms", "tanh",
    "ParseError", "parse", "to_str",
    "diff", "gradient", "simplify",
    "EvalError", "compile_expr", "compile_exprs", "evaluate",
    "NotPolynomialError", "content_prim", "expand_in", "integrate_in",
    "poly_coeffs", "proves_zero",
    "DEFAULT_POINTS", "DEFAULT_SEED", "DEFAULT_TOL", "SamplingError",
    "ZeroVerdict", "away_from", "is_zero", "sample_points",
]
