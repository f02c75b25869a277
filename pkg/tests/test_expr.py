"""Expression kernel tests.

The reference evaluator below is independent of the package: it renders the
expression to text and evaluates the text with Python's own parser.  Compiled
and tree-walking evaluation are both checked against it on random trees.
"""

from __future__ import annotations

import cmath
import math
import random
import re

import pytest
from hypothesis import given, settings, strategies as st

from nkgeo.expr import (
    Const,
    EvalError,
    ParseError,
    SamplingError,
    ZERO,
    compile_expr,
    compile_exprs,
    content_prim,
    cos,
    cosh,
    diff,
    evaluate,
    exp,
    expand_in,
    integrate_in,
    is_zero,
    ln,
    parse,
    poly_coeffs,
    proves_zero,
    pw,
    rational,
    simplify,
    sin,
    sinh,
    substitute,
    sym,
    syms,
    tanh,
    to_str,
)

# ---------------------------------------------------------------------------
# oracle 1: reference evaluation through Python's own expression parser


def reference_eval(text: str, env: dict) -> complex:
    py = text.replace("^", "**")
    py = re.sub(r"\bln\(", "_log(", py)
    py = re.sub(r"\bi\b", "(1j)", py)
    ns = {
        "sin": cmath.sin, "cos": cmath.cos, "sinh": cmath.sinh,
        "cosh": cmath.cosh, "tanh": cmath.tanh, "exp": cmath.exp,
        "_log": cmath.log, "pi": math.pi,
    }
    ns.update(env)
    return complex(eval(py, {"__builtins__": {}}, ns))


# oracle 2: finite differences for the derivative


def fd_derivative(e, var: str, env: dict, h: float = 1e-6) -> complex:
    hi = dict(env)
    lo = dict(env)
    hi[var] = env[var] + h
    lo[var] = env[var] - h
    return (evaluate(e, hi) - evaluate(e, lo)) / (2 * h)


# random tree generator (plain random module, fixed seeds)

_VARS = ("x1", "x2", "y1")
_FUNCS = ("sin", "cos", "sinh", "cosh", "tanh", "exp", "ln")


def gen_expr(rng: random.Random, depth: int):
    if depth == 0 or rng.random() < 0.3:
        kind = rng.random()
        if kind < 0.5:
            return sym(rng.choice(_VARS))
        if kind < 0.8:
            return rational(rng.randint(-6, 6))
        if kind < 0.9:
            return rational(rng.randint(1, 9), rng.randint(2, 7))
        return rational(0, 1) + rational(rng.randint(-3, 3), 1) * parse("i")
    op = rng.random()
    if op < 0.3:
        return gen_expr(rng, depth - 1) + gen_expr(rng, depth - 1)
    if op < 0.55:
        return gen_expr(rng, depth - 1) * gen_expr(rng, depth - 1)
    if op < 0.7:
        return gen_expr(rng, depth - 1) / gen_expr(rng, depth - 1)
    if op < 0.85:
        return pw(gen_expr(rng, depth - 1), rng.choice([-2, -1, 2, 3]))
    from nkgeo.expr import fn

    return fn(rng.choice(_FUNCS), gen_expr(rng, depth - 1))


class TestEvaluation:
    def test_eval_matches_reference_on_random_trees(self):
        """Tree-walk and compiled eval agree with an independent evaluator."""
        rng = random.Random(20240817)
        checked = 0
        for _ in range(1000):
            e = gen_expr(rng, rng.randint(1, 4))
            env = {v: complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
                   for v in _VARS}
            text = to_str(e)
            try:
                want = reference_eval(text, env)
            except (ZeroDivisionError, ValueError, OverflowError):
                continue
            if not (abs(want) < 1e8):
                continue
            try:
                got_walk = evaluate(e, env)
            except EvalError:
                continue
            fnc = compile_exprs([e], list(_VARS))
            got_fast = fnc(*[env[v] for v in _VARS])[0]
            scale = 1 + abs(want)
            assert abs(got_walk - want) / scale < 1e-9, text
            assert abs(got_fast - want) / scale < 1e-9, text
            checked += 1
        assert checked > 600

    def test_unbound_variable_raises(self):
        with pytest.raises(EvalError):
            evaluate(parse("x1+zz"), {"x1": 1.0})

    def test_singular_point_reports_subexpression(self):
        with pytest.raises(EvalError) as err:
            evaluate(parse("1/x1"), {"x1": 0.0})
        assert "x1" in str(err.value)

    def test_compile_rejects_missing_params(self):
        with pytest.raises(EvalError):
            compile_expr(parse("x1+q"), ["x1"])

    def test_ln_branch_matches_cmath(self):
        e = ln(sym("x1"))
        assert evaluate(e, {"x1": -2.0}) == pytest.approx(cmath.log(-2.0))


class TestDifferentiation:
    def test_diff_matches_finite_differences(self):
        """d/dx agrees with central differences on random trees."""
        rng = random.Random(99)
        checked = 0
        for _ in range(300):
            e = gen_expr(rng, rng.randint(1, 3))
            var = rng.choice(_VARS)
            d = diff(e, var)
            env = {v: rng.uniform(0.2, 1.8) for v in _VARS}
            try:
                want = fd_derivative(e, var, env)
                got = evaluate(d, env)
            except EvalError:
                continue
            if abs(want) > 1e5:
                continue
            assert abs(got - want) <= 2e-4 * (1 + abs(want)), to_str(e)
            checked += 1
        assert checked > 150

    def test_product_rule_exact(self):
        x = sym("x1")
        a = sin(x) * pw(x, 3)
        b = exp(x) + x
        lhs = diff(a * b, "x1")
        rhs = diff(a, "x1") * b + a * diff(b, "x1")
        assert is_zero(lhs - rhs).ok

    def test_mixed_partials_commute(self):
        e = parse("sin(x1*y1)*exp(x1)+y1^3/x1")
        d12 = diff(diff(e, "x1"), "y1")
        d21 = diff(diff(e, "y1"), "x1")
        assert is_zero(d12 - d21).status == "symbolic"

    def test_function_table(self):
        x = sym("x1")
        assert diff(tanh(x), "x1") == 1 - tanh(x) ** 2
        assert diff(ln(x), "x1") == pw(x, -1)
        assert diff(exp(2 * x), "x1") == 2 * exp(2 * x)

    def test_higher_order(self):
        x = sym("x1")
        assert diff(pw(x, 5), "x1", 5) == rational(120)


class TestParsePrint:
    @settings(max_examples=120, deadline=None, derandomize=True)
    @given(st.integers(0, 10**6))
    def test_round_trip_random_trees(self, seed):
        rng = random.Random(seed)
        e = gen_expr(rng, rng.randint(1, 4))
        assert parse(to_str(e)) == e

    def test_quotient_parse_shape(self):
        e = parse("sinh(y1)/x1")
        assert e == sinh(sym("y1")) / sym("x1")

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as err:
            parse("x1 +* y2")
        assert err.value.position == 4

    def test_unbalanced_parens(self):
        with pytest.raises(ParseError):
            parse("sin(q)+cos(w")

    def test_unknown_function(self):
        with pytest.raises(ParseError) as err:
            parse("zeta(x1)")
        assert "zeta" in str(err.value)

    def test_decimals_are_exact(self):
        assert parse("0.5") == rational(1, 2)
        assert parse("2.25*x1") == rational(9, 4) * sym("x1")

    def test_imaginary_unit_and_pi(self):
        assert evaluate(parse("i^2"), {}) == pytest.approx(-1)
        assert evaluate(parse("cos(pi)"), {}) == pytest.approx(-1)

    def test_nonconstant_exponent_goes_through_exp_ln(self):
        e = parse("x1^y1")
        assert evaluate(e, {"x1": 2.0, "y1": 3.0}) == pytest.approx(8.0)


class TestSimplify:
    @settings(max_examples=120, deadline=None, derandomize=True)
    @given(st.integers(0, 10**6))
    def test_idempotent(self, seed):
        rng = random.Random(seed)
        e = gen_expr(rng, rng.randint(1, 4))
        s = simplify(e)
        assert simplify(s) == s

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(st.integers(0, 10**6))
    def test_value_preserving(self, seed):
        rng = random.Random(seed)
        e = gen_expr(rng, rng.randint(1, 3))
        s = simplify(e)
        env = {v: rng.uniform(0.3, 1.5) for v in _VARS}
        try:
            a = evaluate(e, env)
            b = evaluate(s, env)
        except EvalError:
            return
        assert abs(a - b) <= 1e-8 * (1 + abs(a))

    def test_like_term_collection(self):
        x, y = syms("x1 x2")
        assert simplify(2 * x * y + 3 * y * x) == 5 * x * y
        assert simplify((x + y) - (y + x)) == ZERO

    def test_exp_merging(self):
        q = sym("q")
        assert simplify(exp(q) * exp(-q)) == rational(1)
        assert simplify(exp(q / 2) ** 2) == exp(q)

    def test_special_values(self):
        assert simplify(cos(ZERO)) == rational(1)
        assert simplify(ln(exp(sym("t")))) == sym("t")


class TestZeroDecisions:
    def test_pythagorean_identities(self):
        t = sym("t")
        assert proves_zero(cosh(t) ** 2 - sinh(t) ** 2 - 1)
        assert proves_zero(sin(t) ** 2 + cos(t) ** 2 - 1)
        assert proves_zero(tanh(t) - sinh(t) / cosh(t))
        assert proves_zero(cosh(2 * t) - 1 - 2 * sinh(t) ** 2)
        assert proves_zero(sinh(2 * t) - 2 * sinh(t) * cosh(t))

    def test_mixed_angle_bases(self):
        t = sym("t")
        e = sinh(2 * t) * tanh(t) - 2 * sinh(t) ** 2
        assert proves_zero(e)

    def test_rational_function_cancellation(self):
        x, y = syms("x1 x2")
        e = (x ** 2 - y ** 2) / (x + y) - x + y
        assert proves_zero(e)

    def test_does_not_claim_nonzero_things(self):
        t = sym("t")
        assert not proves_zero(cosh(t) ** 2 - sinh(t) ** 2)
        assert not proves_zero(sinh(t) - t)

    def test_is_zero_statuses(self):
        x, y = syms("x1 x2")
        assert is_zero(x * y - y * x).status == "symbolic"
        v = is_zero(x - y)
        assert v.status == "nonzero" and not v.ok
        assert v.witness is not None
        got = v.witness["x1"] - v.witness["x2"]
        assert abs(got - v.witness_value.real) < 1e-12

    def test_is_zero_deterministic(self):
        x, y = syms("x1 x2")
        a = is_zero(sin(x) * y, seed=7)
        b = is_zero(sin(x) * y, seed=7)
        assert a.to_json() == b.to_json()

    def test_exclusion_predicate(self):
        x = sym("x1")
        e = sin(x) / x  # removable singularity at 0; exclude a band anyway
        v = is_zero(e - 1 + x ** 2 / 6 - x ** 4 / 120, low=-1.0, high=1.0,
                    exclude=lambda p: abs(p["x1"]) < 0.1, tol=1e-3)
        assert v.status == "numeric"

    def test_all_points_excluded_raises(self):
        x = sym("x1")
        with pytest.raises(SamplingError):
            is_zero(x, exclude=lambda p: True)

    def test_shared_points_across_components(self):
        x, y = syms("x1 x2")
        v = is_zero([x - x, (x + y) - (y + x), sin(x) - sin(x)])
        assert v.status == "symbolic"


class TestPolynomialTools:
    def test_expand_in(self):
        x, y = syms("x1 x2")
        e = (x + y) ** 2 * (1 + x)
        c = expand_in(e, "x1")
        assert c[3] == rational(1)
        assert simplify(c[0] - y ** 2) == ZERO

    def test_poly_coeffs_degree_guard(self):
        x = sym("x1")
        from nkgeo.expr import NotPolynomialError

        with pytest.raises(NotPolynomialError):
            poly_coeffs(x ** 5, "x1", 4)
        with pytest.raises(NotPolynomialError):
            expand_in(sin(x), "x1")

    def test_integrate_in(self):
        x, y = syms("x1 x2")
        e = 3 * x ** 2 * y + 2 * x
        f = integrate_in(e, "x1")
        assert is_zero(diff(f, "x1") - e).status == "symbolic"

    def test_content_prim(self):
        t = sym("t")
        c, prim = content_prim(3 * t / 2)
        assert c == 1.5 and prim == t
        c2, prim2 = content_prim(-t / 2 - t ** 2 / 4)
        assert c2 == -0.25
        assert simplify(rational(-1, 4) * prim2 - (-t / 2 - t ** 2 / 4)) == ZERO
