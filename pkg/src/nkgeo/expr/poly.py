"""Exact zero decisions and polynomial utilities.

`proves_zero` canonicalizes an expression as a fraction of polynomials over
atomic subexpressions and reports whether the numerator cancels to nothing.
tanh is rewritten to sinh/cosh, multiple-angle arguments are expanded down to
a common base argument, cosh^2/cos^2 are reduced through the Pythagorean
relations, and exp factors merge through their arguments, so mixtures like
tanh(t)*cosh(2*t) - sinh(2*t)/2 - ... are decided exactly.  A True answer is
a proof; False only means "not established here" and callers fall back to
numeric sampling.

`expand_in`/`integrate_in` expand and antidifferentiate expressions that are
polynomial in one named variable (coefficients may involve anything else).
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd

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
    div,
    fn,
    mul,
    pw,
)

_MAX_TERMS = 40000


class NotPolynomialError(Exception):
    """Expression is not polynomial in the requested variable."""


class _Unhandled(Exception):
    """Internal: expression falls outside the provable fragment."""


# ---------------------------------------------------------------------------
# content/primitive splitting of function arguments


def _term_coeff(t: Expr) -> Const:
    if isinstance(t, Const):
        return t
    if isinstance(t, Mul) and isinstance(t.factors[0], Const):
        return t.factors[0]
    return ONE


def _fgcd(a: Fraction, b: Fraction) -> Fraction:
    num = gcd(a.numerator, b.numerator)
    den = (a.denominator * b.denominator) // gcd(a.denominator, b.denominator)
    return Fraction(num, den)


def content_prim(e: Expr) -> tuple:
    """Write e = c * prim with c a signed rational and prim content-free.

    The sign of c follows the first term, so prim's leading coefficient is
    positive and the split is deterministic.
    """
    terms = e.terms if isinstance(e, Add) else (e,)
    fracs = []
    for t in terms:
        c = _term_coeff(t)
        for part in (c.re, c.im):
            if part != 0:
                fracs.append(abs(part))
    if not fracs:
        return Fraction(1), e
    content = reduce(_fgcd, fracs)
    lead = _term_coeff(terms[0])
    lead_val = lead.re if lead.re != 0 else lead.im
    if lead_val < 0:
        content = -content
    prim = mul(Const.make(Fraction(1) / content), e)
    return content, prim


# ---------------------------------------------------------------------------
# function normalization: tanh elimination and multiple-angle expansion

_PAIRED = {"sinh": "cosh", "cosh": "sinh", "sin": "cos", "cos": "sin"}


def _rewrite(e: Expr, visit, memo: dict) -> Expr:
    got = memo.get(e.key)
    if got is not None:
        return got
    if isinstance(e, Add):
        out = add(*[_rewrite(t, visit, memo) for t in e.terms])
    elif isinstance(e, Mul):
        out = mul(*[_rewrite(f, visit, memo) for f in e.factors])
    elif isinstance(e, Pow):
        out = pw(_rewrite(e.base, visit, memo), e.expo)
    elif isinstance(e, Func):
        out = visit(fn(e.fname, _rewrite(e.arg, visit, memo)))
    else:
        out = e
    memo[e.key] = out
    return out


def _drop_tanh(e: Expr) -> Expr:
    def visit(node: Expr) -> Expr:
        if isinstance(node, Func) and node.fname == "tanh":
            return div(fn("sinh", node.arg), fn("cosh", node.arg))
        return node

    return _rewrite(e, visit, {})


def _collect_bases(e: Expr, denoms: dict) -> None:
    stack = [e]
    seen = set()
    while stack:
        node = stack.pop()
        if node.key in seen:
            continue
        seen.add(node.key)
        if isinstance(node, Func) and node.fname in _PAIRED:
            c, prim = content_prim(node.arg)
            q = denoms.setdefault(prim.key, [prim, 1])
            lcm_den = q[1] * c.denominator // gcd(q[1], c.denominator)
            q[1] = lcm_den
            stack.append(node.arg)
        elif isinstance(node, Add):
            stack.extend(node.terms)
        elif isinstance(node, Mul):
            stack.extend(node.factors)
        elif isinstance(node, Pow):
            stack.append(node.base)
        elif isinstance(node, Func):
            stack.append(node.arg)


def _angle_expand(fname: str, p: int, base: Expr) -> Expr:
    """sin/cos/sinh/cosh of p*base as a polynomial in the single-angle pair."""
    hyper = fname in ("sinh", "cosh")
    odd = fname in ("sinh", "sin")
    flip = p < 0
    p = abs(p)
    s1 = Func("sinh" if hyper else "sin", base)
    c1 = Func("cosh" if hyper else "cos", base)
    s, c = ZERO, ONE  # angle 0
    for _ in range(p):
        if hyper:
            s, c = add(mul(s, c1), mul(c, s1)), add(mul(c, c1), mul(s, s1))
        else:
            s, c = add(mul(s, c1), mul(c, s1)), add(mul(c, c1), mul(MINUS_ONE, s, s1))
    out = s if odd else c
    if flip and odd:
        out = mul(MINUS_ONE, out)
    return out


def _expand_angles(e: Expr) -> Expr:
    denoms: dict = {}
    _collect_bases(e, denoms)

    def visit(node: Expr) -> Expr:
        if isinstance(node, Func) and node.fname in _PAIRED:
            c, prim = content_prim(node.arg)
            entry = denoms.get(prim.key)
            qhat = entry[1] if entry else c.denominator
            p = c * qhat
            if p.denominator != 1:
                raise _Unhandled("non-integer multiple-angle ratio")
            base = mul(Const.make(Fraction(1, qhat)), prim)
            if p == 1 and base.key == node.arg.key:
                return node
            return _angle_expand(node.fname, p.numerator, base)
        return node

    return _rewrite(e, visit, {})


def normalize_functions(e: Expr) -> Expr:
    """Eliminate tanh and reduce all trig/hyperbolic args to common bases."""
    return _expand_angles(_drop_tanh(e))


# ---------------------------------------------------------------------------
# fraction-of-polynomials form over atomic subexpressions

_C_ZERO = ZERO
_POLY_ONE = None  # set below


def _const_add(a: Const, b: Const) -> Const:
    return Const.make(a.re + b.re, a.im + b.im)


def _const_mul(a: Const, b: Const) -> Const:
    return Const.make(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re)


def _poly_const(c: Const) -> dict:
    if c.is_zero_const:
        return {}
    return {(): c}


def _poly_atom(atom_key: tuple, expo: Fraction) -> dict:
    return {((atom_key, expo),): ONE}


_POLY_ONE = _poly_const(ONE)


def _is_reducible(atom_key: tuple) -> bool:
    # keys of Func nodes look like (3, fname, argkey)
    return atom_key[0] == 3 and atom_key[1] in ("cosh", "cos")


def _partner_key(atom_key: tuple) -> tuple:
    return (3, _PAIRED[atom_key[1]], atom_key[2])


def _mono_mul(m1: tuple, m2: tuple) -> dict:
    exps: dict = {}
    for k, v in m1:
        exps[k] = exps.get(k, Fraction(0)) + v
    for k, v in m2:
        exps[k] = exps.get(k, Fraction(0)) + v
    plain = []
    out = _POLY_ONE
    for k in sorted(exps):
        v = exps[k]
        if v == 0:
            continue
        if _is_reducible(k) and v >= 2:
            m = int(v) // 2
            rest = v - 2 * m
            # cosh^2 = 1 + sinh^2 ; cos^2 = 1 - sin^2
            sign = ONE if k[1] == "cosh" else MINUS_ONE
            sq = {(): ONE, ((_partner_key(k), Fraction(2)),): sign}
            out = _poly_mul(out, _poly_pow(sq, m))
            if rest != 0:
                plain.append((k, rest))
        else:
            plain.append((k, v))
    mono = tuple(plain)
    if out is _POLY_ONE:
        return {mono: ONE}
    return _poly_mul(out, {mono: ONE})


def _poly_add(a: dict, b: dict) -> dict:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for m, c in b.items():
        got = out.get(m)
        if got is None:
            out[m] = c
        else:
            s = _const_add(got, c)
            if s.is_zero_const:
                del out[m]
            else:
                out[m] = s
    return out


def _poly_mul(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    if len(a) * len(b) > _MAX_TERMS:
        raise _Unhandled("polynomial too large")
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            c = _const_mul(c1, c2)
            piece = _mono_mul(m1, m2)
            for m, pc in piece.items():
                cc = _const_mul(c, pc)
                got = out.get(m)
                if got is None:
                    if not cc.is_zero_const:
                        out[m] = cc
                else:
                    s = _const_add(got, cc)
                    if s.is_zero_const:
                        del out[m]
                    else:
                        out[m] = s
    if len(out) > _MAX_TERMS:
        raise _Unhandled("polynomial too large")
    return out


def _poly_pow(a: dict, n: int) -> dict:
    out = _POLY_ONE
    base = a
    while n:
        if n & 1:
            out = _poly_mul(out, base)
        n >>= 1
        if n:
            base = _poly_mul(base, base)
    return out


def _to_fraction(e: Expr, ctx: dict) -> tuple:
    got = ctx.get(e.key)
    if got is not None:
        return got
    if isinstance(e, Const):
        out = (_poly_const(e), _POLY_ONE)
    elif isinstance(e, (Var, PiConst)):
        out = (_poly_atom(e.key, Fraction(1)), _POLY_ONE)
    elif isinstance(e, Add):
        num: dict = {}
        den = _POLY_ONE
        for t in e.terms:
            tn, td = _to_fraction(t, ctx)
            if td == den:
                num = _poly_add(num, tn)
            else:
                num = _poly_add(_poly_mul(num, td), _poly_mul(tn, den))
                den = _poly_mul(den, td)
        out = (num, den)
    elif isinstance(e, Mul):
        num, den = _POLY_ONE, _POLY_ONE
        for f in e.factors:
            fn_, fd = _to_fraction(f, ctx)
            num = _poly_mul(num, fn_)
            den = _poly_mul(den, fd)
        out = (num, den)
    elif isinstance(e, Pow):
        out = _pow_fraction(e, ctx)
    elif isinstance(e, Func):
        out = _func_fraction(e)
    else:
        raise _Unhandled(f"node {type(e).__name__}")
    ctx[e.key] = out
    return out


def _pow_fraction(e: Pow, ctx: dict) -> tuple:
    expo = e.expo
    if expo.denominator == 1:
        bn, bd = _to_fraction(e.base, ctx)
        n = expo.numerator
        if n > 0:
            return _poly_pow(bn, n), _poly_pow(bd, n)
        return _poly_pow(bd, -n), _poly_pow(bn, -n)
    # fractional exponent: keep base atomic
    if isinstance(e.base, (Var, PiConst, Func)):
        if expo > 0:
            return _poly_atom(e.base.key, expo), _POLY_ONE
        return _POLY_ONE, _poly_atom(e.base.key, -expo)
    return _poly_atom(e.key, Fraction(1)), _POLY_ONE


def _func_fraction(e: Func) -> tuple:
    if e.fname == "exp":
        c, prim = content_prim(e.arg)
        atom = Func("exp", prim)
        if c > 0:
            return _poly_atom(atom.key, c), _POLY_ONE
        return _POLY_ONE, _poly_atom(atom.key, -c)
    return _poly_atom(e.key, Fraction(1)), _POLY_ONE


def proves_zero(e: Expr) -> bool:
    """True only when e is identically zero (exact canonicalization)."""
    if isinstance(e, Const):
        return e.is_zero_const
    try:
        prepared = normalize_functions(e)
        if isinstance(prepared, Const):
            return prepared.is_zero_const
        num, den = _to_fraction(prepared, {})
        return not num and bool(den)
    except _Unhandled:
        return False


# ---------------------------------------------------------------------------
# polynomial expansion in one named variable


def expand_in(e: Expr, var: str) -> dict:
    """Coefficients {degree: Expr} of e viewed as a polynomial in var."""
    if var not in e.free:
        return {0: e} if e != ZERO else {}
    if isinstance(e, Var):
        return {1: ONE}
    if isinstance(e, Add):
        out: dict = {}
        for t in e.terms:
            for k, c in expand_in(t, var).items():
                out[k] = add(out.get(k, ZERO), c)
        return {k: c for k, c in out.items() if c != ZERO}
    if isinstance(e, Mul):
        out = {0: ONE}
        for f in e.factors:
            fc = expand_in(f, var)
            nxt: dict = {}
            for k1, c1 in out.items():
                for k2, c2 in fc.items():
                    k = k1 + k2
                    nxt[k] = add(nxt.get(k, ZERO), mul(c1, c2))
            out = nxt
        return {k: c for k, c in out.items() if c != ZERO}
    if isinstance(e, Pow):
        if e.expo.denominator == 1 and e.expo >= 0:
            base = expand_in(e.base, var)
            out = {0: ONE}
            for _ in range(e.expo.numerator):
                nxt = {}
                for k1, c1 in out.items():
                    for k2, c2 in base.items():
                        k = k1 + k2
                        nxt[k] = add(nxt.get(k, ZERO), mul(c1, c2))
                out = nxt
            return {k: c for k, c in out.items() if c != ZERO}
        raise NotPolynomialError(f"{var} under a non-polynomial power")
    raise NotPolynomialError(f"{var} inside {type(e).__name__.lower()}")


def poly_coeffs(e: Expr, var: str, degree: int) -> list:
    """Coefficient list [c0..c_degree]; raises if the true degree exceeds it."""
    coeffs = expand_in(e, var)
    if coeffs and max(coeffs) > degree:
        raise NotPolynomialError(f"degree {max(coeffs)} exceeds {degree} in {var}")
    return [coeffs.get(k, ZERO) for k in range(degree + 1)]


def integrate_in(e: Expr, var: str) -> Expr:
    """Antiderivative of a polynomial-in-var expression (no constant)."""
    v = Var(var)
    pieces = []
    for k, c in expand_in(e, var).items():
        pieces.append(mul(Const.make(Fraction(1, k + 1)), c, pw(v, Fraction(k + 1))))
    return add(*pieces)
