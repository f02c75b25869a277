"""Expression trees back to text, such that parse(to_str(e)) == e."""

from __future__ import annotations

from fractions import Fraction

from .nodes import Add, Const, Expr, Func, Mul, PiConst, Pow, Var

# syntax levels of produced text: higher binds tighter
_ADD = 1
_NEGMUL = 1  # starts with a unary minus
_MUL = 2
_POW = 3
_ATOM = 4


def to_str(e: Expr) -> str:
    text, _ = _render(e)
    return text


def _frac_str(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def _wrap(text: str, level: int, need: int) -> str:
    return f"({text})" if level < need else text


def _const_str(c: Const) -> tuple:
    re, im = c.re, c.im
    if im == 0:
        text = _frac_str(re)
        if re < 0:
            return text, _NEGMUL
        return text, (_MUL if re.denominator > 1 else _ATOM)
    if re == 0:
        if im == 1:
            return "i", _ATOM
        if im == -1:
            return "-i", _NEGMUL
        text = f"{_frac_str(im)}*i"
        return text, (_NEGMUL if im < 0 else _MUL)
    im_text = "i" if im == 1 else ("-i" if im == -1 else f"{_frac_str(im)}*i")
    if not im_text.startswith("-"):
        im_text = "+" + im_text
    return f"{_frac_str(re)}{im_text}", _ADD


def _render(e: Expr) -> tuple:
    if isinstance(e, Const):
        return _const_str(e)
    if isinstance(e, PiConst):
        return "pi", _ATOM
    if isinstance(e, Var):
        return e.name, _ATOM
    if isinstance(e, Func):
        inner, _ = _render(e.arg)
        return f"{e.fname}({inner})", _ATOM
    if isinstance(e, Pow):
        return _render_pow(e)
    if isinstance(e, Mul):
        return _render_mul(e.factors)
    if isinstance(e, Add):
        parts = []
        for t in e.terms:
            text, _ = _render(t)
            if parts and not text.startswith("-"):
                parts.append("+" + text)
            else:
                parts.append(text)
        return "".join(parts), _ADD
    raise TypeError(f"unprintable node {type(e).__name__}")


def _render_pow(e: Pow) -> tuple:
    if e.expo < 0:
        if e.expo == -1:
            den_text, den_level = _render(e.base)
        else:
            den_text, den_level = _render_pow(Pow(e.base, -e.expo))
        return f"1/{_wrap(den_text, den_level, _ATOM)}", _MUL
    base_text, base_level = _render(e.base)
    base = _wrap(base_text, base_level, _ATOM)
    if e.expo.denominator == 1:
        return f"{base}^{e.expo.numerator}", _POW
    return f"{base}^({_frac_str(e.expo)})", _POW


def _render_mul(factors: tuple) -> tuple:
    sign = ""
    num_parts = []  # (text, level)
    den_parts = []
    rest = factors
    if isinstance(factors[0], Const):
        c = factors[0]
        rest = factors[1:]
        if c.im == 0 or c.re == 0:
            r = c.re if c.im == 0 else c.im
            if r < 0:
                sign = "-"
                r = -r
            if r.numerator != 1:
                num_parts.append((str(r.numerator), _ATOM))
            if r.denominator != 1:
                den_parts.append((str(r.denominator), _ATOM))
            if c.im != 0:
                num_parts.append(("i", _ATOM))
        else:
            num_parts.append(_const_str(c))
    for f in rest:
        if isinstance(f, Pow) and f.expo < 0:
            if f.expo == -1:
                den_parts.append(_render(f.base))
            else:
                den_parts.append(_render_pow(Pow(f.base, -f.expo)))
        else:
            num_parts.append(_render(f))
    num = "*".join(_wrap(t, lv, _MUL) for t, lv in num_parts) if num_parts else "1"
    if not den_parts:
        return sign + num, (_NEGMUL if sign else _MUL)
    if len(den_parts) == 1:
        den = _wrap(*den_parts[0], _POW)
    else:
        joined = "*".join(_wrap(t, lv, _MUL) for t, lv in den_parts)
        den = f"({joined})"
    return f"{sign}{num}/{den}", (_NEGMUL if sign else _MUL)
