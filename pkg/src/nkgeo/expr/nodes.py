"""Immutable expression trees with normalizing constructors.

Nodes: exact complex-rational constants, pi, variables, n-ary sums and
products, powers with rational exponents, and the function atoms
sin/cos/sinh/cosh/tanh/exp/ln.  Unary minus and quotients are normalized at
construction into products (``-e = (-1)*e``, ``a/b = a*b^-1``); the printer
renders them back.  Every node carries a structural key used for hashing,
equality and deterministic ordering.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

FUNCTION_NAMES = ("sin", "cos", "sinh", "cosh", "tanh", "exp", "ln")

_DERIV_RANK = {"const": 0, "pi": 1, "var": 2, "func": 3, "pow": 4, "mul": 5, "add": 6}


class ExprError(Exception):
    """Malformed construction of an expression node."""


class Expr:
    """Base class; all concrete nodes are immutable and hashable."""

    __slots__ = ("key", "free", "_hash")

    def _finish(self, key: tuple, free: frozenset) -> None:
        object.__setattr__(self, "key", key)
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, name, value):
        raise AttributeError("expression nodes are immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and self.key == other.key

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    # Arithmetic sugar; accepts ints/Fractions on either side.
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return add(self, neg(_coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), neg(self))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, other):
        if isinstance(other, Expr):
            return pw_expr(self, other)
        return pw(self, Fraction(other))

    def __str__(self) -> str:
        from .printer import to_str

        return to_str(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self}>"


def _coerce(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return Const.make(Fraction(v))
    if isinstance(v, float):
        return Const.make(Fraction(v))  # exact binary value
    raise TypeError(f"cannot use {v!r} in an expression")


class Const(Expr):
    """Exact complex-rational constant (re + im*i with Fraction parts)."""

    __slots__ = ("re", "im")
    _interned: dict = {}

    def __init__(self, re: Fraction, im: Fraction):
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        key = (0, re.numerator, re.denominator, im.numerator, im.denominator)
        self._finish(key, frozenset())

    @staticmethod
    def make(re, im=0) -> "Const":
        re = Fraction(re)
        im = Fraction(im)
        cached = Const._interned.get((re, im))
        if cached is not None:
            return cached
        node = Const(re, im)
        if len(Const._interned) < 512:
            Const._interned[(re, im)] = node
        return node

    @property
    def is_zero_const(self) -> bool:
        return self.re == 0 and self.im == 0

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def as_complex(self) -> complex:
        return complex(float(self.re), float(self.im))


ZERO = Const.make(0)
ONE = Const.make(1)
MINUS_ONE = Const.make(-1)
TWO = Const.make(2)
HALF = Const.make(Fraction(1, 2))
I_UNIT = Const.make(0, 1)


class PiConst(Expr):
    __slots__ = ()

    def __init__(self):
        self._finish((1,), frozenset())


PI = PiConst()


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        if not name or not (name[0].isalpha() or name[0] == "_"):
            raise ExprError(f"bad variable name {name!r}")
        object.__setattr__(self, "name", name)
        self._finish((2, name), frozenset((name,)))


def sym(name: str) -> Var:
    return Var(name)


def syms(names: str) -> tuple:
    return tuple(Var(n) for n in names.replace(",", " ").split())


class Func(Expr):
    __slots__ = ("fname", "arg")

    def __init__(self, fname: str, arg: Expr):
        if fname not in FUNCTION_NAMES:
            raise ExprError(f"unknown function {fname!r}")
        object.__setattr__(self, "fname", fname)
        object.__setattr__(self, "arg", arg)
        self._finish((3, fname, arg.key), arg.free)


class Pow(Expr):
    """base ** exponent with exponent a rational constant."""

    __slots__ = ("base", "expo")

    def __init__(self, base: Expr, expo: Fraction):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "expo", expo)
        self._finish((4, base.key, expo.numerator, expo.denominator), base.free)


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        object.__setattr__(self, "factors", factors)
        free = frozenset().union(*(f.free for f in factors))
        self._finish((5, tuple(f.key for f in factors)), free)


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        object.__setattr__(self, "terms", terms)
        free = frozenset().union(*(t.free for t in terms))
        self._finish((6, tuple(t.key for t in terms)), free)


# ---------------------------------------------------------------------------
# normalizing constructors


def _const_mul(a: Const, b: Const) -> Const:
    return Const.make(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re)


def _const_add(a: Const, b: Const) -> Const:
    return Const.make(a.re + b.re, a.im + b.im)


def _iroot(n: int, k: int):
    """Exact integer k-th root of n >= 1, or None."""
    if n == 1:
        return 1
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 1 and cand ** k == n:
            return cand
    return None


def _exact_root(f: Fraction, k: int):
    """Exact k-th root of a positive rational, or None."""
    num = _iroot(f.numerator, k)
    if num is None:
        return None
    den = _iroot(f.denominator, k)
    if den is None:
        return None
    return Fraction(num, den)


def _const_ipow(c: Const, n: int) -> Const:
    if n == 0:
        return ONE
    if n < 0:
        den = c.re * c.re + c.im * c.im
        if den == 0:
            raise ZeroDivisionError("0 to a negative power")
        inv = Const.make(c.re / den, -c.im / den)
        return _const_ipow(inv, -n)
    out = ONE
    base = c
    while n:
        if n & 1:
            out = _const_mul(out, base)
        base = _const_mul(base, base)
        n >>= 1
    return out


def add(*terms) -> Expr:
    """Sum with flattening, exact constant folding and like-term collection."""
    const = ZERO
    bucket: dict = {}  # rest.key -> [Const coeff, Expr rest]
    stack = [_coerce(t) for t in reversed(terms)]
    while stack:
        t = stack.pop()
        if isinstance(t, Add):
            stack.extend(reversed(t.terms))
            continue
        if isinstance(t, Const):
            const = _const_add(const, t)
            continue
        coeff, rest = _split_coeff(t)
        slot = bucket.get(rest.key)
        if slot is None:
            bucket[rest.key] = [coeff, rest]
        else:
            slot[0] = _const_add(slot[0], coeff)
    out = []
    rescan = False
    for _, (coeff, rest) in sorted(bucket.items(), key=lambda kv: kv[0]):
        if coeff.is_zero_const:
            continue
        if coeff == ONE:
            piece = rest
        else:
            piece = mul(coeff, rest)  # may distribute back into a sum
            if isinstance(piece, (Add, Const)):
                rescan = True
        out.append(piece)
    if rescan:
        return add(const, *out)
    if not const.is_zero_const:
        out.insert(0, const)
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def _split_coeff(e: Expr) -> tuple:
    """Split e into (rational-complex coefficient, remaining factor)."""
    if isinstance(e, Mul) and isinstance(e.factors[0], Const):
        rest = e.factors[1:]
        rest_e = rest[0] if len(rest) == 1 else Mul(rest)
        return e.factors[0], rest_e
    return ONE, e


def _term_coeff(e: Expr) -> "Const":
    if isinstance(e, Const):
        return e
    return _split_coeff(e)[0]


def mul(*factors) -> Expr:
    """Product with flattening, folding and same-base exponent collection.

    exp factors are merged additively through their arguments (valid on the
    real domains sampled here), so exp(q)*exp(-q) and exp(q/2)^2 normalize.
    """
    const = ONE
    powers: dict = {}  # base.key -> [base Expr, Fraction exponent]
    exp_args: list = []  # summands of merged exp argument
    stack = [_coerce(f) for f in reversed(factors)]
    while stack:
        f = stack.pop()
        if isinstance(f, Mul):
            stack.extend(reversed(f.factors))
            continue
        if isinstance(f, Const):
            if f.is_zero_const:
                return ZERO
            const = _const_mul(const, f)
            continue
        if isinstance(f, Func) and f.fname == "exp":
            exp_args.append(f.arg)
            continue
        if isinstance(f, Pow):
            base, expo = f.base, f.expo
            if isinstance(base, Func) and base.fname == "exp":
                exp_args.append(mul(Const.make(expo), base.arg))
                continue
        else:
            base, expo = f, Fraction(1)
        slot = powers.get(base.key)
        if slot is None:
            powers[base.key] = [base, expo]
        else:
            slot[1] += expo
    out = []
    for _, (base, expo) in sorted(powers.items(), key=lambda kv: kv[0]):
        if expo == 0:
            continue
        p = pw(base, expo)
        if isinstance(p, Const):
            const = _const_mul(const, p)
        else:
            out.append(p)
    if exp_args:
        merged = add(*exp_args)
        e = fn("exp", merged)
        if isinstance(e, Const):
            const = _const_mul(const, e)
        else:
            out.append(e)
    if const.is_zero_const:
        return ZERO
    if not out:
        return const
    if len(out) == 1 and isinstance(out[0], Add) and not (const.re == 1 and const.im == 0):
        # distribute a bare constant over a sum so like terms can cancel
        return add(*[mul(const, t) for t in out[0].terms])
    if not (const.re == 1 and const.im == 0):
        out.insert(0, const)
    if len(out) == 1:
        return out[0]
    return Mul(tuple(out))


def pw(base, expo) -> Expr:
    """base ** expo for a rational exponent."""
    base = _coerce(base)
    expo = Fraction(expo)
    if expo == 0:
        return ONE
    if expo == 1:
        return base
    if isinstance(base, Const):
        if base.is_zero_const:
            if expo > 0:
                return ZERO
            return Pow(base, Fraction(-1))  # singular; evaluation rejects it
        if expo.denominator == 1:
            return _const_ipow(base, expo.numerator)
        if base is ONE or (base.re == 1 and base.im == 0):
            return ONE
        if base.im == 0 and base.re > 0:
            root = _exact_root(base.re, expo.denominator)
            if root is not None:
                return _const_ipow(Const.make(root), expo.numerator)
        return Pow(base, expo)
    if isinstance(base, Pow) and expo.denominator == 1:
        return pw(base.base, base.expo * expo)
    if isinstance(base, Func) and base.fname == "exp":
        return fn("exp", mul(Const.make(expo), base.arg))
    if isinstance(base, Mul) and expo.denominator == 1:
        return mul(*[pw(f, expo) for f in base.factors])
    if isinstance(base, Add) and expo.denominator == 1:
        # canonical sign: make the leading coefficient positive so bases
        # like (1 - 1/r) and (-1 + 1/r) share one representation
        lead = _term_coeff(base.terms[0])
        lead_val = lead.re if lead.re != 0 else lead.im
        if lead_val < 0:
            flipped = pw(add(*[neg(t) for t in base.terms]), expo)
            return flipped if expo.numerator % 2 == 0 else mul(MINUS_ONE, flipped)
    return Pow(base, expo)


def pw_expr(base: Expr, expo: Expr) -> Expr:
    """General power; non-rational exponents go through exp/ln."""
    if isinstance(expo, Const) and expo.is_real:
        return pw(base, expo.re)
    return fn("exp", mul(expo, fn("ln", base)))


def neg(e) -> Expr:
    return mul(MINUS_ONE, _coerce(e))


def div(a, b) -> Expr:
    return mul(_coerce(a), pw(_coerce(b), Fraction(-1)))


_ODD_FUNCS = {"sin", "sinh", "tanh"}
_EVEN_FUNCS = {"cos", "cosh"}

_EXACT_AT_ZERO = {"sin": ZERO, "cos": ONE, "sinh": ZERO, "cosh": ONE,
                  "tanh": ZERO, "exp": ONE}


def fn(fname: str, arg) -> Expr:
    """Apply a named function, folding exact special values and parity."""
    arg = _coerce(arg)
    if fname not in FUNCTION_NAMES:
        raise ExprError(f"unknown function {fname!r}")
    if isinstance(arg, Const) and arg.is_zero_const and fname in _EXACT_AT_ZERO:
        return _EXACT_AT_ZERO[fname]
    if fname == "ln" and arg == ONE:
        return ZERO
    if fname == "ln" and isinstance(arg, Func) and arg.fname == "exp":
        return arg.arg
    if fname in _ODD_FUNCS or fname in _EVEN_FUNCS:
        s, stripped = _strip_sign(arg)
        if s < 0:
            inner = Func(fname, stripped)
            return neg(inner) if fname in _ODD_FUNCS else inner
    return Func(fname, arg)


def _strip_sign(e: Expr) -> tuple:
    """Return (sign, |e|) when a negative rational coefficient leads e."""
    if isinstance(e, Const):
        if e.im == 0 and e.re < 0:
            return -1, Const.make(-e.re)
        return 1, e
    if isinstance(e, Mul) and isinstance(e.factors[0], Const):
        c = e.factors[0]
        if c.im == 0 and c.re < 0:
            return -1, mul(Const.make(-c.re), *e.factors[1:])
    if isinstance(e, Add):
        # pull the sign of the first (lowest-key) term so sin(-x+y) stays put
        first = e.terms[0]
        s, _ = _strip_sign(first)
        if s < 0 and all(_strip_sign(t)[0] < 0 for t in e.terms):
            return -1, add(*[neg(t) for t in e.terms])
    return 1, e


def sin(a):
    return fn("sin", a)


def cos(a):
    return fn("cos", a)


def sinh(a):
    return fn("sinh", a)


def cosh(a):
    return fn("cosh", a)


def tanh(a):
    return fn("tanh", a)


def exp(a):
    return fn("exp", a)


def ln(a):
    return fn("ln", a)


def rational(p, q=1) -> Const:
    return Const.make(Fraction(p, q))


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions, rebuilding through constructors."""
    hits = e.free.intersection(mapping.keys())
    if not hits:
        return e
    memo: dict = {}

    def walk(node: Expr) -> Expr:
        got = memo.get(node.key)
        if got is not None:
            return got
        if isinstance(node, Var):
            out = mapping.get(node.name, node)
            out = _coerce(out)
        elif isinstance(node, Add):
            out = add(*[walk(t) for t in node.terms])
        elif isinstance(node, Mul):
            out = mul(*[walk(f) for f in node.factors])
        elif isinstance(node, Pow):
            out = pw(walk(node.base), node.expo)
        elif isinstance(node, Func):
            out = fn(node.fname, walk(node.arg))
        else:
            out = node
        memo[node.key] = out
        return out

    return walk(e)


def free_variables(e: Expr) -> frozenset:
    return e.free


def iter_nodes(e: Expr) -> Iterable[Expr]:
    """Yield every node of the tree once (children before parents)."""
    seen = set()
    stack = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if node.key in seen:
            continue
        if expanded:
            seen.add(node.key)
            yield node
            continue
        stack.append((node, True))
        if isinstance(node, Add):
            stack.extend((t, False) for t in node.terms)
        elif isinstance(node, Mul):
            stack.extend((f, False) for f in node.factors)
        elif isinstance(node, Pow):
            stack.append((node.base, False))
        elif isinstance(node, Func):
            stack.append((node.arg, False))
