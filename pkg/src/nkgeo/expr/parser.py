"""Text to expression trees.

Grammar (usual precedence, ^ binds tightest and is right-associative):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME '(' expr ')' | NAME | '(' expr ')'

Numbers are integers or decimals and parse to exact rationals; ``i`` is the
imaginary unit and ``pi`` the circle constant.  Only sin, cos, sinh, cosh,
tanh, exp, ln are accepted as function heads.  Non-constant exponents are
rewritten through exp/ln.
"""

from __future__ import annotations

from fractions import Fraction

from .nodes import (
    FUNCTION_NAMES,
    Const,
    Expr,
    I_UNIT,
    PI,
    Var,
    add,
    div,
    fn,
    mul,
    neg,
    pw_expr,
)


class ParseError(Exception):
    """Raised on malformed input; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_PUNCT = set("+-*/^()")


def _tokenize(text: str) -> list:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _PUNCT:
            tokens.append((c, c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            tokens.append(("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else add(e, neg(rhs))
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.peek()[0] == "-":
            self.advance()
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            expo = self.unary()
            return pw_expr(base, expo)
        return base

    def atom(self) -> Expr:
        kind, value, position = self.advance()
        if kind == "num":
            return Const.make(Fraction(value))
        if kind == "name":
            if self.peek()[0] == "(":
                if value not in FUNCTION_NAMES:
                    raise ParseError(f"unknown function {value!r}", position)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return fn(value, arg)
            if value == "i":
                return I_UNIT
            if value == "pi":
                return PI
            return Var(value)
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {value!r}" if value else "unexpected end of input",
                         position)


def parse(text: str) -> Expr:
    """Parse text into an expression tree."""
    return _Parser(text).parse()
